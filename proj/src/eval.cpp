#include "ishap/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "ishap/errors.hpp"
#include "ishap/interaction.hpp"
#include "ishap/rng.hpp"
#include "ishap/sampling.hpp"

namespace ishap {

namespace {

F1Report f1_from_counts(std::int64_t tp, std::int64_t n_pred, std::int64_t n_truth,
                        bool empty_empty_is_one) {
  F1Report r;
  r.tp = tp;
  r.fp = n_pred - tp;
  r.fn = n_truth - tp;
  if (n_pred == 0 && n_truth == 0 && empty_empty_is_one) {
    r.precision = r.recall = r.f1 = 1.0;
    return r;
  }
  r.precision = n_pred > 0 ? static_cast<double>(tp) / static_cast<double>(n_pred) : 0.0;
  r.recall = n_truth > 0 ? static_cast<double>(tp) / static_cast<double>(n_truth) : 0.0;
  double denom = r.precision + r.recall;
  r.f1 = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

void check_same_width(const Partition& a, const Partition& b) {
  if (a.width() != b.width()) throw ParseError("f1: partitions cover different feature counts");
}

std::set<std::pair<int, int>> co_grouped_pairs(const Partition& p) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& part : p.parts)
    for (std::size_t a = 0; a < part.size(); ++a)
      for (std::size_t b = a + 1; b < part.size(); ++b) pairs.emplace(part[a], part[b]);
  return pairs;
}

}  // namespace

F1Report set_f1(const Partition& predicted, const Partition& truth) {
  check_same_width(predicted, truth);
  std::set<std::vector<int>> truth_parts(truth.parts.begin(), truth.parts.end());
  std::int64_t tp = 0;
  for (const auto& part : predicted.parts) tp += truth_parts.count(part) ? 1 : 0;
  return f1_from_counts(tp, static_cast<std::int64_t>(predicted.parts.size()),
                        static_cast<std::int64_t>(truth.parts.size()), false);
}

F1Report pairwise_f1(const Partition& predicted, const Partition& truth) {
  check_same_width(predicted, truth);
  auto pred_pairs = co_grouped_pairs(predicted);
  auto truth_pairs = co_grouped_pairs(truth);
  std::int64_t tp = 0;
  for (const auto& pr : pred_pairs) tp += truth_pairs.count(pr) ? 1 : 0;
  return f1_from_counts(tp, static_cast<std::int64_t>(pred_pairs.size()),
                        static_cast<std::int64_t>(truth_pairs.size()), true);
}

namespace {

// True iff every part lies entirely inside side 1 or entirely inside side 2.
bool split_admissible(const std::vector<std::vector<int>>& parts,
                      const std::vector<char>& in_first) {
  for (const auto& part : parts) {
    bool first = in_first[static_cast<std::size_t>(part.front())] != 0;
    for (int j : part)
      if ((in_first[static_cast<std::size_t>(j)] != 0) != first) return false;
  }
  return true;
}

}  // namespace

FidelityReport surrogate_fidelity(const SurrogateFn& method, const Model& model,
                                  const Dataset& data, int trials, std::uint64_t seed) {
  if (trials < 2) throw ParseError("fidelity: trials must be >= 2");
  const int d = model.dim();
  CenteredModel centered = center(model, data);

  constexpr int kSplitDraws = 1000;
  constexpr int kPointRedraws = 50;

  FidelityReport report;
  for (int t = 0; t < trials; ++t) {
    Rng rng(stream_seed(seed, Stream::Trial, static_cast<std::uint64_t>(t)));
    bool recorded = false;
    for (int attempt = 0; attempt < kPointRedraws && !recorded; ++attempt) {
      Eigen::VectorXd x1 = data.rows.row(rng.index(data.n()));
      Eigen::VectorXd x2 = data.rows.row(rng.index(data.n()));
      Surrogate e1 = method(x1, rng.u64());
      Surrogate e2 = method(x2, rng.u64());

      std::vector<char> in_first(static_cast<std::size_t>(d), 0);
      for (int draw = 0; draw < kSplitDraws; ++draw) {
        for (int j = 0; j < d; ++j) in_first[static_cast<std::size_t>(j)] = rng.coin() ? 1 : 0;
        if (!split_admissible(e1.parts, in_first) || !split_admissible(e2.parts, in_first))
          continue;

        Eigen::VectorXd mixed(d);
        for (int j = 0; j < d; ++j)
          mixed[j] = in_first[static_cast<std::size_t>(j)] ? x1[j] : x2[j];
        double implied = 0.0;
        for (std::size_t p = 0; p < e1.parts.size(); ++p)
          if (in_first[static_cast<std::size_t>(e1.parts[p].front())]) implied += e1.values[p];
        for (std::size_t p = 0; p < e2.parts.size(); ++p)
          if (!in_first[static_cast<std::size_t>(e2.parts[p].front())]) implied += e2.values[p];

        report.pairs.push_back({implied, centered.evaluate_one(mixed)});
        recorded = true;
        break;
      }
    }
    if (!recorded) ++report.skipped;
  }

  report.trials = static_cast<std::int64_t>(report.pairs.size());
  double mean_actual = 0.0;
  for (const auto& pr : report.pairs) mean_actual += pr.actual;
  if (report.trials > 0) mean_actual /= static_cast<double>(report.trials);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& pr : report.pairs) {
    ss_res += (pr.actual - pr.implied) * (pr.actual - pr.implied);
    ss_tot += (pr.actual - mean_actual) * (pr.actual - mean_actual);
  }
  // Degenerate constant-output case: perfect surrogate scores 1, anything
  // else 0.
  report.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return report;
}

CorrelationReport importance_correlation(const std::vector<Surrogate>& explanations,
                                         const GroundTruthGAM& gam,
                                         const std::vector<Eigen::VectorXd>& points) {
  if (explanations.size() != points.size())
    throw ParseError("correlation: explanations/points length mismatch");
  std::map<std::vector<int>, std::size_t> truth_index;
  for (std::size_t p = 0; p < gam.partition.parts.size(); ++p)
    truth_index[gam.partition.parts[p]] = p;

  CorrelationReport report;
  std::vector<double> predicted;
  std::vector<double> oracle;
  for (std::size_t e = 0; e < explanations.size(); ++e) {
    std::vector<double> importance = ground_truth_importance(gam, points[e]);
    for (std::size_t p = 0; p < explanations[e].parts.size(); ++p) {
      auto it = truth_index.find(explanations[e].parts[p]);
      if (it == truth_index.end()) {
        ++report.excluded;
        continue;
      }
      predicted.push_back(explanations[e].values[p]);
      oracle.push_back(importance[it->second]);
    }
  }
  report.matched = static_cast<std::int64_t>(predicted.size());
  if (report.matched < 3) throw ParseError("correlation: fewer than 3 matched observations");
  report.r = pearson(predicted, oracle);
  return report;
}

AblationReport ablation_run(const AblationConfig& cfg, bool with_test) {
  if (cfg.trials < 1) throw ParseError("ablation: trials must be >= 1");
  ExplainParams params = cfg.params;
  params.mode = SearchMode::Exact;

  AblationReport report;
  auto t_start = std::chrono::steady_clock::now();
  for (int t = 0; t < cfg.trials; ++t) {
    std::uint64_t trial_seed = stream_seed(params.seed, Stream::Trial, static_cast<std::uint64_t>(t));
    Rng rng(trial_seed);
    std::uint64_t gam_seed = rng.u64();
    std::uint64_t data_seed = rng.u64();
    std::uint64_t run_seed = rng.u64();

    GroundTruthGAM gam = sample_ground_truth(cfg.d, cfg.kind, cfg.dist, gam_seed);
    Dataset data = sample_dataset(gam, cfg.n_points, data_seed);
    Eigen::VectorXd x = data.rows.row(rng.index(data.n()));
    Model model(gam.to_model_spec());

    AblationTrialRow row;
    auto row_start = std::chrono::steady_clock::now();
    try {
      CenteredModel centered = center(model, data);
      double prediction_c = model.evaluate_one(x) - centered.baseline();
      InteractionGraph graph =
          with_test
              ? build_interaction_graph(x, centered, data, params.n_s, params.alpha, run_seed)
              : InteractionGraph::complete(cfg.d, params.alpha);
      ObjectiveConfig obj{params.lambda, params.regularizer};
      CachedValues values(monte_carlo_value_fn(centered, data, x, params.n, run_seed));
      std::int64_t candidates = 0;
      Partition found = find_partition_exact(graph, values, prediction_c, obj,
                                             params.component_guard, &candidates);
      row.candidate_partitions = candidates;
      row.value_sets = values.cache().misses();
      row.set_f1 = set_f1(found, gam.partition).f1;
    } catch (const GuardError&) {
      row.guard_failed = true;
      ++report.guard_failures;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - row_start).count();

    report.candidate_partitions += row.candidate_partitions;
    report.value_fn_evaluations += row.value_sets;
    if (!row.guard_failed) report.mean_set_f1 += row.set_f1;
    report.rows.push_back(row);
  }
  std::int64_t ok = cfg.trials - report.guard_failures;
  if (ok > 0) report.mean_set_f1 /= static_cast<double>(ok);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

}  // namespace ishap
