#include "ishap/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "ishap/errors.hpp"
#include "ishap/parallel.hpp"
#include "ishap/rng.hpp"

namespace ishap {

namespace {

std::vector<int> player_union(const std::vector<std::vector<int>>& players, std::uint32_t mask) {
  std::vector<int> u;
  for (std::size_t b = 0; b < players.size(); ++b)
    if (mask & (1u << b)) u.insert(u.end(), players[b].begin(), players[b].end());
  std::sort(u.begin(), u.end());
  return u;
}

}  // namespace

double CoalitionGame::worth(std::uint32_t player_mask) const {
  if (player_mask == 0) return 0.0;
  return values->at(player_union(players, player_mask)).mean;
}

std::vector<double> shapley_values(const CoalitionGame& game, double* tolerance_out) {
  const int m = static_cast<int>(game.players.size());
  if (m == 0) {
    if (tolerance_out) *tolerance_out = 0.0;
    return {};
  }
  if (m > kMaxPlayers)
    throw GuardError("coalition game has " + std::to_string(m) + " players, limit is " +
                     std::to_string(kMaxPlayers));

  // Every subset worth, chunked so estimates can run in parallel without
  // materializing all unions at once.
  const std::uint32_t n_masks = 1u << m;
  std::vector<double> worth(n_masks, 0.0);
  double tol_sum = 0.0;
  const std::uint32_t chunk = 4096;
  for (std::uint32_t lo = 1; lo < n_masks; lo += chunk) {
    std::uint32_t hi = std::min(n_masks, lo + chunk);
    std::vector<std::vector<int>> unions;
    unions.reserve(hi - lo);
    for (std::uint32_t mask = lo; mask < hi; ++mask)
      unions.push_back(player_union(game.players, mask));
    prefetch(*game.values, unions);
    for (std::uint32_t mask = lo; mask < hi; ++mask) {
      ValueEstimate est = game.values->at(unions[mask - lo]);
      worth[mask] = est.mean;
      if (est.n > 0) tol_sum += est.variance / static_cast<double>(est.n);
    }
  }

  // weight[t] = t!(m-1-t)!/m! = 1/(m * C(m-1, t)); binomials are exact here.
  std::vector<double> weight(static_cast<std::size_t>(m), 0.0);
  for (int t = 0; t < m; ++t) {
    double binom = 1.0;
    for (int k = 1; k <= t; ++k) binom = binom * static_cast<double>(m - k) / static_cast<double>(k);
    weight[static_cast<std::size_t>(t)] = 1.0 / (static_cast<double>(m) * binom);
  }

  std::vector<double> phi(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    const std::uint32_t bit = 1u << i;
    double acc = 0.0;
    for (std::uint32_t sub = 0; sub < n_masks; ++sub) {
      if (sub & bit) continue;
      acc += weight[static_cast<std::size_t>(std::popcount(sub))] * (worth[sub | bit] - worth[sub]);
    }
    phi[static_cast<std::size_t>(i)] = acc;
  }
  if (tolerance_out) *tolerance_out = 3.0 * std::sqrt(tol_sum);
  return phi;
}

double interaction_effect(const std::vector<int>& part, const ValueCache& cache) {
  if (part.size() == 1) return 0.0;
  auto whole = cache.lookup(part);
  if (!whole) throw std::out_of_range("interaction_effect: part not cached");
  double singles = 0.0;
  for (int j : part) {
    auto est = cache.lookup({j});
    if (!est) throw std::out_of_range("interaction_effect: singleton not cached");
    singles += est->mean;
  }
  return whole->mean - singles;
}

namespace {

void validate_params(const ExplainParams& p) {
  if (!(p.alpha > 0.0) || !(p.alpha < 1.0)) throw ParseError("explain: alpha must be in (0, 1)");
  if (!std::isfinite(p.lambda) || p.lambda < 0.0)
    throw ParseError("explain: lambda must be finite and >= 0");
  if (p.n < 1) throw ParseError("explain: n must be >= 1");
  if (p.n_s < 8) throw ParseError("explain: n_s must be >= 8");
  if (p.component_guard < 1) throw ParseError("explain: component guard must be >= 1");
}

}  // namespace

Explanation explain(const Eigen::VectorXd& x, const Model& model, const Dataset& background,
                    const ExplainParams& params) {
  validate_params(params);
  if (x.size() != model.dim()) throw ParseError("explain: point dimension mismatch");
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i])) throw ParseError("explain: point has non-finite coordinate");

  CenteredModel centered = center(model, background);
  const double raw = model.evaluate_one(x);
  const double prediction_c = raw - centered.baseline();

  Explanation out;
  out.prediction = raw;
  out.baseline = centered.baseline();
  out.config = params;
  out.point = x;

  out.graph = build_interaction_graph(x, centered, background, params.n_s, params.alpha,
                                      params.seed);

  ObjectiveConfig cfg{params.lambda, params.regularizer};
  if (params.lambda_autoscale) {
    Eigen::VectorXd bg = centered.evaluate(background.rows);
    GroupStats g = summarize(std::span<const double>(bg.data(), static_cast<std::size_t>(bg.size())));
    cfg.lambda = params.lambda * g.variance;
  }

  CachedValues values(monte_carlo_value_fn(centered, background, x, params.n, params.seed));
  std::int64_t candidates = 0;
  out.partition = params.mode == SearchMode::Exact
                      ? find_partition_exact(out.graph, values, prediction_c, cfg,
                                             params.component_guard, &candidates)
                      : find_partition_greedy(out.graph, values, prediction_c, cfg,
                                              params.merge_rule, &candidates);

  CoalitionGame game{out.partition.parts, &values};
  double tolerance = 0.0;
  std::vector<double> e = shapley_values(game, &tolerance);
  out.tolerance = tolerance;

  out.parts.reserve(out.partition.parts.size());
  for (std::size_t i = 0; i < out.partition.parts.size(); ++i) {
    ExplanationPart part;
    part.features = out.partition.parts[i];
    part.value = e[i];
    double singles = 0.0;
    for (int j : part.features) singles += values.at(std::vector<int>{j}).mean;
    part.individual_sum = singles;
    part.interaction_effect = interaction_effect(part.features, values.cache());
    out.parts.push_back(std::move(part));
  }

  out.diagnostics.value_sets = values.cache().misses();
  out.diagnostics.candidate_partitions = candidates;
  return out;
}

Eigen::VectorXd sampling_shapley_singletons(const Eigen::VectorXd& x, const CenteredModel& model,
                                            const Dataset& background,
                                            std::int64_t n_permutations, std::uint64_t seed) {
  const int d = model.dim();
  if (x.size() != d) throw ParseError("sampling_shapley: point dimension mismatch");
  if (background.d() != d) throw ParseError("sampling_shapley: background dimension mismatch");
  if (n_permutations < 1) throw ParseError("sampling_shapley: n_permutations must be >= 1");

  const double full_value = model.evaluate_one(x);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
  if (d == 1) {
    // Every permutation contributes exactly the full value.
    phi[0] = full_value;
    return phi;
  }

  // Each permutation walks one background row toward x; the d-1 interior
  // chain points are evaluated in batches, the endpoints are pinned to 0 and
  // f_c(x), so per-permutation contributions telescope exactly.
  const std::int64_t interior = d - 1;
  const std::int64_t perm_chunk = std::max<std::int64_t>(1, 8192 / interior);
  std::vector<int> order(static_cast<std::size_t>(d));
  for (std::int64_t p0 = 0; p0 < n_permutations; p0 += perm_chunk) {
    const std::int64_t p1 = std::min(n_permutations, p0 + perm_chunk);
    Eigen::MatrixXd chain((p1 - p0) * interior, d);
    std::vector<std::vector<int>> orders;
    orders.reserve(static_cast<std::size_t>(p1 - p0));
    for (std::int64_t p = p0; p < p1; ++p) {
      Rng rng(stream_seed(seed, Stream::Permutation, static_cast<std::uint64_t>(p)));
      Eigen::VectorXd point = background.rows.row(rng.index(background.n()));
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (std::int64_t k = 0; k < interior; ++k) {
        point[order[static_cast<std::size_t>(k)]] = x[order[static_cast<std::size_t>(k)]];
        chain.row((p - p0) * interior + k) = point;
      }
      orders.push_back(order);
    }
    Eigen::VectorXd values = model.evaluate(chain);
    for (std::int64_t p = p0; p < p1; ++p) {
      const auto& ord = orders[static_cast<std::size_t>(p - p0)];
      double prev = 0.0;
      for (std::int64_t k = 0; k < interior; ++k) {
        double cur = values[(p - p0) * interior + k];
        phi[ord[static_cast<std::size_t>(k)]] += cur - prev;
        prev = cur;
      }
      phi[ord[static_cast<std::size_t>(d - 1)]] += full_value - prev;
    }
  }
  return phi / static_cast<double>(n_permutations);
}

}  // namespace ishap
