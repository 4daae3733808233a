#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ishap/errors.hpp"
#include "ishap/eval.hpp"
#include "ishap/interaction.hpp"
#include "ishap/io.hpp"
#include "ishap/model.hpp"
#include "ishap/rng.hpp"
#include "ishap/shapley.hpp"
#include "ishap/synth.hpp"

namespace {

using namespace ishap;

struct RunFlags {
  double alpha = 0.01;
  double lambda = 5e-3;
  std::int64_t n = 2000;
  std::int64_t n_s = 2000;
  std::string mode = "greedy";
  std::string regularizer = "pairwise";
  std::string merge_rule = "edge";
  std::uint64_t seed = 0;
  bool lambda_autoscale = false;
  int component_guard = kDefaultComponentGuard;

  ExplainParams to_params() const {
    ExplainParams p;
    p.alpha = alpha;
    p.lambda = lambda;
    p.n = n;
    p.n_s = n_s;
    p.mode = mode == "exact" ? SearchMode::Exact : SearchMode::Greedy;
    p.regularizer = regularizer == "cardinality" ? Regularizer::Cardinality : Regularizer::Pairwise;
    p.merge_rule = merge_rule == "path" ? MergeRule::Path : MergeRule::Edge;
    p.seed = seed;
    p.lambda_autoscale = lambda_autoscale;
    p.component_guard = component_guard;
    return p;
  }
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--alpha", f.alpha, "Interaction-test significance level")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12))
      ->capture_default_str();
  cmd->add_option("--lambda", f.lambda, "Partition regularization strength")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--n", f.n, "Monte-Carlo draws per coalition value")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--ns", f.n_s, "Interaction-test sample size")
      ->check(CLI::Range(static_cast<std::int64_t>(8), static_cast<std::int64_t>(1) << 40))
      ->capture_default_str();
  cmd->add_option("--mode", f.mode, "Partition search mode")
      ->check(CLI::IsMember({"greedy", "exact"}))
      ->capture_default_str();
  cmd->add_option("--regularizer", f.regularizer, "Objective regularizer")
      ->check(CLI::IsMember({"pairwise", "cardinality"}))
      ->capture_default_str();
  cmd->add_option("--merge-rule", f.merge_rule, "Greedy merge eligibility rule")
      ->check(CLI::IsMember({"edge", "path"}))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master random seed")->capture_default_str();
  cmd->add_flag("--lambda-autoscale", f.lambda_autoscale,
                "Scale lambda by the centered model's background variance");
  cmd->add_option("--component-guard", f.component_guard,
                  "Largest component size allowed in exact mode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

InnerKind parse_kind(const std::string& s) {
  if (s == "product") return InnerKind::Product;
  if (s == "sine") return InnerKind::Sine;
  return InnerKind::Mixed;
}

FeatureDist parse_dist(const std::string& s) {
  return s == "uniform" ? FeatureDist::Uniform : FeatureDist::Normal;
}

Eigen::VectorXd parse_inline_point(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0'))
      throw ParseError("point: not a number: '" + cell + "'");
    vals.push_back(v);
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) x[static_cast<Eigen::Index>(i)] = vals[i];
  return x;
}

// --- explain ---------------------------------------------------------------

struct ExplainArgs {
  std::string model_path, data_path, out_path, graph_out, point_text;
  std::int64_t row = -1;
  RunFlags flags;
};

int cmd_explain(const ExplainArgs& a) {
  if ((a.row < 0) == a.point_text.empty())
    throw ParseError("explain: give exactly one of --row or --point");
  Model model(load_model_spec_file(a.model_path));
  Dataset data = load_csv_file(a.data_path);
  Eigen::VectorXd x;
  if (a.row >= 0) {
    if (a.row >= data.n()) throw ParseError("explain: --row out of range");
    x = data.rows.row(a.row);
  } else {
    x = parse_inline_point(a.point_text);
  }
  Explanation explanation = explain(x, model, data, a.flags.to_params());
  atomic_write(a.out_path, dump_json(explanation_to_json(explanation)));
  if (!a.graph_out.empty()) atomic_write(a.graph_out, to_dot(explanation.graph, x));
  return 0;
}

// --- synth-bench -----------------------------------------------------------

struct BenchArgs {
  int d = 8;
  std::string kind = "product";
  std::string dist = "normal";
  int trials = 10;
  int points = 10000;
  std::string out_path;
  RunFlags flags;
};

int cmd_synth_bench(const BenchArgs& a) {
  if (a.d < 2) throw ParseError("synth-bench: d must be >= 2");
  ExplainParams base = a.flags.to_params();
  std::ostringstream csv;
  csv << "trial,set_precision,set_recall,set_f1,pair_precision,pair_recall,pair_f1,"
         "true_parts,found_parts\n";
  double sums[6] = {0, 0, 0, 0, 0, 0};
  double part_sums[2] = {0, 0};
  for (int t = 0; t < a.trials; ++t) {
    std::uint64_t trial_seed = stream_seed(base.seed, Stream::Trial, static_cast<std::uint64_t>(t));
    Rng rng(trial_seed);
    GroundTruthGAM gam = sample_ground_truth(a.d, parse_kind(a.kind), parse_dist(a.dist), rng.u64());
    Dataset data = sample_dataset(gam, a.points, rng.u64());
    std::uint64_t run_seed = rng.u64();
    Eigen::VectorXd x = data.rows.row(rng.index(data.n()));
    Model model(gam.to_model_spec());
    ExplainParams params = base;
    params.seed = run_seed;
    Explanation explanation = explain(x, model, data, params);
    F1Report set_report = set_f1(explanation.partition, gam.partition);
    F1Report pair_report = pairwise_f1(explanation.partition, gam.partition);
    const double row[6] = {set_report.precision, set_report.recall,   set_report.f1,
                           pair_report.precision, pair_report.recall, pair_report.f1};
    csv << t;
    for (int c = 0; c < 6; ++c) {
      csv << ',' << format_g17(row[c]);
      sums[c] += row[c];
    }
    csv << ',' << gam.partition.parts.size() << ',' << explanation.partition.parts.size() << '\n';
    part_sums[0] += static_cast<double>(gam.partition.parts.size());
    part_sums[1] += static_cast<double>(explanation.partition.parts.size());
  }
  csv << "mean";
  for (int c = 0; c < 6; ++c) csv << ',' << format_g17(sums[c] / a.trials);
  csv << ',' << format_g17(part_sums[0] / a.trials) << ',' << format_g17(part_sums[1] / a.trials)
      << '\n';
  atomic_write(a.out_path, csv.str());
  return 0;
}

// --- fidelity ----------------------------------------------------------------

struct FidelityArgs {
  std::string model_path, data_path, method = "ishap", out_path, csv_path;
  int trials = 100;
  RunFlags flags;
};

int cmd_fidelity(const FidelityArgs& a) {
  Model model(load_model_spec_file(a.model_path));
  Dataset data = load_csv_file(a.data_path);
  ExplainParams params = a.flags.to_params();

  SurrogateFn method;
  if (a.method == "ishap") {
    method = [&model, &data, params](const Eigen::VectorXd& x, std::uint64_t run_seed) {
      ExplainParams p = params;
      p.seed = run_seed;
      Explanation e = explain(x, model, data, p);
      Surrogate s;
      s.parts = e.partition.parts;
      for (const auto& part : e.parts) s.values.push_back(part.value);
      return s;
    };
  } else {
    CenteredModel centered = center(model, data);
    method = [centered, &data, params](const Eigen::VectorXd& x, std::uint64_t run_seed) {
      Eigen::VectorXd phi = sampling_shapley_singletons(x, centered, data, params.n, run_seed);
      Surrogate s;
      for (int j = 0; j < static_cast<int>(phi.size()); ++j) {
        s.parts.push_back({j});
        s.values.push_back(phi[j]);
      }
      return s;
    };
  }

  FidelityReport report = surrogate_fidelity(method, model, data, a.trials, params.seed);
  nlohmann::ordered_json doc;
  doc["method"] = a.method;
  doc["r_squared"] = report.r_squared;
  doc["trials"] = report.trials;
  doc["skipped"] = report.skipped;
  doc["pairs"] = nlohmann::ordered_json::array();
  for (const auto& pr : report.pairs) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    row.push_back(pr.implied);
    row.push_back(pr.actual);
    doc["pairs"].push_back(std::move(row));
  }
  atomic_write(a.out_path, dump_json(doc));
  if (!a.csv_path.empty()) {
    std::ostringstream csv;
    csv << "trial,implied,actual\n";
    for (std::size_t t = 0; t < report.pairs.size(); ++t)
      csv << t << ',' << format_g17(report.pairs[t].implied) << ','
          << format_g17(report.pairs[t].actual) << '\n';
    atomic_write(a.csv_path, csv.str());
  }
  return 0;
}

// --- ablation ----------------------------------------------------------------

struct AblationArgs {
  int d = 10;
  std::string kind = "product";
  std::string dist = "normal";
  int trials = 10;
  int points = 10000;
  std::string out_path, csv_path;
  RunFlags flags;
};

nlohmann::ordered_json ablation_arm_json(const AblationReport& r) {
  nlohmann::ordered_json arm;
  arm["candidate_partitions"] = r.candidate_partitions;
  arm["value_fn_evaluations"] = r.value_fn_evaluations;
  arm["mean_set_f1"] = r.mean_set_f1;
  arm["guard_failures"] = r.guard_failures;
  arm["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json jr;
    jr["candidate_partitions"] = row.candidate_partitions;
    jr["value_sets"] = row.value_sets;
    jr["set_f1"] = row.set_f1;
    jr["guard_failed"] = row.guard_failed;
    arm["rows"].push_back(std::move(jr));
  }
  return arm;
}

int cmd_ablation(const AblationArgs& a) {
  AblationConfig cfg;
  cfg.d = a.d;
  cfg.kind = parse_kind(a.kind);
  cfg.dist = parse_dist(a.dist);
  cfg.n_points = a.points;
  cfg.trials = a.trials;
  cfg.params = a.flags.to_params();

  AblationReport with_test = ablation_run(cfg, true);
  AblationReport ablated = ablation_run(cfg, false);

  nlohmann::ordered_json doc;
  doc["d"] = a.d;
  doc["kind"] = a.kind;
  doc["dist"] = a.dist;
  doc["trials"] = a.trials;
  doc["with_test"] = ablation_arm_json(with_test);
  doc["ablated"] = ablation_arm_json(ablated);
  doc["candidate_reduction"] =
      ablated.candidate_partitions > 0
          ? 1.0 - static_cast<double>(with_test.candidate_partitions) /
                      static_cast<double>(ablated.candidate_partitions)
          : 0.0;
  doc["value_reduction"] =
      ablated.value_fn_evaluations > 0
          ? 1.0 - static_cast<double>(with_test.value_fn_evaluations) /
                      static_cast<double>(ablated.value_fn_evaluations)
          : 0.0;
  atomic_write(a.out_path, dump_json(doc));

  if (!a.csv_path.empty()) {
    std::ostringstream csv;
    csv << "arm,trial,candidate_partitions,value_sets,set_f1,guard_failed\n";
    for (int arm = 0; arm < 2; ++arm) {
      const AblationReport& r = arm == 0 ? with_test : ablated;
      for (std::size_t t = 0; t < r.rows.size(); ++t)
        csv << (arm == 0 ? "with_test" : "ablated") << ',' << t << ','
            << r.rows[t].candidate_partitions << ',' << r.rows[t].value_sets << ','
            << format_g17(r.rows[t].set_f1) << ',' << (r.rows[t].guard_failed ? 1 : 0) << '\n';
    }
    atomic_write(a.csv_path, csv.str());
  }
  return 0;
}

// --- synth-gen ----------------------------------------------------------------

struct GenArgs {
  int d = 8;
  std::string kind = "product";
  std::string dist = "normal";
  int points = 10000;
  std::uint64_t seed = 0;
  std::string model_out, data_out;
};

int cmd_synth_gen(const GenArgs& a) {
  if (a.d < 1) throw ParseError("synth-gen: d must be >= 1");
  GroundTruthGAM gam = sample_ground_truth(a.d, parse_kind(a.kind), parse_dist(a.dist), a.seed);
  atomic_write(a.model_out, dump_json(gam.to_json()));
  if (!a.data_out.empty()) {
    Dataset data = sample_dataset(gam, a.points, stream_seed(a.seed, Stream::Dataset, 1));
    std::ostringstream csv;
    write_csv(data, csv);
    atomic_write(a.data_out, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iSHAP: interaction-aware additive explanations for black-box models"};
  app.require_subcommand(1);

  ExplainArgs explain_args;
  auto* sub_explain = app.add_subcommand("explain", "Explain one prediction");
  sub_explain->add_option("--model", explain_args.model_path, "Model spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sub_explain->add_option("--data", explain_args.data_path, "Background dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  sub_explain->add_option("--row", explain_args.row, "Explain this dataset row");
  sub_explain->add_option("--point", explain_args.point_text, "Explain this inline point (comma separated)");
  sub_explain->add_option("--out", explain_args.out_path, "Explanation JSON path")->required();
  sub_explain->add_option("--graph-out", explain_args.graph_out, "Optional DOT graph path");
  add_run_flags(sub_explain, explain_args.flags);

  BenchArgs bench_args;
  auto* sub_bench = app.add_subcommand("synth-bench", "Partition recovery benchmark on synthetic models");
  sub_bench->add_option("--d", bench_args.d, "Feature count")->check(CLI::Range(2, 64))->capture_default_str();
  sub_bench->add_option("--kind", bench_args.kind, "Inner function kind")
      ->check(CLI::IsMember({"product", "sine", "mixed"}))
      ->capture_default_str();
  sub_bench->add_option("--dist", bench_args.dist, "Feature distribution")
      ->check(CLI::IsMember({"normal", "uniform"}))
      ->capture_default_str();
  sub_bench->add_option("--trials", bench_args.trials, "Number of models")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub_bench->add_option("--points", bench_args.points, "Dataset rows per model")
      ->check(CLI::Range(2, 10000000))
      ->capture_default_str();
  sub_bench->add_option("--out", bench_args.out_path, "Per-trial CSV path")->required();
  add_run_flags(sub_bench, bench_args.flags);

  FidelityArgs fidelity_args;
  auto* sub_fidelity = app.add_subcommand("fidelity", "Surrogate fidelity under point mixing");
  sub_fidelity->add_option("--model", fidelity_args.model_path, "Model spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sub_fidelity->add_option("--data", fidelity_args.data_path, "Dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  sub_fidelity->add_option("--method", fidelity_args.method, "Explanation method")
      ->check(CLI::IsMember({"ishap", "shap"}))
      ->capture_default_str();
  sub_fidelity->add_option("--trials", fidelity_args.trials, "Mixing trials")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  sub_fidelity->add_option("--out", fidelity_args.out_path, "Report JSON path")->required();
  sub_fidelity->add_option("--csv", fidelity_args.csv_path, "Optional per-trial CSV path");
  add_run_flags(sub_fidelity, fidelity_args.flags);

  AblationArgs ablation_args;
  auto* sub_ablation = app.add_subcommand("ablation", "Interaction-test ablation (exact mode)");
  sub_ablation->add_option("--d", ablation_args.d, "Feature count")->check(CLI::Range(2, 16))->capture_default_str();
  sub_ablation->add_option("--kind", ablation_args.kind, "Inner function kind")
      ->check(CLI::IsMember({"product", "sine", "mixed"}))
      ->capture_default_str();
  sub_ablation->add_option("--dist", ablation_args.dist, "Feature distribution")
      ->check(CLI::IsMember({"normal", "uniform"}))
      ->capture_default_str();
  sub_ablation->add_option("--trials", ablation_args.trials, "Number of models")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub_ablation->add_option("--points", ablation_args.points, "Dataset rows per model")
      ->check(CLI::Range(2, 10000000))
      ->capture_default_str();
  sub_ablation->add_option("--out", ablation_args.out_path, "Report JSON path")->required();
  sub_ablation->add_option("--csv", ablation_args.csv_path, "Optional per-trial CSV path");
  add_run_flags(sub_ablation, ablation_args.flags);

  GenArgs gen_args;
  auto* sub_gen = app.add_subcommand("synth-gen", "Emit one synthetic ground-truth model (+ dataset)");
  sub_gen->add_option("--d", gen_args.d, "Feature count")->check(CLI::Range(1, 256))->capture_default_str();
  sub_gen->add_option("--kind", gen_args.kind, "Inner function kind")
      ->check(CLI::IsMember({"product", "sine", "mixed"}))
      ->capture_default_str();
  sub_gen->add_option("--dist", gen_args.dist, "Feature distribution")
      ->check(CLI::IsMember({"normal", "uniform"}))
      ->capture_default_str();
  sub_gen->add_option("--points", gen_args.points, "Dataset rows")
      ->check(CLI::Range(2, 10000000))
      ->capture_default_str();
  sub_gen->add_option("--seed", gen_args.seed, "Generator seed")->capture_default_str();
  sub_gen->add_option("--model-out", gen_args.model_out, "Model JSON path")->required();
  sub_gen->add_option("--data-out", gen_args.data_out, "Optional dataset CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sub_explain->parsed()) return cmd_explain(explain_args);
    if (sub_bench->parsed()) return cmd_synth_bench(bench_args);
    if (sub_fidelity->parsed()) return cmd_fidelity(fidelity_args);
    if (sub_ablation->parsed()) return cmd_ablation(ablation_args);
    if (sub_gen->parsed()) return cmd_synth_gen(gen_args);
  } catch (const ishap::ProtocolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ishap::GuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
