#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ishap/model.hpp"
#include "ishap/partition.hpp"
#include "ishap/shapley.hpp"
#include "ishap/synth.hpp"

namespace ishap {

struct F1Report {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

// Exact-match F1 over parts, singletons included.
F1Report set_f1(const Partition& predicted, const Partition& truth);

// F1 over co-grouped feature pairs. Both pair sets empty scores 1, exactly
// one empty scores 0.
F1Report pairwise_f1(const Partition& predicted, const Partition& truth);

// Additive surrogate extracted from an explanation: parts and their values.
struct Surrogate {
  std::vector<std::vector<int>> parts;
  std::vector<double> values;
};

using SurrogateFn = std::function<Surrogate(const Eigen::VectorXd& x, std::uint64_t seed)>;

struct FidelityTrial {
  double implied = 0.0;
  double actual = 0.0;
};

struct FidelityReport {
  double r_squared = 0.0;
  std::int64_t trials = 0;
  std::int64_t skipped = 0;  // trials abandoned as inadmissible
  std::vector<FidelityTrial> pairs;
};

// Point-mixing fidelity protocol. Per trial: two dataset points are explained,
// a uniform feature split (I1, I2) is drawn until every part of both
// explanations falls entirely inside I1 or I2 (up to 1000 split draws, then
// fresh points, bounded retries), and the surrogate's implied value for the
// mixed point x' (I1 from the first point, I2 from the second) is compared to
// the centered model output. r_squared = 1 - SS_res/SS_tot over all recorded
// trials.
FidelityReport surrogate_fidelity(const SurrogateFn& method, const Model& model,
                                  const Dataset& data, int trials, std::uint64_t seed);

struct CorrelationReport {
  double r = 0.0;
  std::int64_t matched = 0;   // (point, part) observations entering r
  std::int64_t excluded = 0;  // parts with no exact match in the ground truth
};

// Pearson correlation between explanation part values and the gradient
// oracle over all (point, matched part) observations. Product GAMs only;
// fewer than 3 matched observations is an error.
CorrelationReport importance_correlation(const std::vector<Surrogate>& explanations,
                                         const GroundTruthGAM& gam,
                                         const std::vector<Eigen::VectorXd>& points);

struct AblationConfig {
  int d = 10;
  InnerKind kind = InnerKind::Product;
  FeatureDist dist = FeatureDist::Normal;
  int n_points = 10000;
  int trials = 10;
  ExplainParams params;  // mode is forced to exact inside the run
};

struct AblationTrialRow {
  std::int64_t candidate_partitions = 0;
  std::int64_t value_sets = 0;
  double set_f1 = 0.0;
  double seconds = 0.0;
  bool guard_failed = false;
};

struct AblationReport {
  double runtime_seconds = 0.0;
  std::int64_t value_fn_evaluations = 0;   // distinct coalitions estimated
  std::int64_t candidate_partitions = 0;
  double mean_set_f1 = 0.0;
  std::int64_t guard_failures = 0;
  std::vector<AblationTrialRow> rows;
};

// Exact-mode pipeline with the interaction test either live (with_test) or
// replaced by a complete graph. Trial seeds depend only on (seed, index), so
// the two arms see identical models, datasets, and points.
AblationReport ablation_run(const AblationConfig& cfg, bool with_test);

}  // namespace ishap
