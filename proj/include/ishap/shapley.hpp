#pragma once

#include <cstdint>
#include <vector>

#include "ishap/interaction.hpp"
#include "ishap/model.hpp"
#include "ishap/partition.hpp"
#include "ishap/sampling.hpp"

namespace ishap {

inline constexpr int kMaxPlayers = 20;

// Coalition game whose players are the parts of a partition. The worth of a
// player subset is the cached value of the union of its parts; the empty
// subset is worth 0 by definition.
struct CoalitionGame {
  std::vector<std::vector<int>> players;
  CachedValues* values = nullptr;  // non-owning

  double worth(std::uint32_t player_mask) const;
};

// Exact Shapley values, one per player:
//   phi_i = sum over T not containing i of |T|!(m-|T|-1)!/m! (v(T+i) - v(T)).
// All 2^m subset worths are evaluated; m is capped at kMaxPlayers.
// tolerance_out, when given, receives 3*sqrt(sum variance/n) over every
// cached estimate entering the computation.
std::vector<double> shapley_values(const CoalitionGame& game, double* tolerance_out = nullptr);

// v(part) - sum of v({j}) for j in the part; exactly 0 for singletons.
// Every needed estimate must already be cached.
double interaction_effect(const std::vector<int>& part, const ValueCache& cache);

enum class SearchMode { Greedy, Exact };

struct ExplainParams {
  double alpha = 0.01;
  double lambda = 5e-3;
  std::int64_t n = 2000;    // value-function draws per coalition
  std::int64_t n_s = 2000;  // interaction-test draws
  SearchMode mode = SearchMode::Greedy;
  Regularizer regularizer = Regularizer::Pairwise;
  MergeRule merge_rule = MergeRule::Edge;
  std::uint64_t seed = 0;
  bool lambda_autoscale = false;
  int component_guard = kDefaultComponentGuard;
};

struct ExplanationPart {
  std::vector<int> features;
  double value = 0.0;               // Shapley contribution e_i
  double individual_sum = 0.0;      // sum of v({j}) over the part
  double interaction_effect = 0.0;  // v(part) - individual_sum
};

// Pipeline counters, reported for instrumentation (not serialized).
struct ExplainDiagnostics {
  std::int64_t value_sets = 0;            // distinct coalitions estimated
  std::int64_t candidate_partitions = 0;  // partitions scored by the search
};

struct Explanation {
  double prediction = 0.0;  // raw f(x)
  double baseline = 0.0;    // centering mean
  double tolerance = 0.0;   // 3 sigma of the Monte-Carlo error entering efficiency
  std::vector<ExplanationPart> parts;
  InteractionGraph graph;
  Partition partition;
  ExplainParams config;
  Eigen::VectorXd point;
  ExplainDiagnostics diagnostics;
};

// Full pipeline: center, interaction graph, partition search, coalition game,
// Shapley values, interaction effects. Deterministic given params.seed.
Explanation explain(const Eigen::VectorXd& x, const Model& model, const Dataset& background,
                    const ExplainParams& params);

// Permutation-sampling per-feature Shapley values under the same marginal
// value function (the singleton-SHAP comparison baseline). Each permutation
// walks one background row from the empty chain value 0 to the full value
// f_c(x), so efficiency holds exactly per permutation and d = 1 returns
// exactly f_c(x).
Eigen::VectorXd sampling_shapley_singletons(const Eigen::VectorXd& x, const CenteredModel& model,
                                            const Dataset& background,
                                            std::int64_t n_permutations, std::uint64_t seed);

}  // namespace ishap
