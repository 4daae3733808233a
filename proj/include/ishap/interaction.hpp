#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ishap/sampling.hpp"
#include "ishap/stats.hpp"

namespace ishap {

// Mask-sample outputs split by the (mask_i, mask_j) combination of one pair.
// Counts sum to the sample size.
struct BucketStats {
  GroupStats joint;    // i and j both kept from x
  GroupStats only_i;   // i kept, j from background
  GroupStats only_j;   // j kept, i from background
  GroupStats neither;  // both from background
};

BucketStats bucket_pair(const MaskSample& sample, int i, int j);

// Two-sided Welch p-value for the additivity contrast
//   mean(only_i) + mean(only_j) - mean(joint) - mean(neither).
// Zero contrast is what additivity in {i, j} predicts; small p is evidence of
// interaction. Any bucket with fewer than 2 observations yields p = 1.
double contrast_test(const BucketStats& stats);

// Pairwise interaction test results over d features. Edges are exactly the
// pairs with p < alpha.
struct InteractionGraph {
  int d = 0;
  double alpha = 0.0;
  std::vector<double> p_values;  // flat upper triangle, see pair_index

  static std::size_t pair_index(int d, int i, int j);
  double p_value(int i, int j) const;
  bool has_edge(int i, int j) const;
  std::vector<std::pair<int, int>> edges() const;
  std::size_t edge_count() const;

  // Every pair an edge (p = 0); the ablation arm that skips testing.
  static InteractionGraph complete(int d, double alpha);
};

// Alg.: draw one shared mask sample around x, then test every pair on it.
InteractionGraph build_interaction_graph(const Eigen::VectorXd& x, const CenteredModel& model,
                                         const Dataset& background, std::int64_t n_s,
                                         double alpha, std::uint64_t seed);

// Same, from an existing sample (shared by callers that also need the sample).
InteractionGraph graph_from_sample(const MaskSample& sample, double alpha);

// Components sorted by smallest member; members ascending.
std::vector<std::vector<int>> connected_components(const InteractionGraph& graph);

// Graphviz rendering: nodes labeled f<i>:<x_i>, edges labeled with p.
std::string to_dot(const InteractionGraph& graph, const Eigen::VectorXd& x);

}  // namespace ishap
