#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ishap/model.hpp"
#include "ishap/partition.hpp"

namespace ishap {

enum class InnerKind { Product, Sine, Mixed };
enum class FeatureDist { Normal, Uniform };

// Marginal distribution of one synthetic feature column.
// Uniform columns are fixed to (0, 3); mu/sigma apply to normal columns.
struct ColumnDist {
  FeatureDist kind = FeatureDist::Normal;
  double mu = 0.0;
  double sigma = 1.0;
};

// Benchmark model with known additive structure: f(x) = sum over parts of
// either prod_j a_j x_j or sin(sum_j a_j x_j), with |a_j| in [0.5, 1.5].
struct GroundTruthGAM {
  int d = 0;
  Partition partition;          // the ground-truth grouping
  std::vector<GamTerm> terms;   // aligned with partition.parts
  std::vector<ColumnDist> columns;

  ModelSpec to_model_spec() const;
  // gam ModelSpec JSON plus a ground_truth_partition field.
  nlohmann::ordered_json to_json() const;
  // True iff some part has two or more features.
  bool has_interaction() const;
};

// Part sizes drawn as Poisson(1.5) clamped to [1, remaining], assigned to
// consecutive index blocks; coefficients uniform in [0.5, 1.5] with random
// sign; Mixed picks product or sine per part by coin flip.
GroundTruthGAM sample_ground_truth(int d, InnerKind kind, FeatureDist dist, std::uint64_t seed);

// n i.i.d. rows, columns independent per the column spec.
Dataset sample_dataset(const GroundTruthGAM& gam, int n, std::uint64_t seed);

// Per-part gradient-times-value oracle, defined for product parts only:
// the mixed partial of a product term is prod a_j, so the importance is
// prod a_j * prod x_j. Sine parts raise an error.
std::vector<double> ground_truth_importance(const GroundTruthGAM& gam, const Eigen::VectorXd& x);

// Per-feature variant: (df/dx_i)(x) * x_i. For a product part this equals the
// whole part's importance for every member.
std::vector<double> ground_truth_feature_importance(const GroundTruthGAM& gam,
                                                    const Eigen::VectorXd& x);

}  // namespace ishap
