#include "ishap/synth.hpp"

#include <algorithm>
#include <cmath>

#include "ishap/errors.hpp"
#include "ishap/rng.hpp"

namespace ishap {

ModelSpec GroundTruthGAM::to_model_spec() const {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::Gam;
  spec.d = d;
  spec.terms = terms;
  return spec;
}

nlohmann::ordered_json GroundTruthGAM::to_json() const {
  nlohmann::ordered_json doc = model_spec_to_json(to_model_spec());
  doc["ground_truth_partition"] = partition.parts;
  return doc;
}

bool GroundTruthGAM::has_interaction() const {
  for (const auto& part : partition.parts)
    if (part.size() >= 2) return true;
  return false;
}

GroundTruthGAM sample_ground_truth(int d, InnerKind kind, FeatureDist dist, std::uint64_t seed) {
  if (d < 1) throw ParseError("synth: d must be >= 1");
  Rng rng(stream_seed(seed, Stream::Synth));

  GroundTruthGAM gam;
  gam.d = d;

  // Draw order is pinned: part sizes, then per-part kind and coefficients,
  // then column distributions.
  std::vector<std::vector<int>> parts;
  int assigned = 0;
  while (assigned < d) {
    int k = std::clamp(rng.poisson(1.5), 1, d - assigned);
    std::vector<int> part(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) part[static_cast<std::size_t>(i)] = assigned + i;
    parts.push_back(std::move(part));
    assigned += k;
  }
  gam.partition = make_partition(std::move(parts), d);

  for (const auto& part : gam.partition.parts) {
    GamTerm term;
    switch (kind) {
      case InnerKind::Product: term.kind = GamTerm::Kind::Product; break;
      case InnerKind::Sine: term.kind = GamTerm::Kind::Sine; break;
      case InnerKind::Mixed:
        term.kind = rng.coin() ? GamTerm::Kind::Product : GamTerm::Kind::Sine;
        break;
    }
    term.features = part;
    term.coeffs.resize(static_cast<Eigen::Index>(part.size()));
    for (Eigen::Index k = 0; k < term.coeffs.size(); ++k) {
      double a = rng.uniform(0.5, 1.5);
      term.coeffs[k] = rng.coin() ? a : -a;
    }
    gam.terms.push_back(std::move(term));
  }

  gam.columns.resize(static_cast<std::size_t>(d));
  for (auto& col : gam.columns) {
    if (dist == FeatureDist::Normal) {
      col.kind = FeatureDist::Normal;
      col.mu = rng.uniform(0.0, 3.0);
      col.sigma = rng.uniform(0.5, 1.5);
    } else {
      col.kind = FeatureDist::Uniform;
      col.mu = 0.0;
      col.sigma = 0.0;
    }
  }
  return gam;
}

Dataset sample_dataset(const GroundTruthGAM& gam, int n, std::uint64_t seed) {
  if (n < 2) throw ParseError("synth: dataset needs n >= 2");
  Rng rng(stream_seed(seed, Stream::Dataset));
  Dataset data;
  data.rows.resize(n, gam.d);
  data.columns.reserve(static_cast<std::size_t>(gam.d));
  for (int j = 0; j < gam.d; ++j) {
    data.columns.push_back("x" + std::to_string(j));
    const ColumnDist& col = gam.columns[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i)
      data.rows(i, j) = col.kind == FeatureDist::Normal ? rng.normal(col.mu, col.sigma)
                                                        : rng.uniform(0.0, 3.0);
  }
  return data;
}

std::vector<double> ground_truth_importance(const GroundTruthGAM& gam, const Eigen::VectorXd& x) {
  if (x.size() != gam.d) throw ParseError("synth: point dimension mismatch");
  std::vector<double> importance;
  importance.reserve(gam.terms.size());
  for (const auto& term : gam.terms) {
    if (term.kind != GamTerm::Kind::Product)
      throw ParseError("synth: importance oracle undefined for this kind");
    double v = 1.0;
    for (std::size_t k = 0; k < term.features.size(); ++k)
      v *= term.coeffs[static_cast<Eigen::Index>(k)] * x[term.features[k]];
    importance.push_back(v);
  }
  return importance;
}

std::vector<double> ground_truth_feature_importance(const GroundTruthGAM& gam,
                                                    const Eigen::VectorXd& x) {
  std::vector<double> part_importance = ground_truth_importance(gam, x);
  std::vector<double> per_feature(static_cast<std::size_t>(gam.d), 0.0);
  for (std::size_t p = 0; p < gam.terms.size(); ++p)
    for (int j : gam.terms[p].features) per_feature[static_cast<std::size_t>(j)] = part_importance[p];
  return per_feature;
}

}  // namespace ishap
