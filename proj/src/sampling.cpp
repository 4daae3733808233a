#include "ishap/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "ishap/errors.hpp"
#include "ishap/parallel.hpp"
#include "ishap/rng.hpp"

namespace ishap {

double ValueEstimate::se() const {
  if (n <= 0) return 0.0;
  return std::sqrt(variance / static_cast<double>(n));
}

namespace {

std::vector<int> canonical_coalition(std::span<const int> coalition, int d) {
  std::vector<int> s(coalition.begin(), coalition.end());
  std::sort(s.begin(), s.end());
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] < 0 || s[k] >= d)
      throw ParseError("coalition: feature " + std::to_string(s[k]) + " out of range");
    if (k > 0 && s[k] == s[k - 1])
      throw ParseError("coalition: duplicate feature " + std::to_string(s[k]));
  }
  return s;
}

ValueEstimate summarize_outputs(const Eigen::VectorXd& out) {
  ValueEstimate e;
  e.n = out.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) sum += out[i];
  e.mean = sum / static_cast<double>(out.size());
  if (e.n >= 2) {
    double ss = 0.0;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      double dlt = out[i] - e.mean;
      ss += dlt * dlt;
    }
    e.variance = ss / static_cast<double>(e.n - 1);
  }
  return e;
}

}  // namespace

Eigen::VectorXd compose(const Eigen::VectorXd& x, const Eigen::VectorXd& background_row,
                        std::span<const int> coalition) {
  Eigen::VectorXd point = background_row;
  for (int j : coalition) point[j] = x[j];
  return point;
}

ValueEstimate estimate_value(std::span<const int> coalition, const Eigen::VectorXd& x,
                             const CenteredModel& model, const Dataset& background,
                             std::int64_t n_draws, std::uint64_t seed) {
  const int d = model.dim();
  if (x.size() != d) throw ParseError("estimate_value: point dimension mismatch");
  if (background.d() != d) throw ParseError("estimate_value: background dimension mismatch");
  if (background.n() < 1) throw ParseError("estimate_value: background is empty");
  if (n_draws < 1) throw ParseError("estimate_value: n_draws must be >= 1");
  std::vector<int> s = canonical_coalition(coalition, d);

  if (static_cast<int>(s.size()) == d) {
    ValueEstimate e;
    e.mean = model.evaluate_one(x);
    e.variance = 0.0;
    e.n = 1;
    return e;
  }

  Rng rng(stream_seed(seed, Stream::Value, s));
  Eigen::MatrixXd points(n_draws, d);
  for (std::int64_t i = 0; i < n_draws; ++i)
    points.row(i) = background.rows.row(rng.index(background.n()));
  for (int j : s) points.col(j).setConstant(x[j]);

  return summarize_outputs(model.evaluate(points));
}

MaskSample draw_mask_sample(const Eigen::VectorXd& x, const CenteredModel& model,
                            const Dataset& background, std::int64_t n_s, std::uint64_t seed) {
  const int d = model.dim();
  if (x.size() != d) throw ParseError("draw_mask_sample: point dimension mismatch");
  if (background.d() != d) throw ParseError("draw_mask_sample: background dimension mismatch");
  if (background.n() < 1) throw ParseError("draw_mask_sample: background is empty");
  if (n_s < 8) throw ParseError("draw_mask_sample: n_s must be >= 8 to populate the test buckets");

  Rng rng(stream_seed(seed, Stream::MaskSample));
  MaskSample sample;
  sample.masks.resize(n_s, d);
  sample.perturbed_points.resize(n_s, d);
  // Per row: one background index, then d mask coins. The order is part of
  // the reproducibility contract.
  for (std::int64_t i = 0; i < n_s; ++i) {
    int row = rng.index(background.n());
    for (int j = 0; j < d; ++j) {
      bool keep = rng.coin();
      sample.masks(i, j) = keep ? 1 : 0;
      sample.perturbed_points(i, j) = keep ? x[j] : background.rows(row, j);
    }
  }
  sample.outputs = model.evaluate(sample.perturbed_points);
  return sample;
}

std::optional<ValueEstimate> ValueCache::lookup(const std::vector<int>& coalition) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(coalition);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ValueEstimate ValueCache::insert(const std::vector<int>& coalition, const ValueEstimate& estimate) {
  std::unique_lock lock(mutex_);
  auto [it, fresh] = entries_.emplace(coalition, estimate);
  if (fresh) ++misses_;
  return it->second;
}

std::int64_t ValueCache::misses() const {
  std::shared_lock lock(mutex_);
  return misses_;
}

std::size_t ValueCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

ValueEstimate CachedValues::at(std::span<const int> coalition) {
  std::vector<int> key(coalition.begin(), coalition.end());
  std::sort(key.begin(), key.end());
  if (auto hit = cache_.lookup(key)) return *hit;
  ValueEstimate fresh = fn_(key);
  return cache_.insert(key, fresh);
}

SetValueFn monte_carlo_value_fn(const CenteredModel& model, const Dataset& background,
                                const Eigen::VectorXd& x, std::int64_t n_draws,
                                std::uint64_t seed) {
  return [model, background, x, n_draws, seed](std::span<const int> coalition) {
    return estimate_value(coalition, x, model, background, n_draws, seed);
  };
}

void prefetch(CachedValues& values, const std::vector<std::vector<int>>& coalitions) {
  parallel_for(static_cast<std::int64_t>(coalitions.size()), [&](std::int64_t i) {
    values.at(coalitions[static_cast<std::size_t>(i)]);
  });
}

}  // namespace ishap
