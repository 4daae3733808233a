#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "ishap/model.hpp"

namespace ishap {

// Monte-Carlo estimate of one coalition's value: sample mean, unbiased sample
// variance of the draws, and the draw count.
struct ValueEstimate {
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t n = 0;

  double se() const;  // sqrt(variance / n)
};

// x with the features outside `coalition` replaced by the background row.
Eigen::VectorXd compose(const Eigen::VectorXd& x, const Eigen::VectorXd& background_row,
                        std::span<const int> coalition);

// v(S) = E_b[f_c(compose(x, b, S))] estimated over n_draws background rows
// drawn uniformly with replacement. Draws come from a stream derived from
// (seed, set), so the same (S, seed) reproduces exactly no matter when or on
// which thread it runs, and different sets use independent streams. The full
// coalition short-circuits: composition ignores the background entirely, so
// the estimate is f_c(x) with zero variance from a single evaluation.
ValueEstimate estimate_value(std::span<const int> coalition, const Eigen::VectorXd& x,
                             const CenteredModel& model, const Dataset& background,
                             std::int64_t n_draws, std::uint64_t seed);

// Shared perturbation sample for the interaction test: Bernoulli(1/2) masks
// (1 keeps x_j, 0 takes the background row's value), the composed points, and
// the centered model outputs, all row-aligned.
struct MaskSample {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> masks;  // n_s x d
  Eigen::MatrixXd perturbed_points;                                   // n_s x d
  Eigen::VectorXd outputs;                                            // n_s
};

MaskSample draw_mask_sample(const Eigen::VectorXd& x, const CenteredModel& model,
                            const Dataset& background, std::int64_t n_s, std::uint64_t seed);

// Estimate store keyed by canonical (sorted) coalition. Thread-safe; a set is
// counted against misses() at most once.
class ValueCache {
 public:
  std::optional<ValueEstimate> lookup(const std::vector<int>& coalition) const;
  // Keeps the first estimate for a key; returns the stored one.
  ValueEstimate insert(const std::vector<int>& coalition, const ValueEstimate& estimate);
  std::int64_t misses() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::vector<int>, ValueEstimate> entries_;
  std::int64_t misses_ = 0;
};

using SetValueFn = std::function<ValueEstimate(std::span<const int>)>;

// Memoized view over a set-value function: each distinct coalition is
// computed once per instance, concurrent callers included.
class CachedValues {
 public:
  explicit CachedValues(SetValueFn fn) : fn_(std::move(fn)) {}

  ValueEstimate at(std::span<const int> coalition);
  const ValueCache& cache() const { return cache_; }

 private:
  SetValueFn fn_;
  ValueCache cache_;
};

// The production value function: estimate_value bound to one query.
// Captures model and background by value so the closure stands alone.
SetValueFn monte_carlo_value_fn(const CenteredModel& model, const Dataset& background,
                                const Eigen::VectorXd& x, std::int64_t n_draws,
                                std::uint64_t seed);

// Fills the cache for all listed coalitions, possibly in parallel. Results
// are independent of scheduling because every estimate is order-free.
void prefetch(CachedValues& values, const std::vector<std::vector<int>>& coalitions);

}  // namespace ishap
