#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ishap/interaction.hpp"
#include "ishap/sampling.hpp"

namespace ishap {

// Disjoint nonempty feature sets covering [0, d). Canonical form: each part
// sorted ascending, parts ordered by smallest element.
struct Partition {
  std::vector<std::vector<int>> parts;

  bool operator==(const Partition&) const = default;
  int width() const;  // number of features covered
};

// Sorts into canonical form and validates disjointness/coverage against d.
Partition make_partition(std::vector<std::vector<int>> parts, int d);
Partition singleton_partition(int d);
bool partition_less(const Partition& a, const Partition& b);  // canonical-lex order

enum class Regularizer { Pairwise, Cardinality };

struct ObjectiveConfig {
  double lambda = 5e-3;
  Regularizer regularizer = Regularizer::Pairwise;
};

// Pairwise: number of within-part pairs, sum |S|(|S|-1)/2. Cardinality:
// sum |S| (constant d; kept for the ablation objective variant).
double regularization(const Partition& p, const ObjectiveConfig& cfg);

// (prediction - sum of part values)^2 + lambda * regularization.
// prediction is the centered f(x). Every part must already be cached.
double score_partition(const Partition& p, const ValueCache& cache, double prediction,
                       const ObjectiveConfig& cfg);

// True iff every part lies inside one connected component (path semantics:
// members must be mutually reachable, not directly adjacent).
bool is_valid(const Partition& p, const InteractionGraph& graph);

inline constexpr int kDefaultComponentGuard = 16;

// Streams every valid partition exactly once, in deterministic order:
// per-component set partitions (restricted growth recursion) composed across
// components, each emitted in canonical form. Throws GuardError when a
// component exceeds the guard.
void enumerate_valid_partitions(const InteractionGraph& graph,
                                const std::function<void(const Partition&)>& visit,
                                int component_guard = kDefaultComponentGuard);

// Exact optimizer: argmin of score over all valid partitions. Ties broken by
// lower regularization, then canonical-lex order, so the result is unique.
Partition find_partition_exact(const InteractionGraph& graph, CachedValues& values,
                               double prediction, const ObjectiveConfig& cfg,
                               int component_guard = kDefaultComponentGuard,
                               std::int64_t* candidates_seen = nullptr);

enum class MergeRule { Edge, Path };

// Agglomerative search: from singletons, repeatedly apply the eligible pair
// merge with the best strict score improvement (first in canonical order on
// ties); stops when no merge improves.
Partition find_partition_greedy(const InteractionGraph& graph, CachedValues& values,
                                double prediction, const ObjectiveConfig& cfg,
                                MergeRule merge_rule = MergeRule::Edge,
                                std::int64_t* candidates_seen = nullptr);

}  // namespace ishap
