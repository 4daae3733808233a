#include "ishap/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ishap/errors.hpp"
#include "ishap/parallel.hpp"

namespace ishap {

int Partition::width() const {
  int w = 0;
  for (const auto& part : parts) w += static_cast<int>(part.size());
  return w;
}

Partition make_partition(std::vector<std::vector<int>> parts, int d) {
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  int covered = 0;
  for (auto& part : parts) {
    if (part.empty()) throw ParseError("partition: empty part");
    std::sort(part.begin(), part.end());
    for (int v : part) {
      if (v < 0 || v >= d) throw ParseError("partition: index " + std::to_string(v) + " out of range");
      if (seen[static_cast<std::size_t>(v)]) throw ParseError("partition: index " + std::to_string(v) + " repeated");
      seen[static_cast<std::size_t>(v)] = 1;
      ++covered;
    }
  }
  if (covered != d) throw ParseError("partition: parts cover " + std::to_string(covered) +
                                     " of " + std::to_string(d) + " features");
  std::sort(parts.begin(), parts.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  Partition p;
  p.parts = std::move(parts);
  return p;
}

Partition singleton_partition(int d) {
  Partition p;
  p.parts.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) p.parts.push_back({i});
  return p;
}

bool partition_less(const Partition& a, const Partition& b) { return a.parts < b.parts; }

double regularization(const Partition& p, const ObjectiveConfig& cfg) {
  double total = 0.0;
  for (const auto& part : p.parts) {
    double k = static_cast<double>(part.size());
    total += cfg.regularizer == Regularizer::Pairwise ? k * (k - 1.0) / 2.0 : k;
  }
  return total;
}

double score_partition(const Partition& p, const ValueCache& cache, double prediction,
                       const ObjectiveConfig& cfg) {
  double sum = 0.0;
  for (const auto& part : p.parts) {
    auto est = cache.lookup(part);
    if (!est) {
      std::ostringstream msg;
      msg << "score_partition: no cached value for part {";
      for (std::size_t k = 0; k < part.size(); ++k) msg << (k ? "," : "") << part[k];
      msg << "}";
      throw std::out_of_range(msg.str());
    }
    sum += est->mean;
  }
  double err = prediction - sum;
  return err * err + cfg.lambda * regularization(p, cfg);
}

namespace {

std::vector<int> component_ids(const InteractionGraph& graph,
                               const std::vector<std::vector<int>>& components) {
  std::vector<int> id(static_cast<std::size_t>(graph.d), -1);
  for (std::size_t c = 0; c < components.size(); ++c)
    for (int v : components[c]) id[static_cast<std::size_t>(v)] = static_cast<int>(c);
  return id;
}

}  // namespace

bool is_valid(const Partition& p, const InteractionGraph& graph) {
  auto components = connected_components(graph);
  auto id = component_ids(graph, components);
  for (const auto& part : p.parts)
    for (std::size_t k = 1; k < part.size(); ++k)
      if (id[static_cast<std::size_t>(part[k])] != id[static_cast<std::size_t>(part[0])])
        return false;
  return true;
}

namespace {

// Set partitions of each component enumerated by restricted growth (vertex k
// joins an existing block of its component or opens a new one), composed
// across components by recursion. Blocks stay internally sorted because
// vertices arrive in ascending order.
struct ValidPartitionWalk {
  const std::vector<std::vector<int>>& components;
  const std::function<void(const Partition&)>& visit;
  std::vector<std::vector<int>> blocks;
  int d = 0;

  void component(std::size_t c) {
    if (c == components.size()) {
      emit();
      return;
    }
    place(c, 0, blocks.size());
  }

  void place(std::size_t c, std::size_t k, std::size_t base) {
    const auto& verts = components[c];
    if (k == verts.size()) {
      component(c + 1);
      return;
    }
    int v = verts[k];
    for (std::size_t b = base; b < blocks.size(); ++b) {
      blocks[b].push_back(v);
      place(c, k + 1, base);
      blocks[b].pop_back();
    }
    blocks.emplace_back(1, v);
    place(c, k + 1, base);
    blocks.pop_back();
  }

  void emit() {
    Partition p;
    p.parts = blocks;
    std::sort(p.parts.begin(), p.parts.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    visit(p);
  }
};

void check_guard(const std::vector<std::vector<int>>& components, int guard) {
  for (const auto& comp : components) {
    if (static_cast<int>(comp.size()) > guard) {
      std::ostringstream msg;
      msg << "component too large for exact mode: {";
      for (std::size_t k = 0; k < comp.size(); ++k) msg << (k ? "," : "") << comp[k];
      msg << "} has " << comp.size() << " nodes, guard is " << guard;
      throw GuardError(msg.str());
    }
  }
}

}  // namespace

void enumerate_valid_partitions(const InteractionGraph& graph,
                                const std::function<void(const Partition&)>& visit,
                                int component_guard) {
  auto components = connected_components(graph);
  check_guard(components, component_guard);
  ValidPartitionWalk walk{components, visit, {}, graph.d};
  walk.component(0);
}

Partition find_partition_exact(const InteractionGraph& graph, CachedValues& values,
                               double prediction, const ObjectiveConfig& cfg,
                               int component_guard, std::int64_t* candidates_seen) {
  auto components = connected_components(graph);
  check_guard(components, component_guard);

  // Every part of every valid partition is a nonempty subset of one
  // component; estimate them all up front (parallel, order-free).
  std::vector<std::vector<int>> subsets;
  for (const auto& comp : components) {
    const std::size_t c = comp.size();
    for (std::uint32_t mask = 1; mask < (1u << c); ++mask) {
      std::vector<int> set;
      for (std::size_t k = 0; k < c; ++k)
        if (mask & (1u << k)) set.push_back(comp[k]);
      subsets.push_back(std::move(set));
    }
  }
  prefetch(values, subsets);

  Partition best;
  double best_score = std::numeric_limits<double>::infinity();
  double best_reg = std::numeric_limits<double>::infinity();
  std::int64_t seen = 0;
  enumerate_valid_partitions(
      graph,
      [&](const Partition& p) {
        ++seen;
        double s = score_partition(p, values.cache(), prediction, cfg);
        double r = regularization(p, cfg);
        bool better = s < best_score || (s == best_score && r < best_reg) ||
                      (s == best_score && r == best_reg && partition_less(p, best));
        if (better) {
          best = p;
          best_score = s;
          best_reg = r;
        }
      },
      component_guard);
  if (candidates_seen) *candidates_seen = seen;
  return best;
}

Partition find_partition_greedy(const InteractionGraph& graph, CachedValues& values,
                                double prediction, const ObjectiveConfig& cfg,
                                MergeRule merge_rule, std::int64_t* candidates_seen) {
  const int d = graph.d;
  auto components = connected_components(graph);
  auto comp_id = component_ids(graph, components);

  Partition cur = singleton_partition(d);
  {
    std::vector<std::vector<int>> singles = cur.parts;
    prefetch(values, singles);
  }
  std::int64_t seen = 0;

  auto parts_linked = [&](const std::vector<int>& a, const std::vector<int>& b) {
    if (merge_rule == MergeRule::Path)
      return comp_id[static_cast<std::size_t>(a.front())] ==
             comp_id[static_cast<std::size_t>(b.front())];
    for (int i : a)
      for (int j : b)
        if (graph.has_edge(i, j)) return true;
    return false;
  };

  while (cur.parts.size() > 1) {
    const std::size_t m = cur.parts.size();
    double sum_v = 0.0;
    for (const auto& part : cur.parts) sum_v += values.at(part).mean;
    double cur_reg = regularization(cur, cfg);
    double cur_err = prediction - sum_v;
    double cur_score = cur_err * cur_err + cfg.lambda * cur_reg;

    struct Candidate {
      std::size_t a, b;
      std::vector<int> merged;
    };
    std::vector<Candidate> eligible;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        if (!parts_linked(cur.parts[a], cur.parts[b])) continue;
        std::vector<int> merged;
        merged.reserve(cur.parts[a].size() + cur.parts[b].size());
        std::merge(cur.parts[a].begin(), cur.parts[a].end(), cur.parts[b].begin(),
                   cur.parts[b].end(), std::back_inserter(merged));
        eligible.push_back({a, b, std::move(merged)});
      }
    }
    if (eligible.empty()) break;

    {
      std::vector<std::vector<int>> merged_sets;
      merged_sets.reserve(eligible.size());
      for (const auto& c : eligible) merged_sets.push_back(c.merged);
      prefetch(values, merged_sets);
    }

    auto part_reg = [&](const std::vector<int>& part) {
      double k = static_cast<double>(part.size());
      return cfg.regularizer == Regularizer::Pairwise ? k * (k - 1.0) / 2.0 : k;
    };

    // Candidates scanned in canonical pair order; the first strict best wins.
    std::size_t best_idx = eligible.size();
    double best_score = cur_score;
    for (std::size_t c = 0; c < eligible.size(); ++c) {
      const auto& cand = eligible[c];
      double cand_sum = sum_v - values.at(cur.parts[cand.a]).mean -
                        values.at(cur.parts[cand.b]).mean + values.at(cand.merged).mean;
      double cand_reg = cur_reg - part_reg(cur.parts[cand.a]) - part_reg(cur.parts[cand.b]) +
                        part_reg(cand.merged);
      double err = prediction - cand_sum;
      double s = err * err + cfg.lambda * cand_reg;
      if (s < best_score) {
        best_score = s;
        best_idx = c;
      }
    }
    seen += static_cast<std::int64_t>(eligible.size());
    if (best_idx == eligible.size()) break;

    std::vector<std::vector<int>> next;
    next.reserve(m - 1);
    for (std::size_t p = 0; p < m; ++p)
      if (p != eligible[best_idx].a && p != eligible[best_idx].b) next.push_back(cur.parts[p]);
    next.push_back(eligible[best_idx].merged);
    cur = make_partition(std::move(next), d);
  }
  if (candidates_seen) *candidates_seen = seen;
  return cur;
}

}  // namespace ishap
