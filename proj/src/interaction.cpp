#include "ishap/interaction.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <utility>

#include "ishap/errors.hpp"
#include "ishap/parallel.hpp"

namespace ishap {

BucketStats bucket_pair(const MaskSample& sample, int i, int j) {
  const std::int64_t n = sample.masks.rows();
  std::array<std::vector<double>, 4> buckets;
  for (auto& b : buckets) b.reserve(static_cast<std::size_t>(n) / 4 + 1);
  for (std::int64_t r = 0; r < n; ++r) {
    bool mi = sample.masks(r, i) != 0;
    bool mj = sample.masks(r, j) != 0;
    std::size_t slot = mi ? (mj ? 0 : 1) : (mj ? 2 : 3);
    buckets[slot].push_back(sample.outputs[r]);
  }
  BucketStats stats;
  stats.joint = summarize(buckets[0]);
  stats.only_i = summarize(buckets[1]);
  stats.only_j = summarize(buckets[2]);
  stats.neither = summarize(buckets[3]);
  return stats;
}

double contrast_test(const BucketStats& stats) {
  const std::array<GroupStats, 4> groups = {stats.only_i, stats.only_j, stats.joint,
                                            stats.neither};
  const std::array<double, 4> coefs = {1.0, 1.0, -1.0, -1.0};
  return welch_contrast_p(groups, coefs);
}

std::size_t InteractionGraph::pair_index(int d, int i, int j) {
  // Upper triangle flattened row by row.
  return static_cast<std::size_t>(i) * d - static_cast<std::size_t>(i) * (i + 1) / 2 +
         static_cast<std::size_t>(j - i - 1);
}

double InteractionGraph::p_value(int i, int j) const {
  if (i == j) throw ParseError("graph: p_value needs two distinct features");
  if (i > j) std::swap(i, j);
  return p_values[pair_index(d, i, j)];
}

bool InteractionGraph::has_edge(int i, int j) const { return p_value(i, j) < alpha; }

std::vector<std::pair<int, int>> InteractionGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (has_edge(i, j)) out.emplace_back(i, j);
  return out;
}

std::size_t InteractionGraph::edge_count() const { return edges().size(); }

InteractionGraph InteractionGraph::complete(int d, double alpha) {
  InteractionGraph g;
  g.d = d;
  g.alpha = alpha;
  g.p_values.assign(static_cast<std::size_t>(d) * (d - 1) / 2, 0.0);
  return g;
}

InteractionGraph graph_from_sample(const MaskSample& sample, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ParseError("graph: alpha must be in (0, 1)");
  InteractionGraph g;
  g.d = static_cast<int>(sample.masks.cols());
  g.alpha = alpha;
  g.p_values.assign(static_cast<std::size_t>(g.d) * (g.d - 1) / 2, 1.0);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(g.p_values.size());
  for (int i = 0; i < g.d; ++i)
    for (int j = i + 1; j < g.d; ++j) pairs.emplace_back(i, j);
  parallel_for(static_cast<std::int64_t>(pairs.size()), [&](std::int64_t k) {
    auto [i, j] = pairs[static_cast<std::size_t>(k)];
    g.p_values[InteractionGraph::pair_index(g.d, i, j)] = contrast_test(bucket_pair(sample, i, j));
  });
  return g;
}

InteractionGraph build_interaction_graph(const Eigen::VectorXd& x, const CenteredModel& model,
                                         const Dataset& background, std::int64_t n_s,
                                         double alpha, std::uint64_t seed) {
  MaskSample sample = draw_mask_sample(x, model, background, n_s, seed);
  return graph_from_sample(sample, alpha);
}

std::vector<std::vector<int>> connected_components(const InteractionGraph& graph) {
  std::vector<int> parent(static_cast<std::size_t>(graph.d));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };
  for (auto [i, j] : graph.edges()) {
    int a = find(i);
    int b = find(j);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<std::vector<int>> components;
  std::vector<int> slot(static_cast<std::size_t>(graph.d), -1);
  for (int v = 0; v < graph.d; ++v) {
    int root = find(v);
    if (slot[static_cast<std::size_t>(root)] < 0) {
      slot[static_cast<std::size_t>(root)] = static_cast<int>(components.size());
      components.emplace_back();
    }
    components[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(v);
  }
  return components;  // roots are minima, visited ascending: sorted as required
}

std::string to_dot(const InteractionGraph& graph, const Eigen::VectorXd& x) {
  if (x.size() != graph.d) throw ParseError("to_dot: point dimension mismatch");
  std::ostringstream out;
  char buf[64];
  out << "graph ishap {\n";
  for (int i = 0; i < graph.d; ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g", x[i]);
    out << "  " << i << " [label=\"f" << i << ":" << buf << "\"];\n";
  }
  for (auto [i, j] : graph.edges()) {
    std::snprintf(buf, sizeof(buf), "%.6g", graph.p_value(i, j));
    out << "  " << i << " -- " << j << " [label=\"p=" << buf << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ishap
