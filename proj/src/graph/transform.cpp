#include "gpb/graph/transform.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "gpb/error.hpp"
#include "gpb/random.hpp"

namespace gpb::graph {

Graph restrict_to(const Graph& g, std::span<const std::size_t> keep) {
  const std::size_t n = g.num_nodes(), d = g.feature_dim();
  std::vector<std::size_t> new_id(n, n);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= n) throw StructuralError("restrict_to: node out of range");
    new_id[keep[i]] = i;
  }
  Graph out;
  out.directed = g.directed;
  out.graph_label = g.graph_label;
  out.features = Matrix(keep.size(), d);
  for (std::size_t i = 0; i < keep.size(); ++i)
    std::copy(g.features.row(keep[i]).begin(), g.features.row(keep[i]).end(),
              out.features.row(i).begin());
  if (!g.node_labels.empty()) {
    out.node_labels.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) out.node_labels[i] = g.node_labels[keep[i]];
  }
  std::vector<ad::SparseEntry> entries;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t u = keep[i];
    auto nb = g.adj.neighbors(u);
    auto w = g.adj.weights().subspan(g.adj.row_ptr()[u], nb.size());
    for (std::size_t e = 0; e < nb.size(); ++e)
      if (new_id[nb[e]] != n) entries.push_back({i, new_id[nb[e]], w[e]});
  }
  out.adj = SparseAdj::from_entries(keep.size(), std::move(entries), g.adj.undirected());
  return out;
}

Graph induce_subgraph(const Graph& g, std::size_t center, std::size_t hops) {
  const std::size_t n = g.num_nodes();
  if (center >= n)
    throw StructuralError("induce_subgraph: center " + std::to_string(center) + " of " +
                          std::to_string(n) + " nodes");
  if (hops < 1) throw InvalidArgument("induce_subgraph: hops must be >= 1");
  std::vector<std::size_t> dist(n, n);
  std::deque<std::size_t> frontier{center};
  dist[center] = 0;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    if (dist[u] == hops) continue;
    for (std::size_t v : g.adj.neighbors(u))
      if (dist[v] == n) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
  }
  std::vector<std::size_t> keep;
  for (std::size_t u = 0; u < n; ++u)
    if (dist[u] != n) keep.push_back(u);
  Graph out = restrict_to(g, keep);
  out.center = static_cast<std::size_t>(std::lower_bound(keep.begin(), keep.end(), center) -
                                        keep.begin());
  if (!g.node_labels.empty() && g.node_labels[center] != kUnlabeled)
    out.graph_label = g.node_labels[center];
  else
    out.graph_label.reset();
  return out;
}

std::string to_string(ManipulationKind k) {
  switch (k) {
    case ManipulationKind::drop_nodes: return "drop_nodes";
    case ManipulationKind::drop_edges: return "drop_edges";
    case ManipulationKind::mask_features: return "mask_features";
  }
  return "?";
}

ManipulationKind parse_manipulation(const std::string& s) {
  if (s == "drop_nodes") return ManipulationKind::drop_nodes;
  if (s == "drop_edges") return ManipulationKind::drop_edges;
  if (s == "mask_features") return ManipulationKind::mask_features;
  throw InvalidArgument("unknown manipulation '" + s + "'");
}

namespace {
std::size_t ceil_count(double fraction, std::size_t total) {
  // Guard against 0.5·10 landing a hair above 5.
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
}
}  // namespace

Graph apply_manipulation(const Graph& g, const Manipulation& m) {
  if (!(m.fraction >= 0.0 && m.fraction < 1.0))
    throw InvalidArgument("manipulation fraction must lie in [0, 1)");
  Rng rng(m.seed);
  const std::size_t n = g.num_nodes();
  switch (m.kind) {
    case ManipulationKind::drop_nodes: {
      const std::size_t drop = ceil_count(m.fraction, n);
      if (drop >= n) throw InvalidArgument("drop_nodes would remove every node");
      auto order = permutation(n, rng);
      std::vector<std::size_t> keep(order.begin() + static_cast<std::ptrdiff_t>(drop), order.end());
      std::sort(keep.begin(), keep.end());
      return restrict_to(g, keep);
    }
    case ManipulationKind::drop_edges: {
      auto edges = g.adj.edge_list();
      const std::size_t drop = ceil_count(m.fraction, edges.size());
      shuffle(edges, rng);
      edges.erase(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(drop));
      Graph out = g;
      out.adj = SparseAdj::from_edges(n, edges, g.adj.undirected());
      return out;
    }
    case ManipulationKind::mask_features: {
      const std::size_t masked = ceil_count(m.fraction, n);
      auto order = permutation(n, rng);
      Graph out = g;
      for (std::size_t i = 0; i < masked; ++i)
        for (double& v : out.features.row(order[i])) v = 0.0;
      return out;
    }
  }
  return g;
}

std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm) {
  const std::size_t n = perm.size();
  std::vector<std::size_t> inv(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (perm[i] >= n || inv[perm[i]] != n) throw InvalidArgument("not a permutation");
    inv[perm[i]] = i;
  }
  return inv;
}

Graph permute_nodes(const Graph& g, std::span<const std::size_t> perm) {
  const std::size_t n = g.num_nodes();
  if (perm.size() != n) throw InvalidArgument("permutation length differs from node count");
  invert_permutation(perm);  // bijection check
  Graph out = g;
  for (std::size_t i = 0; i < n; ++i)
    std::copy(g.features.row(i).begin(), g.features.row(i).end(),
              out.features.row(perm[i]).begin());
  if (!g.node_labels.empty())
    for (std::size_t i = 0; i < n; ++i) out.node_labels[perm[i]] = g.node_labels[i];
  std::vector<ad::SparseEntry> entries;
  for (const auto& e : g.adj.entries()) entries.push_back({perm[e.row], perm[e.col], e.weight});
  out.adj = SparseAdj::from_entries(n, std::move(entries), g.adj.undirected());
  if (g.center) out.center = perm[*g.center];
  return out;
}

}  // namespace gpb::graph
