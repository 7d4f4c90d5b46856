#include "gpb/graph/graph.hpp"

#include <algorithm>
#include <string>

#include "gpb/error.hpp"

namespace gpb::graph {

void Graph::validate(std::size_t num_classes) const {
  if (features.rows() != adj.n())
    throw StructuralError("feature rows (" + std::to_string(features.rows()) +
                          ") differ from adjacency size (" + std::to_string(adj.n()) + ")");
  if (!features.all_finite()) throw StructuralError("non-finite node feature");
  if (!node_labels.empty() && node_labels.size() != num_nodes())
    throw StructuralError("node label count differs from node count");
  for (int y : node_labels)
    if (y != kUnlabeled && (y < 0 || static_cast<std::size_t>(y) >= num_classes))
      throw LabelRangeError("node label " + std::to_string(y) + " outside [0, " +
                            std::to_string(num_classes) + ")");
  if (graph_label && (*graph_label < 0 || static_cast<std::size_t>(*graph_label) >= num_classes))
    throw LabelRangeError("graph label " + std::to_string(*graph_label) + " outside [0, " +
                          std::to_string(num_classes) + ")");
}

void Dataset::validate() const {
  if (graphs.empty()) throw StructuralError("dataset '" + name + "' has no graphs");
  if (num_classes < 1) throw StructuralError("dataset '" + name + "' has no classes");
  const std::size_t d = graphs.front().feature_dim();
  for (const auto& g : graphs) {
    if (g.feature_dim() != d) throw StructuralError("feature dimension differs across graphs");
    g.validate(num_classes);
  }
  if (level == TaskLevel::node) {
    if (graphs.size() != 1) throw StructuralError("node-level dataset must hold exactly one graph");
    if (graphs.front().node_labels.empty())
      throw StructuralError("node-level dataset without node labels");
  } else {
    for (const auto& g : graphs)
      if (!g.graph_label) throw StructuralError("graph-level dataset with an unlabeled graph");
  }
}

std::string to_string(TaskLevel level) { return level == TaskLevel::node ? "node" : "graph"; }

TaskLevel parse_level(const std::string& s) {
  if (s == "node") return TaskLevel::node;
  if (s == "graph") return TaskLevel::graph;
  throw InvalidArgument("task level must be \"node\" or \"graph\", got \"" + s + "\"");
}

Matrix degree_one_hot(const SparseAdj& adj, std::size_t cap) {
  Matrix x(adj.n(), cap + 1);
  for (std::size_t u = 0; u < adj.n(); ++u) x(u, std::min(adj.degree(u), cap)) = 1.0;
  return x;
}

Union disjoint_union(const std::vector<const Graph*>& graphs) {
  if (graphs.empty()) throw InvalidArgument("disjoint_union of no graphs");
  const std::size_t d = graphs.front()->feature_dim();
  Union u;
  u.offsets.push_back(0);
  std::size_t total = 0;
  bool directed = false;
  for (const Graph* g : graphs) {
    if (g->feature_dim() != d) throw DimensionError("disjoint_union: feature dims differ");
    total += g->num_nodes();
    u.offsets.push_back(total);
    directed = directed || g->directed;
  }
  Matrix x(total, d);
  std::vector<ad::SparseEntry> entries;
  std::vector<int> labels;
  bool any_labels = false;
  for (const Graph* g : graphs) any_labels = any_labels || !g->node_labels.empty();
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& g = *graphs[k];
    const std::size_t off = u.offsets[k];
    std::copy(g.features.values().begin(), g.features.values().end(), x.data() + off * d);
    for (const auto& e : g.adj.entries()) entries.push_back({e.row + off, e.col + off, e.weight});
    if (any_labels) {
      if (g.node_labels.empty())
        labels.insert(labels.end(), g.num_nodes(), kUnlabeled);
      else
        labels.insert(labels.end(), g.node_labels.begin(), g.node_labels.end());
    }
  }
  u.graph.features = std::move(x);
  u.graph.adj = SparseAdj::from_entries(total, std::move(entries), !directed);
  u.graph.node_labels = std::move(labels);
  u.graph.directed = directed;
  return u;
}

}  // namespace gpb::graph
