#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gpb/ad/matrix.hpp"
#include "gpb/ad/sparse.hpp"

namespace gpb::graph {

using ad::Matrix;
using ad::SparseAdj;

inline constexpr int kUnlabeled = -1;

// One graph: features X (N×d), adjacency A, optional labels. Undirected graphs
// store both edge directions. Self-loops are left to the backbone.
struct Graph {
  Matrix features;
  SparseAdj adj;
  std::vector<int> node_labels;  // empty, or N entries (kUnlabeled allowed)
  std::optional<int> graph_label;
  bool directed = false;
  std::optional<std::size_t> center;  // set by induce_subgraph

  std::size_t num_nodes() const { return features.rows(); }
  std::size_t feature_dim() const { return features.cols(); }
  // Undirected graphs count each {u, v} once.
  std::size_t num_edges() const { return adj.edge_list().size(); }

  // Throws StructuralError / LabelRangeError when invariants break.
  void validate(std::size_t num_classes) const;

  friend bool operator==(const Graph&, const Graph&) = default;
};

enum class TaskLevel { node, graph };

struct Dataset {
  std::string name;
  TaskLevel level = TaskLevel::node;
  std::size_t num_classes = 0;
  std::vector<Graph> graphs;

  std::size_t feature_dim() const { return graphs.empty() ? 0 : graphs.front().feature_dim(); }
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

std::string to_string(TaskLevel level);
TaskLevel parse_level(const std::string& s);

// One-hot degree encoding with the last bucket collecting degrees >= cap.
// Used for featureless graphs.
Matrix degree_one_hot(const SparseAdj& adj, std::size_t cap = 32);

// Disjoint union; node ids of graph i are shifted by the sizes of graphs < i.
// offsets has graphs.size()+1 entries.
struct Union {
  Graph graph;
  std::vector<std::size_t> offsets;
};
Union disjoint_union(const std::vector<const Graph*>& graphs);

}  // namespace gpb::graph
