#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpb/graph/graph.hpp"

namespace gpb::graph {

// Ball of radius `hops` around `center` (BFS over outgoing edges). Nodes keep
// their relative order; `center` records the new index of the center and
// graph_label takes the center's node label. An isolated center gives the
// singleton graph.
Graph induce_subgraph(const Graph& g, std::size_t center, std::size_t hops);

// Restriction of g to `keep` (sorted, unique original ids), relabelled 0..k-1.
Graph restrict_to(const Graph& g, std::span<const std::size_t> keep);

enum class ManipulationKind { drop_nodes, drop_edges, mask_features };
std::string to_string(ManipulationKind k);
ManipulationKind parse_manipulation(const std::string& s);

struct Manipulation {
  ManipulationKind kind;
  double fraction;  // in [0, 1); 0 selects nothing
  std::uint64_t seed = 0;
};

// drop_nodes removes ⌈f·N⌉ nodes with their incident edges; drop_edges removes
// ⌈f·E⌉ edges (undirected pairs count once); mask_features zeroes the rows of
// ⌈f·N⌉ nodes.
Graph apply_manipulation(const Graph& g, const Manipulation& m);

// Node i of g becomes node perm[i].
Graph permute_nodes(const Graph& g, std::span<const std::size_t> perm);
std::vector<std::size_t> invert_permutation(std::span<const std::size_t> perm);

}  // namespace gpb::graph
