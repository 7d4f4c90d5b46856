#pragma once

#include <filesystem>

#include "gpb/graph/graph.hpp"

namespace gpb::graph {

// Graph bundle directory:
//   manifest.json  {name, level: "node"|"graph", num_classes, feature_dim, directed}
//   nodes.csv      graph_id,node_id,label,f1..fd   (label -1 = unlabeled)
//   edges.csv      graph_id,src,dst
//   graphs.csv     graph_id,label                  (optional; graph-level labels)
// Node ids are 0-based and contiguous per graph. feature_dim 0 marks a
// featureless dataset; such graphs get degree_one_hot features on load.
Dataset load_bundle(const std::filesystem::path& dir);

// Writes features with shortest round-trip decimal text, so load_bundle
// reproduces them bit-exactly. Undirected edges are written once (src <= dst).
void write_bundle(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace gpb::graph
