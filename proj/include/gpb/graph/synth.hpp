#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpb/graph/graph.hpp"

namespace gpb::graph {

// Gaussian blobs with a homophilic random edge set. Class c has mean
// (separation/√2)·e_c, so any two class means sit `separation` apart; noise is
// N(0, 1) per dimension.
struct BlobsOptions {
  std::size_t num_nodes = 40;
  std::size_t feature_dim = 8;
  double separation = 5.0;
  std::size_t num_classes = 2;
  double p_in = 0.1;
  double p_out = 0.01;
  std::uint64_t seed = 0;
};
Dataset two_blobs_node(const BlobsOptions& opt);

// Stochastic block model. Features are N(0, 1) noise plus feature_signal·e_c.
struct SbmOptions {
  std::size_t nodes_per_class = 20;
  std::size_t num_classes = 3;
  std::size_t feature_dim = 8;
  double p_in = 0.5;
  double p_out = 0.05;
  double feature_signal = 1.0;
  std::uint64_t seed = 0;
};
Dataset homophilic_sbm(const SbmOptions& opt);
// Same generator; defaults flipped so inter-class edges dominate.
Dataset heterophilic_sbm(SbmOptions opt);
inline SbmOptions heterophilic_defaults() {
  SbmOptions o;
  o.p_in = 0.05;
  o.p_out = 0.5;
  return o;
}

enum class Motif { cycle, star, path, clique, wheel };
Motif parse_motif(const std::string& s);
std::string to_string(Motif m);

// Graph-level dataset: graph i has label i mod |classes| and the shape of
// classes[label] with a random size in [min_nodes, max_nodes]. Featureless by
// construction, so features are degree one-hot.
struct MotifOptions {
  std::vector<Motif> classes{Motif::cycle, Motif::star};
  std::size_t num_graphs = 30;
  std::size_t min_nodes = 6;
  std::size_t max_nodes = 12;
  double extra_edge_prob = 0.0;
  std::uint64_t seed = 0;
};
Dataset motif_graphs(const MotifOptions& opt);

}  // namespace gpb::graph
