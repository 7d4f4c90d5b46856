#include "gpb/graph/synth.hpp"

#include <cmath>
#include <string>

#include "gpb/error.hpp"
#include "gpb/random.hpp"

namespace gpb::graph {

namespace {

void check_sizes(std::size_t classes, std::size_t per_class, std::size_t dim) {
  if (classes < 2) throw InvalidArgument("synthetic dataset needs at least 2 classes");
  if (per_class < 4) throw InvalidArgument("synthetic dataset needs at least 4 items per class");
  if (dim < classes) throw InvalidArgument("feature_dim must be >= num_classes");
}

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}

SparseAdj block_edges(const std::vector<int>& labels, double p_in, double p_out, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const std::size_t n = labels.size();
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (uniform01(rng) < (labels[u] == labels[v] ? p_in : p_out)) edges.emplace_back(u, v);
  return SparseAdj::from_edges(n, edges, true);
}

}  // namespace

Dataset two_blobs_node(const BlobsOptions& opt) {
  if (opt.num_classes < 2) throw InvalidArgument("synthetic dataset needs at least 2 classes");
  check_sizes(opt.num_classes, opt.num_nodes / opt.num_classes, opt.feature_dim);
  check_prob(opt.p_in, "p_in");
  check_prob(opt.p_out, "p_out");
  Rng rng(opt.seed);
  const std::size_t n = opt.num_nodes, d = opt.feature_dim;
  const double offset = opt.separation / std::sqrt(2.0);
  Graph g;
  g.node_labels.resize(n);
  g.features = Matrix(n, d);
  for (std::size_t u = 0; u < n; ++u) {
    const int c = static_cast<int>(u % opt.num_classes);
    g.node_labels[u] = c;
    for (std::size_t j = 0; j < d; ++j) g.features(u, j) = normal(rng);
    g.features(u, static_cast<std::size_t>(c)) += offset;
  }
  g.adj = block_edges(g.node_labels, opt.p_in, opt.p_out, rng);
  Dataset ds{"two_blobs_node", TaskLevel::node, opt.num_classes, {}};
  ds.graphs.push_back(std::move(g));
  ds.validate();
  return ds;
}

Dataset homophilic_sbm(const SbmOptions& opt) {
  check_sizes(opt.num_classes, opt.nodes_per_class, opt.feature_dim);
  check_prob(opt.p_in, "p_in");
  check_prob(opt.p_out, "p_out");
  Rng rng(opt.seed);
  const std::size_t n = opt.num_classes * opt.nodes_per_class, d = opt.feature_dim;
  Graph g;
  g.node_labels.resize(n);
  g.features = Matrix(n, d);
  for (std::size_t u = 0; u < n; ++u) {
    const int c = static_cast<int>(u / opt.nodes_per_class);
    g.node_labels[u] = c;
    for (std::size_t j = 0; j < d; ++j) g.features(u, j) = normal(rng);
    g.features(u, static_cast<std::size_t>(c)) += opt.feature_signal;
  }
  g.adj = block_edges(g.node_labels, opt.p_in, opt.p_out, rng);
  Dataset ds{opt.p_in >= opt.p_out ? "homophilic_sbm" : "heterophilic_sbm", TaskLevel::node,
             opt.num_classes, {}};
  ds.graphs.push_back(std::move(g));
  ds.validate();
  return ds;
}

Dataset heterophilic_sbm(SbmOptions opt) { return homophilic_sbm(opt); }

Motif parse_motif(const std::string& s) {
  if (s == "cycle") return Motif::cycle;
  if (s == "star") return Motif::star;
  if (s == "path") return Motif::path;
  if (s == "clique") return Motif::clique;
  if (s == "wheel") return Motif::wheel;
  throw InvalidArgument("unknown motif '" + s + "'");
}

std::string to_string(Motif m) {
  switch (m) {
    case Motif::cycle: return "cycle";
    case Motif::star: return "star";
    case Motif::path: return "path";
    case Motif::clique: return "clique";
    case Motif::wheel: return "wheel";
  }
  return "?";
}

Dataset motif_graphs(const MotifOptions& opt) {
  const std::size_t classes = opt.classes.size();
  if (classes < 2) throw InvalidArgument("motif_graphs needs at least 2 classes");
  if (opt.num_graphs < 4 * classes)
    throw InvalidArgument("motif_graphs needs at least 4 graphs per class");
  if (opt.min_nodes < 4 || opt.max_nodes < opt.min_nodes)
    throw InvalidArgument("motif_graphs needs 4 <= min_nodes <= max_nodes");
  check_prob(opt.extra_edge_prob, "extra_edge_prob");
  Rng rng(opt.seed);
  Dataset ds{"motif_graphs", TaskLevel::graph, classes, {}};
  for (std::size_t i = 0; i < opt.num_graphs; ++i) {
    const std::size_t label = i % classes;
    const std::size_t n = opt.min_nodes + uniform_index(rng, opt.max_nodes - opt.min_nodes + 1);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    switch (opt.classes[label]) {
      case Motif::cycle:
        for (std::size_t u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
        break;
      case Motif::star:
        for (std::size_t u = 1; u < n; ++u) edges.emplace_back(0, u);
        break;
      case Motif::path:
        for (std::size_t u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
        break;
      case Motif::clique:
        for (std::size_t u = 0; u < n; ++u)
          for (std::size_t v = u + 1; v < n; ++v) edges.emplace_back(u, v);
        break;
      case Motif::wheel:
        for (std::size_t u = 1; u < n; ++u) {
          edges.emplace_back(0, u);
          edges.emplace_back(u, u + 1 < n ? u + 1 : 1);
        }
        break;
    }
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (opt.extra_edge_prob > 0.0 && uniform01(rng) < opt.extra_edge_prob)
          edges.emplace_back(u, v);
    Graph g;
    g.adj = SparseAdj::from_edges(n, edges, true);
    g.features = degree_one_hot(g.adj);
    g.graph_label = static_cast<int>(label);
    ds.graphs.push_back(std::move(g));
  }
  ds.validate();
  return ds;
}

}  // namespace gpb::graph
