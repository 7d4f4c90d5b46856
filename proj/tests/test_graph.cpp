#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <queue>
#include <set>

#include "gpb/ad/ops.hpp"
#include "gpb/ad/optim.hpp"
#include "gpb/ad/losses.hpp"
#include "gpb/error.hpp"
#include "gpb/graph/bundle.hpp"
#include "gpb/graph/sampler.hpp"
#include "gpb/graph/synth.hpp"
#include "gpb/graph/transform.hpp"
#include "test_util.hpp"

namespace gpb::graph {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("gpb_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

void write_small_bundle(const fs::path& dir, const std::string& edges) {
  write_file(dir / "manifest.json",
             R"({"name":"tiny","level":"node","num_classes":2,"feature_dim":2,"directed":false})");
  write_file(dir / "nodes.csv",
             "graph_id,node_id,label,f1,f2\n0,0,0,1.5,2\n0,1,1,0,-1\n0,2,-1,3,0.25\n");
  write_file(dir / "edges.csv", "graph_id,src,dst\n" + edges);
}

TEST(Bundle, HandWrittenBundleLoads) {
  TempDir tmp;
  write_small_bundle(tmp.path(), "0,0,1\n0,1,2\n");
  auto ds = load_bundle(tmp.path());
  ASSERT_EQ(ds.graphs.size(), 1u);
  EXPECT_EQ(ds.graphs[0].num_nodes(), 3u);
  EXPECT_EQ(ds.graphs[0].num_edges(), 2u);
  EXPECT_EQ(ds.graphs[0].features(0, 0), 1.5);
  EXPECT_EQ(ds.graphs[0].node_labels, (std::vector<int>{0, 1, kUnlabeled}));
}

TEST(Bundle, DistinctFailureModes) {
  {
    TempDir tmp;
    write_small_bundle(tmp.path(), "0,0,99\n");
    EXPECT_THROW(load_bundle(tmp.path()), DanglingEdgeError);
  }
  {
    TempDir tmp;
    write_small_bundle(tmp.path(), "0,0,1\n");
    fs::remove(tmp.path() / "edges.csv");
    EXPECT_THROW(load_bundle(tmp.path()), MissingFileError);
  }
  {
    TempDir tmp;
    write_small_bundle(tmp.path(), "0,0,1\n");
    write_file(tmp.path() / "nodes.csv", "graph_id,node_id,label,f1,f2\n0,0,0,1\n0,1,1,0,1\n0,2,0,1,1\n");
    EXPECT_THROW(load_bundle(tmp.path()), RaggedRowError);
  }
  {
    TempDir tmp;
    write_small_bundle(tmp.path(), "0,0,1\n");
    write_file(tmp.path() / "nodes.csv", "graph_id,node_id,label,f1,f2\n0,0,5,1,1\n0,1,1,0,1\n0,2,0,1,1\n");
    EXPECT_THROW(load_bundle(tmp.path()), LabelRangeError);
  }
  {
    TempDir tmp;
    write_small_bundle(tmp.path(), "0,0,1\n");
    write_file(tmp.path() / "nodes.csv", "graph_id,node_id,label,f1,f2\n0,0,0,abc,1\n0,1,1,0,1\n0,2,0,1,1\n");
    EXPECT_THROW(load_bundle(tmp.path()), ParseError);
  }
}

TEST(Bundle, RoundTripIsBitExact) {
  TempDir tmp;
  for (const auto& ds : {two_blobs_node({.seed = 3}), homophilic_sbm({.seed = 4}),
                         motif_graphs({.num_graphs = 12, .seed = 5})}) {
    const auto dir = tmp.path() / ds.name;
    write_bundle(ds, dir);
    EXPECT_EQ(load_bundle(dir), ds) << ds.name;
  }
}

TEST(Bundle, FeaturelessGetsDegreeOneHot) {
  TempDir tmp;
  write_file(tmp.path() / "manifest.json",
             R"({"name":"bare","level":"graph","num_classes":2,"feature_dim":0,"directed":false})");
  write_file(tmp.path() / "nodes.csv", "graph_id,node_id,label\n0,0,-1\n0,1,-1\n0,2,-1\n1,0,-1\n1,1,-1\n");
  write_file(tmp.path() / "edges.csv", "graph_id,src,dst\n0,0,1\n0,0,2\n1,0,1\n");
  write_file(tmp.path() / "graphs.csv", "graph_id,label\n0,0\n1,1\n");
  auto ds = load_bundle(tmp.path());
  EXPECT_EQ(ds.feature_dim(), 33u);
  EXPECT_EQ(ds.graphs[0].features(0, 2), 1.0);
  EXPECT_EQ(ds.graphs[0].features(1, 1), 1.0);
  EXPECT_EQ(ds.graphs[1].graph_label, 1);
}

// Logistic-regression probe trained on all nodes.
double linear_probe_accuracy(const Dataset& ds) {
  const auto& g = ds.graphs[0];
  std::vector<std::size_t> labels(g.node_labels.begin(), g.node_labels.end());
  auto x = ad::Tensor::constant(g.features);
  auto w = ad::Tensor::parameter(ad::Matrix(g.feature_dim(), ds.num_classes));
  auto b = ad::Tensor::parameter(ad::Matrix(1, ds.num_classes));
  ad::Optimizer opt({w, b}, {.learning_rate = 0.05});
  for (int i = 0; i < 300; ++i) {
    opt.zero_grad();
    ad::softmax_cross_entropy(ad::add_row(ad::matmul(x, w), b), labels).backward();
    opt.step();
  }
  auto logits = ad::add_row(ad::matmul(x, w), b).value();
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto row = logits.row(i);
    hit += static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) == labels[i];
  }
  return double(hit) / double(labels.size());
}

TEST(Synth, TwoBlobsLinearlySeparable) {
  auto ds = two_blobs_node({.num_nodes = 40, .feature_dim = 8, .separation = 5.0, .seed = 1});
  EXPECT_GT(linear_probe_accuracy(ds), 0.95);
}

std::pair<double, double> edge_densities(const Graph& g) {
  std::size_t intra = 0, inter = 0, same_pairs = 0, diff_pairs = 0;
  for (std::size_t u = 0; u < g.num_nodes(); ++u)
    for (std::size_t v = u + 1; v < g.num_nodes(); ++v) {
      const bool same = g.node_labels[u] == g.node_labels[v];
      (same ? same_pairs : diff_pairs)++;
      if (g.adj.has_edge(u, v)) (same ? intra : inter)++;
    }
  return {double(intra) / double(same_pairs), double(inter) / double(diff_pairs)};
}

TEST(Synth, SbmDensities) {
  auto [hi_in, hi_out] = edge_densities(homophilic_sbm({.p_in = 0.5, .p_out = 0.05, .seed = 2}).graphs[0]);
  EXPECT_GT(hi_in, hi_out);
  auto [he_in, he_out] = edge_densities(heterophilic_sbm(heterophilic_defaults()).graphs[0]);
  EXPECT_LT(he_in, he_out);
}

TEST(Synth, MotifDegreeHistogramsDiffer) {
  auto ds = motif_graphs({.classes = {Motif::cycle, Motif::star}, .num_graphs = 30, .seed = 3});
  ASSERT_EQ(ds.graphs.size(), 30u);
  for (const auto& g : ds.graphs) {
    std::size_t max_deg = 0;
    for (std::size_t u = 0; u < g.num_nodes(); ++u) max_deg = std::max(max_deg, g.adj.degree(u));
    if (*g.graph_label == 0) EXPECT_EQ(max_deg, 2u);
    else EXPECT_EQ(max_deg, g.num_nodes() - 1);
  }
}

TEST(Synth, DegenerateSizesThrow) {
  EXPECT_THROW(two_blobs_node({.num_nodes = 6}), InvalidArgument);
  EXPECT_THROW(homophilic_sbm({.nodes_per_class = 3}), InvalidArgument);
  EXPECT_THROW(homophilic_sbm({.num_classes = 1}), InvalidArgument);
  EXPECT_THROW(motif_graphs({.classes = {Motif::cycle}}), InvalidArgument);
}

TEST(Synth, SeededAndReproducible) {
  EXPECT_EQ(homophilic_sbm({.seed = 9}), homophilic_sbm({.seed = 9}));
  EXPECT_NE(homophilic_sbm({.seed = 9}), homophilic_sbm({.seed = 10}));
}

TEST(Subgraph, PathCenterOneHop) {
  auto g = testing::path_graph(4);
  auto sub = induce_subgraph(g, 1, 1);
  EXPECT_EQ(sub.num_nodes(), 3u);
  EXPECT_EQ(sub.num_edges(), 2u);
  EXPECT_EQ(sub.center, 1u);
}

TEST(Subgraph, CompleteGraphWhole) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < 5; ++u)
    for (std::size_t v = u + 1; v < 5; ++v) edges.emplace_back(u, v);
  Graph g;
  g.adj = ad::SparseAdj::from_edges(5, edges, true);
  g.features = ad::Matrix(5, 2, 1.0);
  auto sub = induce_subgraph(g, 3, 1);
  EXPECT_EQ(sub.num_nodes(), 5u);
  EXPECT_EQ(sub.num_edges(), 10u);
}

TEST(Subgraph, IsolatedCenterIsSingleton) {
  Graph g;
  g.adj = ad::SparseAdj(3);
  g.features = ad::Matrix(3, 1);
  g.node_labels = {0, 1, 0};
  auto sub = induce_subgraph(g, 1, 2);
  EXPECT_EQ(sub.num_nodes(), 1u);
  EXPECT_EQ(sub.graph_label, 1);
}

std::set<std::size_t> bfs_ball(const Graph& g, std::size_t c, std::size_t hops) {
  std::vector<std::size_t> dist(g.num_nodes(), SIZE_MAX);
  std::queue<std::size_t> q;
  dist[c] = 0;
  q.push(c);
  std::set<std::size_t> out{c};
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    if (dist[u] == hops) continue;
    for (auto v : g.adj.neighbors(u))
      if (dist[v] == SIZE_MAX) {
        dist[v] = dist[u] + 1;
        out.insert(v);
        q.push(v);
      }
  }
  return out;
}

TEST(Subgraph, MatchesBfsOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = testing::random_graph(12, 0.3, 2, rng);
    const std::size_t c = uniform_index(rng, 12);
    auto sub = induce_subgraph(g, c, 2);
    auto ball = bfs_ball(g, c, 2);
    ASSERT_EQ(sub.num_nodes(), ball.size());
    std::vector<std::size_t> ids(ball.begin(), ball.end());
    EXPECT_EQ(ids[*sub.center], c);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      EXPECT_EQ(sub.features.row(i)[0], g.features.row(ids[i])[0]);
      for (std::size_t j = 0; j < ids.size(); ++j)
        EXPECT_EQ(sub.adj.has_edge(i, j), g.adj.has_edge(ids[i], ids[j]));
    }
    // connected: BFS inside the subgraph reaches everything
    EXPECT_EQ(bfs_ball(sub, *sub.center, sub.num_nodes()).size(), sub.num_nodes());
  }
}

Dataset labeled_node_dataset(std::size_t n, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.name = "labeled";
  ds.num_classes = classes;
  ds.graphs.push_back(testing::random_graph(n, 0.1, 3, rng));
  for (std::size_t i = 0; i < n; ++i) ds.graphs[0].node_labels.push_back(int(i % classes));
  return ds;
}

TEST(KShot, SupportSizeIsKTimesClasses) {
  auto task = sample_kshot(labeled_node_dataset(90, 3, 1), 2, 7);
  EXPECT_EQ(task.support.size(), 6u);
}

TEST(KShot, SevenClassOneShot) {
  auto ds = labeled_node_dataset(700, 7, 2);
  auto task = sample_kshot(ds, 1, 3);
  EXPECT_EQ(task.support.size(), 7u);
  EXPECT_EQ(task.query.size(), 630u);
}

TEST(KShot, GraphLevelUsesEightyPercent) {
  auto ds = motif_graphs({.num_graphs = 30, .seed = 1});
  auto task = sample_kshot(ds, 1, 3);
  EXPECT_EQ(task.query.size(), 24u);
  EXPECT_EQ(task.support.size(), 2u);
}

TEST(KShot, SeedBehaviour) {
  auto ds = labeled_node_dataset(200, 4, 3);
  EXPECT_EQ(sample_kshot(ds, 3, 11), sample_kshot(ds, 3, 11));
  std::set<std::vector<std::size_t>> supports;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto task = sample_kshot(ds, 3, s);
    EXPECT_EQ(task.support.size(), 12u);
    std::vector<std::size_t> ids;
    for (auto& it : task.support) ids.push_back(it.id);
    std::sort(ids.begin(), ids.end());
    supports.insert(ids);
  }
  EXPECT_EQ(supports.size(), 5u);
}

TEST(KShot, PropertyExactlyKPerClassAndDisjoint) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t classes = 2 + uniform_index(rng, 5);
    const std::size_t n = classes * (20 + uniform_index(rng, 40));
    auto ds = labeled_node_dataset(n, classes, trial);
    const std::size_t k = 1 + uniform_index(rng, 2);
    auto task = sample_kshot(ds, k, trial);
    std::vector<std::size_t> count(classes);
    std::set<std::size_t> sup;
    for (auto& it : task.support) {
      count[it.label]++;
      sup.insert(it.id);
      EXPECT_EQ(ds.graphs[0].node_labels[it.id], int(it.label));
    }
    for (auto c : count) EXPECT_EQ(c, k);
    for (auto& it : task.query) EXPECT_FALSE(sup.count(it.id));
    EXPECT_EQ(task.query.size(), std::size_t(0.9 * double(n)));
  }
}

TEST(KShot, InfeasibleNamesClass) {
  auto ds = labeled_node_dataset(40, 2, 4);
  for (auto& l : ds.graphs[0].node_labels)
    if (l == 1) l = 0;
  ds.graphs[0].node_labels[5] = 1;
  try {
    sample_kshot(ds, 2, 1);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("class 1"), std::string::npos) << e.what();
  }
}

TEST(Manipulation, ZeroFractionIsNoOp) {
  Rng rng(6);
  auto g = testing::random_graph(10, 0.3, 2, rng);
  for (auto kind : {ManipulationKind::drop_nodes, ManipulationKind::drop_edges,
                    ManipulationKind::mask_features})
    EXPECT_EQ(apply_manipulation(g, {kind, 0.0, 1}), g);
}

TEST(Manipulation, DropHalfOfTenEdges) {
  auto g = testing::path_graph(11);
  ASSERT_EQ(g.num_edges(), 10u);
  EXPECT_EQ(apply_manipulation(g, {ManipulationKind::drop_edges, 0.5, 3}).num_edges(), 5u);
}

TEST(Manipulation, DropNodesMatchesRestriction) {
  Rng rng(7);
  auto g = testing::random_graph(16, 0.3, 2, rng);
  auto out = apply_manipulation(g, {ManipulationKind::drop_nodes, 0.25, 5});
  ASSERT_EQ(out.num_nodes(), 12u);
  // recover survivors from the unique feature values
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < out.num_nodes(); ++i)
    for (std::size_t j = 0; j < g.num_nodes(); ++j)
      if (g.features(j, 0) == out.features(i, 0)) keep.push_back(j);
  ASSERT_EQ(keep.size(), 12u);
  EXPECT_EQ(out, restrict_to(g, keep));
}

TEST(Manipulation, MaskZeroesRows) {
  Rng rng(8);
  auto g = testing::random_graph(10, 0.3, 3, rng);
  auto out = apply_manipulation(g, {ManipulationKind::mask_features, 0.3, 2});
  std::size_t zero_rows = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    auto r = out.features.row(i);
    zero_rows += std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
  }
  EXPECT_EQ(zero_rows, 3u);
  EXPECT_EQ(out.adj, g.adj);
}

TEST(Manipulation, InvalidFractionsThrow) {
  auto g = testing::path_graph(3);
  EXPECT_THROW(apply_manipulation(g, {ManipulationKind::drop_nodes, 1.0, 0}), Error);
  EXPECT_THROW(apply_manipulation(g, {ManipulationKind::drop_nodes, -0.1, 0}), Error);
  EXPECT_THROW(apply_manipulation(testing::path_graph(1), {ManipulationKind::drop_nodes, 0.5, 0}), Error);
}

TEST(Manipulation, NeverDangling) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = testing::random_graph(4 + uniform_index(rng, 20), 0.3, 2, rng);
    const double f = 0.7 * uniform01(rng);
    for (auto kind : {ManipulationKind::drop_nodes, ManipulationKind::drop_edges,
                      ManipulationKind::mask_features}) {
      auto out = apply_manipulation(g, {kind, f, std::uint64_t(trial)});
      for (auto& e : out.adj.entries()) {
        EXPECT_LT(e.row, out.num_nodes());
        EXPECT_LT(e.col, out.num_nodes());
      }
      EXPECT_NO_THROW(out.validate(1));
    }
  }
}

TEST(Permute, IdentityAndInverse) {
  Rng rng(10);
  auto g = testing::random_graph(9, 0.4, 3, rng);
  std::vector<std::size_t> id(9);
  std::iota(id.begin(), id.end(), 0);
  EXPECT_EQ(permute_nodes(g, id), g);
  auto perm = permutation(9, rng);
  EXPECT_EQ(permute_nodes(permute_nodes(g, perm), invert_permutation(perm)), g);
  std::vector<std::size_t> bad{0, 0, 1, 2, 3, 4, 5, 6, 7};
  EXPECT_THROW(permute_nodes(g, bad), Error);
}

TEST(Permute, DegreeMultisetUnchanged) {
  auto g = testing::path_graph(7);
  g.node_labels = {0, 1, 0, 1, 0, 1, 0};
  Rng rng(11);
  auto out = permute_nodes(g, permutation(7, rng));
  std::multiset<std::size_t> a, b;
  for (std::size_t i = 0; i < 7; ++i) {
    a.insert(g.adj.degree(i));
    b.insert(out.adj.degree(i));
  }
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace gpb::graph
