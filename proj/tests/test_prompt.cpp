#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "gpb/ad/gradcheck.hpp"
#include "gpb/ad/losses.hpp"
#include "gpb/ad/ops.hpp"
#include "gpb/error.hpp"
#include "gpb/graph/sampler.hpp"
#include "gpb/graph/synth.hpp"
#include "gpb/graph/transform.hpp"
#include "gpb/prompt/prompt.hpp"
#include "gradcases.hpp"
#include "test_util.hpp"

namespace gpb::prompt {
namespace {

using testing::random_matrix;

model::PretrainedEncoder random_encoder(std::size_t d, std::size_t hidden, std::uint64_t seed) {
  Rng rng(seed);
  model::BackboneConfig cfg{.input_dim = d, .hidden_dim = hidden};
  return model::PretrainedEncoder(cfg, model::init_gcn_weights(cfg, rng), "random");
}

PromptModule module_with(Method m, Matrix tokens, Matrix attention = {}) {
  PromptModule p;
  p.method = m;
  p.tokens = Tensor::parameter(std::move(tokens));
  if (!attention.empty()) p.attention = Tensor::parameter(std::move(attention));
  return p;
}

TEST(Gpf, ZeroPromptIsIdentity) {
  Rng rng(1);
  auto g = testing::random_graph(7, 0.4, 3, rng);
  auto p = module_with(Method::gpf, Matrix(1, 3));
  EXPECT_EQ(gpf_apply(p, g), g);
  auto enc = random_encoder(3, 8, 2);
  EXPECT_LE(ad::max_abs_diff(enc.embed(gpf_apply(p, g)), enc.embed(g)), 1e-12);
  auto plain = model::readout_mean(Tensor::constant(enc.embed(g))).value();
  EXPECT_LE(ad::max_abs_diff(prompted_embedding(p, enc, g).value(), plain), 1e-12);
}

TEST(Gpf, ZeroFeaturesTakeThePrompt) {
  Rng rng(2);
  auto g = testing::random_graph(5, 0.4, 3, rng);
  g.features.fill(0.0);
  auto v = Matrix::from_rows({{1.5, -2.0, 0.25}});
  auto out = gpf_apply(module_with(Method::gpf, v), g);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out.features(i, j), v(0, j));
  EXPECT_THROW(gpf_apply(module_with(Method::gpf, Matrix(1, 4)), g), DimensionError);
}

TEST(GpfPlus, SingleBasisReducesToGpf) {
  Rng rng(3);
  auto g = testing::random_graph(6, 0.4, 4, rng);
  auto b = random_matrix(1, 4, rng);
  auto plus = module_with(Method::gpfplus, b, random_matrix(1, 4, rng));
  EXPECT_EQ(gpfplus_apply(plus, g), gpf_apply(module_with(Method::gpf, b), g));
  auto enc = random_encoder(4, 8, 3);
  EXPECT_EQ(prompted_embedding(plus, enc, g).value(),
            prompted_embedding(module_with(Method::gpf, b), enc, g).value());
}

TEST(GpfPlus, ZeroBasisIsIdentityAndAttentionSumsToOne) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = testing::random_graph(1 + uniform_index(rng, 10), 0.4, 5, rng);
    const std::size_t k = 1 + uniform_index(rng, 6);
    auto p = module_with(Method::gpfplus, Matrix(k, 5), random_matrix(k, 5, rng, 3.0));
    EXPECT_EQ(gpfplus_apply(p, g), g);
    auto alpha = gpfplus_attention(p, g.features);
    for (std::size_t i = 0; i < alpha.rows(); ++i) {
      double s = 0;
      for (double v : alpha.row(i)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Gprompt, ReadoutCases) {
  Rng rng(5);
  auto h = Tensor::constant(random_matrix(6, 4, rng));
  EXPECT_EQ(gprompt_readout(Tensor::constant(Matrix(1, 4, 1.0)), h).value(), model::readout_mean(h).value());
  EXPECT_EQ(gprompt_readout(Tensor::constant(Matrix(1, 4)), h).value(), Matrix(1, 4));
  auto p = random_matrix(1, 4, rng);
  auto scaled = p;
  for (double& v : scaled.values()) v *= 2.5;
  auto a = gprompt_readout(Tensor::constant(p), h).value();
  auto b = gprompt_readout(Tensor::constant(scaled), h).value();
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(b(0, j), 2.5 * a(0, j), 1e-12);
  EXPECT_THROW(gprompt_readout(Tensor::constant(Matrix(1, 3)), h), DimensionError);
}

TEST(Gprompt, AllOnesMatchesMeanReadoutThroughEncoder) {
  Rng rng(6);
  auto g = testing::random_graph(7, 0.4, 3, rng);
  auto enc = random_encoder(3, 8, 6);
  auto p = module_with(Method::gprompt, Matrix(1, 8, 1.0));
  EXPECT_EQ(prompted_embedding(p, enc, g).value(),
            model::readout_mean(Tensor::constant(enc.embed(g))).value());
}

TEST(AllInOne, ThresholdSaturation) {
  Rng rng(7);
  auto g = testing::random_graph(5, 0.4, 3, rng);
  auto p = module_with(Method::allinone, random_matrix(1, 3, rng));
  p.threshold = 1.0 - 1e-15;
  auto out = allinone_insert(p, g);
  EXPECT_EQ(out.num_nodes(), 6u);
  EXPECT_EQ(out.adj.degree(5), 0u);

  auto q = module_with(Method::allinone, random_matrix(3, 3, rng));
  q.threshold = 1e-300;
  auto full = allinone_insert(q, g);
  for (std::size_t i = 5; i < 8; ++i) {
    for (std::size_t v = 0; v < 5; ++v) EXPECT_TRUE(full.adj.has_edge(i, v));
    for (std::size_t j = 5; j < 8; ++j) EXPECT_EQ(full.adj.has_edge(i, j), i != j);
  }
}

TEST(AllInOne, MatchesBruteForceAndPreservesOriginal) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 12), k = 1 + uniform_index(rng, 5), d = 1 + uniform_index(rng, 4);
    auto g = testing::random_graph(n, 0.3, d, rng);
    auto p = module_with(Method::allinone, random_matrix(k, d, rng));
    auto out = allinone_insert(p, g);
    const auto& P = p.tokens.value();
    auto dot = [](std::span<const double> a, std::span<const double> b) {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j)
        EXPECT_EQ(out.adj.has_edge(n + i, n + j), i != j && 1 / (1 + std::exp(-dot(P.row(i), P.row(j)))) > 0.5);
      for (std::size_t v = 0; v < n; ++v)
        EXPECT_EQ(out.adj.has_edge(n + i, v), 1 / (1 + std::exp(-dot(P.row(i), g.features.row(v)))) > 0.5);
    }
    std::vector<std::size_t> orig(n);
    std::iota(orig.begin(), orig.end(), 0);
    auto back = graph::restrict_to(out, orig);
    EXPECT_EQ(back.adj, g.adj);
    EXPECT_EQ(back.features, g.features);
  }
}

TEST(Heads, PrototypeAndLinearCases) {
  TaskHead proto;
  proto.kind = HeadKind::prototypes;
  proto.num_classes = 2;
  proto.prototypes = Matrix::from_rows({{1, 2, 3}, {-1, 0, 1}});
  auto s = class_scores(proto, Matrix::from_rows({{1, 2, 3}}));
  EXPECT_NEAR(s(0, 0), 1.0, 1e-12);

  TaskHead lin;
  lin.kind = HeadKind::linear;
  lin.num_classes = 3;
  lin.weight = Tensor::constant(Matrix(4, 3));
  auto u = class_scores(lin, Matrix(2, 4, 1.7));
  for (double v : u.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);

  std::vector<std::size_t> labels{0, 0, 1};
  EXPECT_THROW(class_means(Matrix(3, 2), labels, 3), InvalidArgument);
}

TEST(Heads, PrototypesClassifySeparableSupport) {
  auto ds = graph::two_blobs_node({.num_nodes = 40, .feature_dim = 8, .separation = 5.0, .seed = 9});
  const auto& g = ds.graphs[0];
  std::vector<std::size_t> labels(g.node_labels.begin(), g.node_labels.end());
  TaskHead head;
  head.kind = HeadKind::prototypes;
  head.num_classes = 2;
  head.prototypes = class_means(g.features, labels, 2);
  // nearest prototype by cosine on mean-centred features
  auto s = class_scores(head, g.features);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += (s(i, 1) > s(i, 0)) == (labels[i] == 1);
  EXPECT_EQ(hit, labels.size());
}

TEST(Gppt, TokenScores) {
  TaskHead head;
  head.kind = HeadKind::task_tokens;
  head.num_classes = 2;
  head.weight = Tensor::constant(Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  head.groups = {{0, 1}, {2}};
  auto s = class_scores(head, Matrix::from_rows({{0, 0, 0}}));
  EXPECT_EQ(s, Matrix(1, 2, 0.5));
  auto z = Matrix::from_rows({{0, 0, 3}});
  head.weight = Tensor::constant(Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 3}}));
  auto w = class_scores(head, z);
  EXPECT_GT(w(0, 1), w(0, 0));
}

TEST(Gppt, KmeansIsLloydFixedPoint) {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    auto pts = random_matrix(20, 3, rng);
    auto centers = kmeans(pts, 3, rng);
    auto assign = nearest_center(pts, centers);
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      std::vector<double> mean(3);
      std::size_t count = 0;
      for (std::size_t i = 0; i < 20; ++i)
        if (assign[i] == c) {
          ++count;
          for (std::size_t j = 0; j < 3; ++j) mean[j] += pts(i, j);
        }
      if (count == 0) continue;
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(centers(c, j), mean[j] / double(count), 1e-12);
    }
  }
}

std::size_t brute_vote(const Matrix& probs) {
  const std::size_t c = probs.cols();
  std::vector<std::size_t> votes(c);
  std::vector<double> mass(c);
  for (std::size_t v = 0; v < probs.rows(); ++v) {
    std::size_t best = 0;
    for (std::size_t j = 0; j < c; ++j)
      if (probs(v, j) > probs(v, best)) best = j;
    votes[best]++;
    for (std::size_t j = 0; j < c; ++j) mass[j] += probs(v, j);
  }
  // enumerate classes, keep the lexicographic max of (votes, mass, -index)
  std::size_t win = 0;
  for (std::size_t j = 0; j < c; ++j)
    if (std::tie(votes[j], mass[j]) > std::tie(votes[win], mass[win])) win = j;
  return win;
}

TEST(Gppt, VoteCases) {
  EXPECT_EQ(gppt_graph_vote(Matrix::from_rows({{0.2, 0.9, 0.4}})), 1u);
  EXPECT_EQ(gppt_graph_vote(Matrix::from_rows({{0.3, 0.6}, {0.3, 0.6}, {0.3, 0.6}})), 1u);
  auto split = Matrix::from_rows({{0.9, 0.1}, {0.8, 0.3}, {0.7, 0.2}, {0.1, 0.99}, {0.2, 0.99}});
  EXPECT_EQ(gppt_graph_vote(split), 0u);
  EXPECT_EQ(gppt_graph_vote(split), brute_vote(split));
  // 1–1 vote split, class 1 has more mass
  EXPECT_EQ(gppt_graph_vote(Matrix::from_rows({{0.6, 0.5}, {0.1, 0.9}})), 1u);
  // full tie goes to the lowest index
  EXPECT_EQ(gppt_graph_vote(Matrix::from_rows({{0.6, 0.4}, {0.4, 0.6}})), 0u);
  EXPECT_THROW(gppt_graph_vote(Matrix(0, 2)), InvalidArgument);
}

TEST(Gppt, VoteMatchesBruteForce) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    Matrix p(1 + uniform_index(rng, 10), 1 + uniform_index(rng, 4));
    // coarse values make ties common
    for (double& v : p.values()) v = double(uniform_index(rng, 4)) / 4.0;
    EXPECT_EQ(gppt_graph_vote(p), brute_vote(p));
  }
}

graph::Dataset blobs() { return graph::two_blobs_node({.num_nodes = 40, .feature_dim = 8, .seed = 3}); }

TEST(Tune, EpochsZeroReturnsInitialization) {
  auto ds = blobs();
  auto enc = random_encoder(8, 16, 12);
  auto task = graph::sample_kshot(ds, 1, 4);
  for (Method m : all_methods()) {
    PromptRunConfig cfg;
    cfg.method = m;
    cfg.epochs = 0;
    auto tuned = tune_prompt(enc, ds, task, cfg);
    EXPECT_TRUE(tuned.loss_trace.empty());
    Rng rng(derive_seed(cfg.seed, "prompt-init"));
    auto init = init_prompt(cfg, 8, 16, rng);
    for (std::size_t i = 0; i < init.parameters().size(); ++i)
      EXPECT_EQ(tuned.prompt.parameters()[i].value(), init.parameters()[i].value()) << to_string(m);
  }
}

TEST(Tune, FrozenEncoderForEveryMethod) {
  for (const auto& ds : {blobs(), graph::motif_graphs({.num_graphs = 20, .seed = 2})}) {
    auto enc = random_encoder(ds.feature_dim(), 16, 13);
    const auto before = enc.checksum();
    const auto weights = enc.weights();
    auto task = graph::sample_kshot(ds, 1, 5);
    for (Method m : all_methods()) {
      PromptRunConfig cfg;
      cfg.method = m;
      cfg.epochs = 5;
      tune_prompt(enc, ds, task, cfg);
      EXPECT_EQ(enc.checksum(), before) << to_string(m);
      EXPECT_EQ(enc.weights(), weights);
    }
  }
}

TEST(Tune, GpfFitsSeparableSupport) {
  auto ds = graph::motif_graphs({.classes = {graph::Motif::cycle, graph::Motif::star}, .num_graphs = 30, .seed = 6});
  auto enc = random_encoder(ds.feature_dim(), 16, 14);
  auto task = graph::sample_kshot(ds, 1, 6);
  PromptRunConfig cfg;
  cfg.method = Method::gpf;
  auto tuned = tune_prompt(enc, ds, task, cfg);
  auto pred = predict(tuned, enc, ds, task.support, cfg);
  for (std::size_t i = 0; i < task.support.size(); ++i) EXPECT_EQ(pred.labels[i], task.support[i].label);
  EXPECT_LT(tuned.loss_trace.back(), tuned.loss_trace.front());
}

TEST(Tune, DeterministicUnderSeed) {
  auto ds = blobs();
  auto enc = random_encoder(8, 16, 15);
  auto task = graph::sample_kshot(ds, 2, 7);
  for (Method m : all_methods()) {
    PromptRunConfig cfg;
    cfg.method = m;
    cfg.epochs = 10;
    auto a = tune_prompt(enc, ds, task, cfg);
    auto b = tune_prompt(enc, ds, task, cfg);
    EXPECT_EQ(a.loss_trace, b.loss_trace) << to_string(m);
    EXPECT_EQ(predict(a, enc, ds, task.query, cfg).scores, predict(b, enc, ds, task.query, cfg).scores);
  }
}

TEST(Tune, GradCheckEveryPipeline) {
  auto results = testing::prompt_grad_results();
  EXPECT_GE(results.size(), 10u);
  for (const auto& r : results)
    if (!r.ill_conditioned) {
      EXPECT_LT(r.error, 1e-4) << r.name;
    }
}

TEST(Params, TunableBelowEncoderAtDefaults) {
  auto ds = blobs();
  auto enc = random_encoder(8, 128, 20);
  auto task = graph::sample_kshot(ds, 1, 8);
  for (Method m : all_methods()) {
    PromptRunConfig cfg;
    cfg.method = m;
    cfg.epochs = 0;
    auto tuned = tune_prompt(enc, ds, task, cfg);
    EXPECT_LT(tunable_params(tuned), model::param_count(enc)) << to_string(m);
  }
  PromptRunConfig cfg;
  cfg.method = Method::allinone;
  Rng rng(1);
  EXPECT_EQ(model::param_count(init_prompt(cfg, 7, 128, rng).parameters()), 70u);
  cfg.method = Method::gpf;
  EXPECT_EQ(model::param_count(init_prompt(cfg, 3, 128, rng).parameters()), 3u);
}

}  // namespace
}  // namespace gpb::prompt
