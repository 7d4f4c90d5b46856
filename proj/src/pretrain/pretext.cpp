#include "gpb/pretrain/pretext.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpb/ad/losses.hpp"
#include "gpb/ad/ops.hpp"
#include "gpb/ad/optim.hpp"
#include "gpb/error.hpp"
#include "gpb/random.hpp"

namespace gpb::pretrain {

namespace {

constexpr std::size_t kMaxPositiveEdges = 256;

std::vector<std::size_t> segment_ids(const std::vector<std::size_t>& offsets) {
  std::vector<std::size_t> ids(offsets.back());
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s)
    std::fill(ids.begin() + offsets[s], ids.begin() + offsets[s + 1], s);
  return ids;
}

bool linked(const ad::SparseAdj& adj, std::size_t u, std::size_t v) {
  return adj.has_edge(u, v) || adj.has_edge(v, u);
}

Tensor pair_logits(const Tensor& z, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<std::size_t> us, vs;
  for (auto [u, v] : pairs) {
    us.push_back(u);
    vs.push_back(v);
  }
  return ad::row_dot(ad::gather_rows(z, us), ad::gather_rows(z, vs));
}

std::vector<Matrix> perturb(const std::vector<Tensor>& weights, double eta, Rng& rng) {
  std::vector<Matrix> out;
  for (const auto& w : weights) {
    const Matrix& v = w.value();
    const double n = static_cast<double>(v.size());
    const double mu = std::accumulate(v.values().begin(), v.values().end(), 0.0) / n;
    double var = 0.0;
    for (double x : v.values()) var += (x - mu) * (x - mu);
    const double sd = std::sqrt(var / n);
    Matrix p = v;
    for (double& x : p.values()) x += eta * sd * normal(rng);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::string to_string(Pretext p) {
  switch (p) {
    case Pretext::dgi: return "dgi";
    case Pretext::graphmae: return "graphmae";
    case Pretext::edge_gppt: return "edge_gppt";
    case Pretext::edge_gprompt: return "edge_gprompt";
    case Pretext::graphcl: return "graphcl";
    case Pretext::simgrace: return "simgrace";
  }
  return "?";
}

Pretext parse_pretext(const std::string& s) {
  for (Pretext p : all_pretexts())
    if (to_string(p) == s) return p;
  throw InvalidArgument("unknown pretext '" + s + "'");
}

const std::vector<Pretext>& all_pretexts() {
  static const std::vector<Pretext> all{Pretext::dgi,          Pretext::graphmae,
                                        Pretext::edge_gppt,    Pretext::edge_gprompt,
                                        Pretext::graphcl,      Pretext::simgrace};
  return all;
}

bool is_graph_level(Pretext p) { return p == Pretext::graphcl || p == Pretext::simgrace; }

void PretextConfig::validate() const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!(learning_rate >= 0.0)) throw ConfigError("pretext learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("pretext weight_decay must be >= 0");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (!open_unit(mask_rate)) throw ConfigError("mask_rate must lie in (0, 1)");
  if (!(cosine_power >= 1.0)) throw ConfigError("cosine_power must be >= 1");
  if (!(perturb_scale > 0.0)) throw ConfigError("perturb_scale must be > 0");
  if (!open_unit(augment_rate)) throw ConfigError("augment_rate must lie in (0, 1)");
  if (augmentations.empty()) throw ConfigError("augmentations must not be empty");
  if (neg_ratio == 0) throw ConfigError("neg_ratio must be >= 1");
  if (hops == 0) throw ConfigError("hops must be >= 1");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
}

Tensor binary_discrimination(const Tensor& pos_logits, const Tensor& neg_logits) {
  Tensor parts[] = {pos_logits, neg_logits};
  Matrix targets(pos_logits.rows() + neg_logits.rows(), pos_logits.cols(), 0.0);
  for (std::size_t i = 0; i < pos_logits.rows() * pos_logits.cols(); ++i) targets.data()[i] = 1.0;
  return ad::bce_with_logits(ad::vstack(parts), targets);
}

Tensor nt_xent(const Tensor& z1, const Tensor& z2, double tau) {
  if (z1.rows() != z2.rows() || z1.cols() != z2.cols())
    throw DimensionError("nt_xent: view shapes differ");
  const std::size_t b = z1.rows();
  if (b < 2) throw InvalidArgument("nt_xent needs at least 2 items per view");
  if (!(tau > 0.0)) throw InvalidArgument("nt_xent: tau must be > 0");
  Tensor views[] = {z1, z2};
  Tensor z = ad::normalize_rows(ad::vstack(views));
  Tensor sim = ad::offdiag(ad::scale(ad::matmul(z, ad::transpose(z)), 1.0 / tau));
  std::vector<std::size_t> labels(2 * b);
  for (std::size_t i = 0; i < 2 * b; ++i) {
    const std::size_t j = (i + b) % (2 * b);
    labels[i] = j > i ? j - 1 : j;
  }
  return ad::softmax_cross_entropy(sim, labels);
}

Tensor triplet_context_loss(const Tensor& sv, const Tensor& sa, const Tensor& sb, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("triplet loss: tau must be > 0");
  Tensor v = ad::normalize_rows(sv);
  Tensor cols[] = {ad::row_dot(v, ad::normalize_rows(sa)), ad::row_dot(v, ad::normalize_rows(sb))};
  std::vector<std::size_t> labels(sv.rows(), 0);
  return ad::softmax_cross_entropy(ad::scale(ad::hstack(cols), 1.0 / tau), labels);
}

std::vector<std::pair<std::size_t, std::size_t>> sample_non_edges(const ad::SparseAdj& adj,
                                                                  std::size_t count, Rng& rng) {
  const std::size_t n = adj.n();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(count);
  // Rejection first; a dense graph falls through to enumeration.
  for (std::size_t tries = 0; out.size() < count && tries < 64 * count && n >= 2; ++tries) {
    const std::size_t u = uniform_index(rng, n);
    const std::size_t v = uniform_index(rng, n);
    if (u != v && !linked(adj, u, v)) out.emplace_back(u, v);
  }
  if (out.size() == count) return out;
  std::vector<std::pair<std::size_t, std::size_t>> pool;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && !linked(adj, u, v)) pool.emplace_back(u, v);
  if (pool.empty()) throw InfeasibleError("no non-adjacent node pairs to use as negatives");
  while (out.size() < count) out.push_back(pool[uniform_index(rng, pool.size())]);
  return out;
}

Pretrainer::Pretrainer(PretextConfig config, const graph::Dataset& ds)
    : config_(std::move(config)), ds_(&ds) {
  config_.validate();
  if (ds.graphs.empty()) throw InvalidArgument("pre-training needs a nonempty dataset");
  if (config_.backbone.input_dim == 0) config_.backbone.input_dim = ds.feature_dim();
  if (config_.backbone.input_dim != ds.feature_dim())
    throw DimensionError("backbone input_dim " + std::to_string(config_.backbone.input_dim) +
                         " does not match feature dim " + std::to_string(ds.feature_dim()));
  config_.backbone.validate();

  Rng rng(derive_seed(config_.seed, "init"));
  for (auto& w : model::init_gcn_weights(config_.backbone, rng))
    encoder_.push_back(Tensor::parameter(std::move(w)));
  const std::size_t d = config_.backbone.input_dim;
  const std::size_t h = config_.backbone.hidden_dim;
  switch (config_.method) {
    case Pretext::dgi:
      extras_.push_back(Tensor::parameter(model::glorot(h, h, rng)));
      break;
    case Pretext::graphmae:
      extras_.push_back(Tensor::parameter(Matrix(1, d)));
      extras_.push_back(Tensor::parameter(model::glorot(h, d, rng)));
      break;
    case Pretext::graphcl:
    case Pretext::simgrace:
      extras_.push_back(Tensor::parameter(model::glorot(h, h, rng)));
      extras_.push_back(Tensor::parameter(model::glorot(h, h, rng)));
      break;
    case Pretext::edge_gppt:
    case Pretext::edge_gprompt:
      break;
  }
}

std::vector<Tensor> Pretrainer::parameters() const {
  std::vector<Tensor> all = encoder_;
  all.insert(all.end(), extras_.begin(), extras_.end());
  return all;
}

model::PretrainedEncoder Pretrainer::snapshot() const {
  std::vector<Matrix> weights;
  for (const auto& w : encoder_) weights.push_back(w.value());
  return model::PretrainedEncoder(config_.backbone, std::move(weights), to_string(config_.method));
}

Tensor Pretrainer::encode(const std::vector<Tensor>& weights, const graph::Graph& g,
                          const ad::SparseAdj& norm) const {
  return model::gcn_forward(weights, norm, Tensor::constant(g.features));
}

Tensor Pretrainer::project(const Tensor& z) const {
  return ad::matmul(ad::relu(ad::matmul(z, extras_[0])), extras_[1]);
}

graph::Graph Pretrainer::sample_graph_batch(Rng& rng, std::vector<std::size_t>& offsets) const {
  if (ds_->level == graph::TaskLevel::node) {
    offsets = {0, ds_->graphs[0].num_nodes()};
    return ds_->graphs[0];
  }
  auto order = permutation(ds_->graphs.size(), rng);
  order.resize(std::min(order.size(), config_.batch_size));
  std::sort(order.begin(), order.end());
  std::vector<const graph::Graph*> picked;
  for (auto i : order) picked.push_back(&ds_->graphs[i]);
  auto u = graph::disjoint_union(picked);
  offsets = std::move(u.offsets);
  return std::move(u.graph);
}

std::vector<graph::Graph> Pretrainer::sample_units(Rng& rng) const {
  std::vector<graph::Graph> units;
  if (ds_->level == graph::TaskLevel::node) {
    const auto& g = ds_->graphs[0];
    auto centers = permutation(g.num_nodes(), rng);
    centers.resize(std::min(centers.size(), config_.batch_size));
    for (auto c : centers) units.push_back(graph::induce_subgraph(g, c, config_.hops));
  } else {
    auto order = permutation(ds_->graphs.size(), rng);
    order.resize(std::min(order.size(), config_.batch_size));
    for (auto i : order) units.push_back(ds_->graphs[i]);
  }
  if (units.size() < 2)
    throw InfeasibleError(to_string(config_.method) + " needs at least 2 graphs per batch");
  return units;
}

graph::Graph Pretrainer::augment(const graph::Graph& g, Rng& rng) const {
  const auto kind = config_.augmentations[uniform_index(rng, config_.augmentations.size())];
  const std::uint64_t seed = rng();
  const auto n = static_cast<double>(g.num_nodes());
  if (kind == graph::ManipulationKind::drop_nodes &&
      std::ceil(config_.augment_rate * n - 1e-9) >= n)
    return g;
  return graph::apply_manipulation(g, {kind, config_.augment_rate, seed});
}

PretextBatch Pretrainer::draw(std::uint64_t step_seed) const {
  Rng rng(step_seed);
  PretextBatch b;
  auto finish = [](graph::Graph& g, ad::SparseAdj& norm) { norm = model::normalized_adjacency(g.adj); };
  auto union_of = [](const std::vector<graph::Graph>& gs, std::vector<std::size_t>& offsets) {
    std::vector<const graph::Graph*> ptrs;
    for (const auto& g : gs) ptrs.push_back(&g);
    auto u = graph::disjoint_union(ptrs);
    offsets = std::move(u.offsets);
    return std::move(u.graph);
  };

  switch (config_.method) {
    case Pretext::dgi: {
      b.graph = sample_graph_batch(rng, b.offsets);
      const std::size_t n = b.graph.num_nodes();
      if (n < 2) throw InvalidArgument("dgi needs at least 2 nodes to shuffle");
      b.corruption = permutation(n, rng);
      bool identity = true;
      for (std::size_t i = 0; i < n && identity; ++i) identity = b.corruption[i] == i;
      if (identity) std::swap(b.corruption[0], b.corruption[1]);
      break;
    }
    case Pretext::graphmae: {
      b.graph = sample_graph_batch(rng, b.offsets);
      const std::size_t n = b.graph.num_nodes();
      const auto m = static_cast<std::size_t>(std::ceil(config_.mask_rate * double(n) - 1e-9));
      if (m == 0) throw InvalidArgument("graphmae masks no nodes");
      b.masked = permutation(n, rng);
      b.masked.resize(std::min(m, n));
      std::sort(b.masked.begin(), b.masked.end());
      break;
    }
    case Pretext::edge_gppt: {
      b.graph = sample_graph_batch(rng, b.offsets);
      b.positives = b.graph.adj.edge_list();
      if (b.positives.empty()) throw InfeasibleError("edge_gppt needs at least one edge");
      if (b.positives.size() > kMaxPositiveEdges) {
        shuffle(b.positives, rng);
        b.positives.resize(kMaxPositiveEdges);
      }
      b.negatives = sample_non_edges(b.graph.adj, config_.neg_ratio * b.positives.size(), rng);
      break;
    }
    case Pretext::edge_gprompt: {
      std::vector<std::size_t> big_offsets;
      graph::Graph big = sample_graph_batch(rng, big_offsets);
      const std::size_t n = big.num_nodes();
      std::vector<std::size_t> anchors;
      for (std::size_t v = 0; v < n; ++v)
        if (big.adj.degree(v) > 0 && big.adj.degree(v) + 1 < n) anchors.push_back(v);
      if (anchors.empty())
        throw InfeasibleError("edge_gprompt found no node with both a neighbor and a non-neighbor");
      shuffle(anchors, rng);
      anchors.resize(std::min(anchors.size(), config_.batch_size));
      std::vector<graph::Graph> subs;
      for (auto v : anchors) {
        auto nbrs = big.adj.neighbors(v);
        const std::size_t a = nbrs[uniform_index(rng, nbrs.size())];
        std::vector<std::size_t> far;
        for (std::size_t u = 0; u < n; ++u)
          if (u != v && !big.adj.has_edge(v, u)) far.push_back(u);
        const std::size_t c = far[uniform_index(rng, far.size())];
        for (auto x : {v, a, c}) subs.push_back(graph::induce_subgraph(big, x, config_.hops));
      }
      b.graph = union_of(subs, b.offsets);
      break;
    }
    case Pretext::graphcl: {
      auto units = sample_units(rng);
      std::vector<graph::Graph> v1, v2;
      for (const auto& g : units) {
        v1.push_back(augment(g, rng));
        v2.push_back(augment(g, rng));
      }
      b.graph = union_of(v1, b.offsets);
      b.view = union_of(v2, b.view_offsets);
      finish(b.view, b.view_norm);
      break;
    }
    case Pretext::simgrace: {
      b.graph = union_of(sample_units(rng), b.offsets);
      b.perturbed = perturb(encoder_, config_.perturb_scale, rng);
      break;
    }
  }
  finish(b.graph, b.norm);
  return b;
}

Tensor Pretrainer::loss(const PretextBatch& b) const {
  switch (config_.method) {
    case Pretext::dgi: {
      Tensor h = encode(encoder_, b.graph, b.norm);
      Tensor x_bad = ad::gather_rows(Tensor::constant(b.graph.features), b.corruption);
      Tensor h_bad = model::gcn_forward(encoder_, b.norm, x_bad);
      Tensor summary = ad::sigmoid(ad::segment_mean(h, b.offsets));
      auto seg = segment_ids(b.offsets);
      Tensor s = ad::gather_rows(summary, seg);
      Tensor pos = ad::row_dot(ad::matmul(h, extras_[0]), s);
      Tensor neg = ad::row_dot(ad::matmul(h_bad, extras_[0]), s);
      return binary_discrimination(pos, neg);
    }
    case Pretext::graphmae: {
      const Matrix& x = b.graph.features;
      Matrix kept = x;
      Matrix indicator(x.rows(), 1);
      Matrix target(b.masked.size(), x.cols());
      for (std::size_t i = 0; i < b.masked.size(); ++i) {
        const std::size_t r = b.masked[i];
        std::copy(x.row(r).begin(), x.row(r).end(), target.row(i).begin());
        std::fill(kept.row(r).begin(), kept.row(r).end(), 0.0);
        indicator(r, 0) = 1.0;
      }
      Tensor x_in = ad::add(Tensor::constant(std::move(kept)),
                            ad::matmul(Tensor::constant(std::move(indicator)), extras_[0]));
      Tensor recon = ad::matmul(model::gcn_forward(encoder_, b.norm, x_in), extras_[1]);
      return ad::cosine_error(ad::gather_rows(recon, b.masked), target, config_.cosine_power);
    }
    case Pretext::edge_gppt: {
      Tensor z = encode(encoder_, b.graph, b.norm);
      return binary_discrimination(pair_logits(z, b.positives), pair_logits(z, b.negatives));
    }
    case Pretext::edge_gprompt: {
      Tensor s = ad::segment_mean(encode(encoder_, b.graph, b.norm), b.offsets);
      const std::size_t t = (b.offsets.size() - 1) / 3;
      std::vector<std::size_t> iv, ia, ib;
      for (std::size_t i = 0; i < t; ++i) {
        iv.push_back(3 * i);
        ia.push_back(3 * i + 1);
        ib.push_back(3 * i + 2);
      }
      return triplet_context_loss(ad::gather_rows(s, iv), ad::gather_rows(s, ia),
                                  ad::gather_rows(s, ib), config_.temperature);
    }
    case Pretext::graphcl: {
      Tensor z1 = project(ad::segment_mean(encode(encoder_, b.graph, b.norm), b.offsets));
      Tensor z2 = project(ad::segment_mean(encode(encoder_, b.view, b.view_norm), b.view_offsets));
      return nt_xent(z1, z2, config_.temperature);
    }
    case Pretext::simgrace: {
      std::vector<Tensor> other;
      for (const auto& m : b.perturbed) other.push_back(Tensor::constant(m));
      Tensor z1 = project(ad::segment_mean(encode(encoder_, b.graph, b.norm), b.offsets));
      Tensor z2 = project(ad::segment_mean(encode(other, b.graph, b.norm), b.offsets));
      return nt_xent(z1, z2, config_.temperature);
    }
  }
  throw InvalidArgument("unknown pretext");
}

PretrainResult run_pretraining(const PretextConfig& config, const graph::Dataset& ds) {
  Pretrainer trainer(config, ds);
  ad::Optimizer opt(trainer.parameters(), {.kind = ad::OptimizerKind::adam,
                                           .learning_rate = config.learning_rate,
                                           .weight_decay = config.weight_decay});
  PretrainResult result;
  result.loss_trace.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    try {
      auto batch = trainer.draw(derive_seed(config.seed, epoch));
      opt.zero_grad();
      Tensor loss = trainer.loss(batch);
      result.loss_trace.push_back(loss.item());
      loss.backward();
      opt.step();
    } catch (const NonFiniteError& e) {
      throw NonFiniteError(to_string(config.method) + " pre-training diverged at epoch " +
                           std::to_string(epoch) + ": " + e.what());
    }
  }
  result.encoder = trainer.snapshot();
  return result;
}

}  // namespace gpb::pretrain
