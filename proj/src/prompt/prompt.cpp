#include "gpb/prompt/prompt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "gpb/ad/losses.hpp"
#include "gpb/ad/ops.hpp"
#include "gpb/ad/optim.hpp"
#include "gpb/error.hpp"
#include "gpb/graph/transform.hpp"
#include "gpb/random.hpp"

namespace gpb::prompt {

namespace {

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

double row_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

void require_width(const char* what, std::size_t got, std::size_t want) {
  if (got != want)
    throw DimensionError(std::string(what) + ": width " + std::to_string(got) + ", expected " +
                         std::to_string(want));
}

// Structure of the All-in-one graph for one input graph, given token values.
ad::SparseAdj inserted_adjacency(const Matrix& p, const Graph& g, double delta) {
  const std::size_t n = g.num_nodes(), k = p.rows();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (g.directed) {
    for (const auto& e : g.adj.entries()) pairs.emplace_back(e.row, e.col);
  } else {
    pairs = g.adj.edge_list();
  }
  auto link = [&](std::size_t a, std::size_t b) {
    pairs.emplace_back(a, b);
    if (g.directed) pairs.emplace_back(b, a);
  };
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j)
      if (sigmoid(row_dot(p.row(i), p.row(j))) > delta) link(n + i, n + j);
    for (std::size_t v = 0; v < n; ++v)
      if (sigmoid(row_dot(p.row(i), g.features.row(v))) > delta) link(v, n + i);
  }
  return ad::SparseAdj::from_edges(n + k, pairs, !g.directed);
}

graph::Union union_of(std::span<const Graph* const> graphs) {
  return graph::disjoint_union(std::vector<const Graph*>(graphs.begin(), graphs.end()));
}

std::vector<Graph> make_units(const graph::Dataset& ds, std::span<const graph::LabeledItem> items,
                              std::size_t hops) {
  std::vector<Graph> units;
  units.reserve(items.size());
  for (const auto& it : items)
    units.push_back(ds.level == graph::TaskLevel::node
                        ? graph::induce_subgraph(ds.graphs[0], it.id, hops)
                        : ds.graphs[it.id]);
  return units;
}

std::vector<const Graph*> pointers(const std::vector<Graph>& gs) {
  std::vector<const Graph*> out;
  for (const auto& g : gs) out.push_back(&g);
  return out;
}

Tensor prototype_logits(const Tensor& e, const Tensor& protos, double tau) {
  return ad::scale(ad::matmul(ad::normalize_rows(e), ad::transpose(ad::normalize_rows(protos))),
                   1.0 / tau);
}

// C×n matrix whose product with n×D embeddings gives class means.
Matrix averaging_matrix(std::span<const std::size_t> labels, std::size_t classes) {
  Matrix m(classes, labels.size());
  std::vector<std::size_t> count(classes);
  for (auto l : labels) count[l]++;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (count[labels[i]] == 0) continue;
    m(labels[i], i) = 1.0 / static_cast<double>(count[labels[i]]);
  }
  for (std::size_t c = 0; c < classes; ++c)
    if (count[c] == 0) throw InvalidArgument("class " + std::to_string(c) + " has no support items");
  return m;
}

// Node embeddings used by GPPT: rows of the full graph for node tasks, all
// nodes of each listed graph for graph tasks.
struct GpptRows {
  Matrix z;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> offsets;  // graph tasks: node rows per item
};

GpptRows gppt_rows(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                   std::span<const graph::LabeledItem> items, const Matrix* full) {
  GpptRows out;
  const std::size_t dim = enc.config().hidden_dim;
  if (ds.level == graph::TaskLevel::node) {
    out.z = Matrix(items.size(), dim);
    for (std::size_t i = 0; i < items.size(); ++i) {
      std::copy(full->row(items[i].id).begin(), full->row(items[i].id).end(), out.z.row(i).begin());
      out.labels.push_back(items[i].label);
    }
    return out;
  }
  std::vector<Matrix> parts;
  std::size_t total = 0;
  out.offsets.push_back(0);
  for (const auto& it : items) {
    parts.push_back(enc.embed(ds.graphs[it.id]));
    total += parts.back().rows();
    out.offsets.push_back(total);
    out.labels.insert(out.labels.end(), parts.back().rows(), it.label);
  }
  out.z = Matrix(total, dim);
  std::size_t r = 0;
  for (const auto& m : parts)
    for (std::size_t i = 0; i < m.rows(); ++i, ++r)
      std::copy(m.row(i).begin(), m.row(i).end(), out.z.row(r).begin());
  return out;
}

void lloyd_step(TaskHead& head, const Matrix& z, std::span<const std::size_t> labels) {
  Matrix& t = head.weight.leaf_value();
  for (std::size_t c = 0; c < head.num_classes; ++c) {
    const auto& rows = head.groups[c];
    Matrix centers(rows.size(), t.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::copy(t.row(rows[i]).begin(), t.row(rows[i]).end(), centers.row(i).begin());
    Matrix sums(rows.size(), t.cols());
    std::vector<std::size_t> count(rows.size());
    for (std::size_t r = 0; r < z.rows(); ++r) {
      if (labels[r] != c) continue;
      Matrix one(1, z.cols());
      std::copy(z.row(r).begin(), z.row(r).end(), one.row(0).begin());
      const std::size_t j = nearest_center(one, centers)[0];
      count[j]++;
      for (std::size_t q = 0; q < z.cols(); ++q) sums(j, q) += z(r, q);
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (count[i] > 0)
        for (std::size_t q = 0; q < t.cols(); ++q)
          t(rows[i], q) = sums(i, q) / static_cast<double>(count[i]);
  }
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::gppt: return "gppt";
    case Method::gprompt: return "gprompt";
    case Method::allinone: return "allinone";
    case Method::gpf: return "gpf";
    case Method::gpfplus: return "gpfplus";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : all_methods())
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown prompt method '" + s + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all{Method::gppt, Method::gprompt, Method::allinone, Method::gpf,
                                       Method::gpfplus};
  return all;
}

std::string to_string(HeadKind k) {
  switch (k) {
    case HeadKind::linear: return "linear";
    case HeadKind::prototypes: return "prototypes";
    case HeadKind::task_tokens: return "task_tokens";
  }
  return "?";
}

void PromptRunConfig::validate() const {
  if (num_tokens == 0) throw ConfigError("num_tokens must be >= 1");
  if (basis_count == 0) throw ConfigError("basis_count must be >= 1");
  if (!(link_threshold > 0.0 && link_threshold < 1.0))
    throw ConfigError("link_threshold must lie in (0, 1)");
  if (hops == 0) throw ConfigError("hops must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("prompt learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("prompt weight_decay must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (centers_per_class == 0) throw ConfigError("centers_per_class must be >= 1");
}

std::vector<Tensor> PromptModule::parameters() const {
  std::vector<Tensor> out;
  if (tokens.defined()) out.push_back(tokens);
  if (attention.defined()) out.push_back(attention);
  return out;
}

std::vector<Tensor> TaskHead::parameters() const {
  if (weight.defined()) return {weight};
  return {};
}

PromptModule init_prompt(const PromptRunConfig& cfg, std::size_t d, std::size_t hidden, Rng& rng) {
  PromptModule p;
  p.method = cfg.method;
  p.threshold = cfg.link_threshold;
  switch (cfg.method) {
    case Method::gpf:
      p.tokens = Tensor::parameter(Matrix(1, d));
      break;
    case Method::gpfplus:
      p.tokens = Tensor::parameter(Matrix(cfg.basis_count, d));
      p.attention = Tensor::parameter(model::glorot(cfg.basis_count, d, rng));
      break;
    case Method::allinone:
      p.tokens = Tensor::parameter(model::glorot(cfg.num_tokens, d, rng));
      break;
    case Method::gprompt:
      p.tokens = Tensor::parameter(Matrix(1, hidden, 1.0));
      break;
    case Method::gppt:
      break;
  }
  return p;
}

Graph gpf_apply(const PromptModule& prompt, const Graph& g) {
  require_width("gpf prompt", prompt.tokens.cols(), g.feature_dim());
  if (prompt.tokens.rows() != 1) throw DimensionError("gpf prompt must be a single vector");
  Graph out = g;
  const auto p = prompt.tokens.value().row(0);
  for (std::size_t v = 0; v < out.num_nodes(); ++v)
    for (std::size_t j = 0; j < p.size(); ++j) out.features(v, j) += p[j];
  return out;
}

Matrix gpfplus_attention(const PromptModule& prompt, const Matrix& x) {
  require_width("gpf-plus attention", prompt.attention.cols(), x.cols());
  return ad::softmax_rows(ad::matmul(Tensor::constant(x), ad::transpose(Tensor::constant(prompt.attention.value()))))
      .value();
}

Graph gpfplus_apply(const PromptModule& prompt, const Graph& g) {
  require_width("gpf-plus basis", prompt.tokens.cols(), g.feature_dim());
  Graph out = g;
  const Matrix alpha = gpfplus_attention(prompt, g.features);
  const Matrix& b = prompt.tokens.value();
  for (std::size_t v = 0; v < out.num_nodes(); ++v)
    for (std::size_t k = 0; k < b.rows(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) out.features(v, j) += alpha(v, k) * b(k, j);
  return out;
}

Graph allinone_insert(const PromptModule& prompt, const Graph& g) {
  const Matrix& p = prompt.tokens.value();
  require_width("all-in-one tokens", p.cols(), g.feature_dim());
  Graph out;
  out.directed = g.directed;
  out.graph_label = g.graph_label;
  out.center = g.center;
  out.adj = inserted_adjacency(p, g, prompt.threshold);
  out.features = Matrix(g.num_nodes() + p.rows(), g.feature_dim());
  std::copy(g.features.values().begin(), g.features.values().end(), out.features.values().begin());
  std::copy(p.values().begin(), p.values().end(),
            out.features.values().begin() + static_cast<std::ptrdiff_t>(g.features.size()));
  if (!g.node_labels.empty()) {
    out.node_labels = g.node_labels;
    out.node_labels.resize(out.features.rows(), graph::kUnlabeled);
  }
  return out;
}

Tensor gprompt_readout(const Tensor& p, const Tensor& h) {
  require_width("gprompt vector", p.cols(), h.cols());
  return model::readout_mean(ad::mul_row(h, p));
}

Tensor prompted_embeddings(const PromptModule& prompt, const model::PretrainedEncoder& enc,
                           std::span<const Graph* const> graphs) {
  if (graphs.empty()) throw InvalidArgument("no graphs to embed");
  const auto weights = enc.constant_weights();
  const std::size_t d = enc.config().input_dim;
  for (const Graph* g : graphs) require_width("graph features", g->feature_dim(), d);

  switch (prompt.method) {
    case Method::gpf:
    case Method::gpfplus:
    case Method::gprompt: {
      auto u = union_of(graphs);
      const auto norm = model::normalized_adjacency(u.graph.adj);
      Tensor x = Tensor::constant(u.graph.features);
      if (prompt.method == Method::gpf) {
        require_width("gpf prompt", prompt.tokens.cols(), d);
        x = ad::add_row(x, prompt.tokens);
      } else if (prompt.method == Method::gpfplus) {
        require_width("gpf-plus basis", prompt.tokens.cols(), d);
        Tensor alpha = ad::softmax_rows(ad::matmul(x, ad::transpose(prompt.attention)));
        x = ad::add(x, ad::matmul(alpha, prompt.tokens));
      }
      Tensor h = model::gcn_forward(weights, norm, x);
      if (prompt.method == Method::gprompt) {
        require_width("gprompt vector", prompt.tokens.cols(), h.cols());
        h = ad::mul_row(h, prompt.tokens);
      }
      return ad::segment_mean(h, u.offsets);
    }
    case Method::allinone: {
      require_width("all-in-one tokens", prompt.tokens.cols(), d);
      const std::size_t k = prompt.tokens.rows();
      std::vector<Tensor> parts;
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      std::vector<std::size_t> offsets{0};
      for (const Graph* g : graphs) {
        const std::size_t base = offsets.back();
        auto adj = inserted_adjacency(prompt.tokens.value(), *g, prompt.threshold);
        for (const auto& e : adj.entries()) pairs.emplace_back(base + e.row, base + e.col);
        parts.push_back(Tensor::constant(g->features));
        parts.push_back(prompt.tokens);
        offsets.push_back(base + g->num_nodes() + k);
      }
      const auto adj = ad::SparseAdj::from_edges(offsets.back(), pairs, false);
      Tensor h = model::gcn_forward(weights, model::normalized_adjacency(adj), ad::vstack(parts));
      return ad::segment_mean(h, offsets);
    }
    case Method::gppt:
      break;
  }
  throw InvalidArgument("gppt has no graph-level prompted embedding");
}

Tensor prompted_embedding(const PromptModule& prompt, const model::PretrainedEncoder& enc,
                          const Graph& g) {
  const Graph* one[] = {&g};
  return prompted_embeddings(prompt, enc, one);
}

Tensor head_logits(const TaskHead& head, const Tensor& e) {
  switch (head.kind) {
    case HeadKind::linear:
      return ad::matmul(e, head.weight);
    case HeadKind::prototypes:
      if (head.prototypes.rows() != head.num_classes)
        throw InvalidArgument("prototype head is not initialized");
      return prototype_logits(e, Tensor::constant(head.prototypes), head.temperature);
    case HeadKind::task_tokens:
      if (!head.weight.defined() || head.groups.size() != head.num_classes)
        throw InvalidArgument("task tokens are not initialized");
      return ad::group_max_cols(ad::matmul(e, ad::transpose(head.weight)), head.groups);
  }
  throw InvalidArgument("unknown head kind");
}

Matrix class_scores(const TaskHead& head, const Matrix& e) {
  Tensor logits = head_logits(head, Tensor::constant(e));
  switch (head.kind) {
    case HeadKind::linear:
      return ad::softmax_rows(logits).value();
    case HeadKind::prototypes:
      return ad::scale(logits, head.temperature).value();
    case HeadKind::task_tokens:
      return ad::sigmoid(logits).value();
  }
  throw InvalidArgument("unknown head kind");
}

Matrix class_means(const Matrix& e, std::span<const std::size_t> labels, std::size_t num_classes) {
  if (labels.size() != e.rows()) throw DimensionError("class_means: label count differs from rows");
  return ad::matmul(Tensor::constant(averaging_matrix(labels, num_classes)), Tensor::constant(e)).value();
}

std::vector<std::size_t> nearest_center(const Matrix& points, const Matrix& centers) {
  require_width("kmeans centers", centers.cols(), points.cols());
  std::vector<std::size_t> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < points.cols(); ++j) {
        const double t = points(i, j) - centers(c, j);
        d2 += t * t;
      }
      if (d2 < best) {
        best = d2;
        out[i] = c;
      }
    }
  }
  return out;
}

Matrix kmeans(const Matrix& points, std::size_t k, Rng& rng, std::size_t max_iter) {
  if (points.rows() == 0) throw InvalidArgument("kmeans needs at least one point");
  if (k == 0) throw InvalidArgument("kmeans needs k >= 1");
  k = std::min(k, points.rows());
  auto order = permutation(points.rows(), rng);
  Matrix centers(k, points.cols());
  for (std::size_t c = 0; c < k; ++c)
    std::copy(points.row(order[c]).begin(), points.row(order[c]).end(), centers.row(c).begin());
  std::vector<std::size_t> assign;
  for (std::size_t it = 0; it < max_iter; ++it) {
    auto next = nearest_center(points, centers);
    if (next == assign) break;
    assign = std::move(next);
    Matrix sums(k, points.cols());
    std::vector<std::size_t> count(k);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      count[assign[i]]++;
      for (std::size_t j = 0; j < points.cols(); ++j) sums(assign[i], j) += points(i, j);
    }
    for (std::size_t c = 0; c < k; ++c)
      if (count[c] > 0)
        for (std::size_t j = 0; j < points.cols(); ++j)
          centers(c, j) = sums(c, j) / static_cast<double>(count[c]);
  }
  return centers;
}

std::size_t gppt_graph_vote(const Matrix& node_probs) {
  if (node_probs.rows() == 0) throw InvalidArgument("gppt vote over an empty graph");
  const std::size_t c = node_probs.cols();
  std::vector<std::size_t> votes(c);
  std::vector<double> mass(c);
  for (std::size_t v = 0; v < node_probs.rows(); ++v) {
    votes[argmax(node_probs.row(v))]++;
    for (std::size_t j = 0; j < c; ++j) mass[j] += node_probs(v, j);
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < c; ++j)
    if (votes[j] > votes[best] || (votes[j] == votes[best] && mass[j] > mass[best])) best = j;
  return best;
}

TunedPrompt tune_prompt(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                        const graph::KShotTask& task, const PromptRunConfig& cfg) {
  cfg.validate();
  if (!enc.frozen()) throw InvalidArgument("prompt tuning needs a frozen encoder");
  require_width("dataset features", ds.feature_dim(), enc.config().input_dim);
  if (task.support.empty()) throw InfeasibleError("empty support set");
  const std::size_t classes = ds.num_classes;
  const std::size_t hidden = enc.config().hidden_dim;
  Rng rng(derive_seed(cfg.seed, "prompt-init"));

  TunedPrompt out;
  out.prompt = init_prompt(cfg, enc.config().input_dim, hidden, rng);
  out.head.num_classes = classes;
  out.head.temperature = cfg.temperature;

  std::vector<std::size_t> labels;
  for (const auto& it : task.support) labels.push_back(it.label);

  // Per-method state built once.
  std::vector<Graph> units;
  GpptRows gppt;
  Matrix full;
  graph::Union support_union;
  ad::SparseAdj support_norm;
  Matrix support_h;
  Matrix averaging;

  switch (cfg.method) {
    case Method::gpf:
    case Method::gpfplus:
    case Method::allinone:
      out.head.kind = HeadKind::linear;
      out.head.weight = Tensor::parameter(model::glorot(hidden, classes, rng));
      units = make_units(ds, task.support, cfg.hops);
      break;
    case Method::gprompt: {
      out.head.kind = HeadKind::prototypes;
      units = make_units(ds, task.support, cfg.hops);
      support_union = union_of(pointers(units));
      support_norm = model::normalized_adjacency(support_union.graph.adj);
      support_h = enc.embed(support_union.graph);
      averaging = averaging_matrix(labels, classes);
      break;
    }
    case Method::gppt: {
      out.head.kind = HeadKind::task_tokens;
      if (ds.level == graph::TaskLevel::node) full = enc.embed(ds.graphs[0]);
      gppt = gppt_rows(enc, ds, task.support, &full);
      std::vector<Matrix> centers;
      std::size_t rows = 0;
      out.head.groups.resize(classes);
      for (std::size_t c = 0; c < classes; ++c) {
        std::vector<std::size_t> mine;
        for (std::size_t r = 0; r < gppt.labels.size(); ++r)
          if (gppt.labels[r] == c) mine.push_back(r);
        if (mine.empty()) throw InfeasibleError("class " + std::to_string(c) + " has no support items");
        Matrix pts(mine.size(), hidden);
        for (std::size_t i = 0; i < mine.size(); ++i)
          std::copy(gppt.z.row(mine[i]).begin(), gppt.z.row(mine[i]).end(), pts.row(i).begin());
        centers.push_back(kmeans(pts, cfg.centers_per_class, rng));
        for (std::size_t i = 0; i < centers.back().rows(); ++i) out.head.groups[c].push_back(rows++);
      }
      Matrix t(rows, hidden);
      std::size_t r = 0;
      for (const auto& m : centers)
        for (std::size_t i = 0; i < m.rows(); ++i, ++r)
          std::copy(m.row(i).begin(), m.row(i).end(), t.row(r).begin());
      out.head.weight = Tensor::parameter(std::move(t));
      break;
    }
  }

  auto params = out.prompt.parameters();
  for (const auto& p : out.head.parameters()) params.push_back(p);
  ad::Optimizer opt(params, {.kind = ad::OptimizerKind::adam,
                             .learning_rate = cfg.learning_rate,
                             .weight_decay = cfg.weight_decay});

  auto gprompt_embed = [&]() {
    return ad::segment_mean(ad::mul_row(Tensor::constant(support_h), out.prompt.tokens),
                            support_union.offsets);
  };

  auto batch_loss = [&](std::span<const std::size_t> idx) -> Tensor {
    switch (cfg.method) {
      case Method::gpf:
      case Method::gpfplus:
      case Method::allinone: {
        std::vector<const Graph*> gs;
        std::vector<std::size_t> ys;
        for (auto i : idx) {
          gs.push_back(&units[i]);
          ys.push_back(labels[i]);
        }
        return ad::softmax_cross_entropy(head_logits(out.head, prompted_embeddings(out.prompt, enc, gs)), ys);
      }
      case Method::gprompt: {
        Tensor e = gprompt_embed();
        Tensor protos = ad::matmul(Tensor::constant(averaging), e);
        return ad::softmax_cross_entropy(prototype_logits(e, protos, cfg.temperature), labels);
      }
      case Method::gppt:
        return ad::softmax_cross_entropy(head_logits(out.head, Tensor::constant(gppt.z)), gppt.labels);
    }
    throw InvalidArgument("unknown method");
  };

  const bool minibatch = ds.level == graph::TaskLevel::graph &&
                         cfg.method != Method::gprompt && cfg.method != Method::gppt;
  std::vector<std::size_t> order(task.support.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto e0 = std::chrono::steady_clock::now();
    if (cfg.method == Method::gppt && cfg.gppt_recluster) lloyd_step(out.head, gppt.z, gppt.labels);
    std::size_t step = minibatch ? cfg.batch_size : order.size();
    if (minibatch) {
      Rng erng(derive_seed(cfg.seed, epoch));
      shuffle(order, erng);
    }
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += step, ++batches) {
      const std::size_t hi = std::min(order.size(), lo + step);
      opt.zero_grad();
      Tensor loss;
      try {
        loss = batch_loss(std::span<const std::size_t>(order).subspan(lo, hi - lo));
      } catch (const NonFiniteError& e) {
        throw NonFiniteError(to_string(cfg.method) + " tuning diverged at epoch " +
                             std::to_string(epoch) + ": " + e.what());
      }
      total += loss.item();
      loss.backward();
      opt.step();
    }
    out.loss_trace.push_back(total / static_cast<double>(batches));
    out.epoch_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - e0).count());
  }

  if (cfg.method == Method::gprompt) out.head.prototypes = class_means(gprompt_embed().value(), labels, classes);
  return out;
}

Prediction predict(const TunedPrompt& tuned, const model::PretrainedEncoder& enc,
                   const graph::Dataset& ds, std::span<const graph::LabeledItem> items,
                   const PromptRunConfig& cfg) {
  Prediction out;
  if (items.empty()) return out;
  const auto method = tuned.prompt.method;
  if (method == Method::gppt) {
    Matrix full;
    if (ds.level == graph::TaskLevel::node) full = enc.embed(ds.graphs[0]);
    auto rows = gppt_rows(enc, ds, items, &full);
    Matrix probs = class_scores(tuned.head, rows.z);
    if (ds.level == graph::TaskLevel::node) {
      out.scores = std::move(probs);
      for (std::size_t i = 0; i < items.size(); ++i) out.labels.push_back(argmax(out.scores.row(i)));
      return out;
    }
    out.scores = Matrix(items.size(), tuned.head.num_classes);
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::size_t lo = rows.offsets[i], hi = rows.offsets[i + 1];
      Matrix node_probs(hi - lo, probs.cols());
      for (std::size_t r = lo; r < hi; ++r) {
        std::copy(probs.row(r).begin(), probs.row(r).end(), node_probs.row(r - lo).begin());
        for (std::size_t j = 0; j < probs.cols(); ++j)
          out.scores(i, j) += probs(r, j) / static_cast<double>(hi - lo);
      }
      out.labels.push_back(gppt_graph_vote(node_probs));
    }
    return out;
  }
  auto units = make_units(ds, items, cfg.hops);
  const Matrix e = prompted_embeddings(tuned.prompt, enc, pointers(units)).value();
  out.scores = class_scores(tuned.head, e);
  for (std::size_t i = 0; i < items.size(); ++i) out.labels.push_back(argmax(out.scores.row(i)));
  return out;
}

std::size_t tunable_params(const TunedPrompt& tuned) {
  auto params = tuned.prompt.parameters();
  for (const auto& p : tuned.head.parameters()) params.push_back(p);
  return model::param_count(params);
}

}  // namespace gpb::prompt
