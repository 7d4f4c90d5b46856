#include "gpb/eval/harness.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

#include "gpb/ad/losses.hpp"
#include "gpb/ad/ops.hpp"
#include "gpb/ad/optim.hpp"
#include "gpb/error.hpp"
#include "gpb/random.hpp"

namespace gpb::eval {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

void score(SeedRun& run, const ad::Matrix& scores, std::span<const graph::LabeledItem> query,
           std::size_t num_classes) {
  std::vector<std::size_t> preds, labels;
  for (std::size_t i = 0; i < query.size(); ++i) {
    preds.push_back(argmax(scores.row(i)));
    labels.push_back(query[i].label);
  }
  run.accuracy = accuracy(preds, labels);
  run.macro_f1 = macro_f1(preds, labels, num_classes);
  auto auc = macro_auroc(scores, labels, num_classes);
  run.macro_auroc = auc.value;
  run.auroc_skipped = std::move(auc.skipped);
}

// GCN + linear head trained end to end on the support set.
SeedRun train_gcn(std::vector<ad::Tensor> weights, const graph::Dataset& ds,
                  const graph::KShotTask& task, const TrainConfig& cfg, Rng& rng) {
  const auto t0 = Clock::now();
  const std::size_t hidden = weights.back().cols();
  auto head = ad::Tensor::parameter(model::glorot(hidden, ds.num_classes, rng));
  auto params = weights;
  params.push_back(head);
  ad::Optimizer opt(params, {.kind = ad::OptimizerKind::adam,
                             .learning_rate = cfg.learning_rate,
                             .weight_decay = cfg.weight_decay});

  SeedRun run;
  run.seed = task.seed;
  run.tunable_params = model::param_count(params);

  const bool node = ds.level == graph::TaskLevel::node;
  ad::SparseAdj norm;
  ad::Tensor x;
  if (node) {
    norm = model::normalized_adjacency(ds.graphs[0].adj);
    x = ad::Tensor::constant(ds.graphs[0].features);
  }

  // Logits for items, in item order.
  auto logits = [&](std::span<const graph::LabeledItem> items) {
    std::vector<std::size_t> ids;
    for (const auto& it : items) ids.push_back(it.id);
    if (node) return ad::matmul(ad::gather_rows(model::gcn_forward(weights, norm, x), ids), head);
    std::vector<const graph::Graph*> gs;
    for (auto id : ids) gs.push_back(&ds.graphs[id]);
    auto u = graph::disjoint_union(gs);
    auto h = model::gcn_forward(weights, model::normalized_adjacency(u.graph.adj),
                                ad::Tensor::constant(u.graph.features));
    return ad::matmul(ad::segment_mean(h, u.offsets), head);
  };

  std::vector<graph::LabeledItem> order = task.support;
  const std::size_t step = node ? order.size() : cfg.batch_size;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto e0 = Clock::now();
    if (!node) {
      Rng erng(derive_seed(cfg.seed, derive_seed(task.seed, epoch)));
      shuffle(order, erng);
    }
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += step, ++batches) {
      std::span<const graph::LabeledItem> batch(order.data() + lo, std::min(step, order.size() - lo));
      std::vector<std::size_t> ys;
      for (const auto& it : batch) ys.push_back(it.label);
      opt.zero_grad();
      auto loss = ad::softmax_cross_entropy(logits(batch), ys);
      total += loss.item();
      loss.backward();
      opt.step();
    }
    const double mean_loss = total / static_cast<double>(batches);
    run.loss_trace.push_back(mean_loss);
    run.epoch_ms.push_back(ms_since(e0));
    run.epochs_run = epoch + 1;
    if (mean_loss < best) {
      best = mean_loss;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }

  auto scores = ad::softmax_rows(logits(task.query)).value();
  score(run, scores, task.query, ds.num_classes);
  run.wall_ms = ms_since(t0);
  return run;
}

MetricReport make_report(std::string method, std::string pretext, const graph::Dataset& ds,
                         std::span<const graph::KShotTask> tasks) {
  if (tasks.empty()) throw InvalidArgument("a report needs at least one task");
  MetricReport r;
  r.method = std::move(method);
  r.pretext = std::move(pretext);
  r.dataset = ds.name;
  r.level = ds.level;
  r.k = tasks.front().k;
  return r;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
}

void MetricReport::aggregate() {
  std::vector<double> acc, f1, auc;
  for (const auto& r : runs) {
    acc.push_back(r.accuracy);
    f1.push_back(r.macro_f1);
    auc.push_back(r.macro_auroc);
  }
  accuracy = summarize(acc);
  macro_f1 = summarize(f1);
  macro_auroc = summarize(auc);
}

std::vector<graph::KShotTask> make_tasks(const graph::Dataset& ds, std::size_t k,
                                         std::uint64_t root_seed, std::size_t count) {
  std::vector<graph::KShotTask> tasks;
  for (std::size_t i = 0; i < count; ++i)
    tasks.push_back(graph::sample_kshot(ds, k, derive_seed(root_seed, i)));
  return tasks;
}

SeedRun evaluate_supervised(const graph::Dataset& ds, const graph::KShotTask& task,
                            const TrainConfig& cfg) {
  cfg.validate();
  auto backbone = cfg.backbone;
  if (backbone.input_dim == 0) backbone.input_dim = ds.feature_dim();
  backbone.validate();
  Rng rng(derive_seed(cfg.seed, derive_seed(task.seed, "supervised")));
  std::vector<ad::Tensor> weights;
  for (auto& w : model::init_gcn_weights(backbone, rng)) weights.push_back(ad::Tensor::parameter(std::move(w)));
  return train_gcn(std::move(weights), ds, task, cfg, rng);
}

SeedRun evaluate_finetune(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                          const graph::KShotTask& task, const TrainConfig& cfg) {
  cfg.validate();
  if (enc.config().input_dim != ds.feature_dim())
    throw DimensionError("encoder input_dim does not match the dataset");
  Rng rng(derive_seed(cfg.seed, derive_seed(task.seed, "finetune")));
  return train_gcn(enc.trainable_copy(), ds, task, cfg, rng);
}

SeedRun evaluate_prompt(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                        const graph::KShotTask& task, const prompt::PromptRunConfig& cfg) {
  const auto t0 = Clock::now();
  auto run_cfg = cfg;
  run_cfg.seed = derive_seed(cfg.seed, task.seed);
  auto tuned = prompt::tune_prompt(enc, ds, task, run_cfg);
  SeedRun run;
  run.seed = task.seed;
  run.tunable_params = prompt::tunable_params(tuned);
  run.loss_trace = tuned.loss_trace;
  run.epoch_ms = tuned.epoch_ms;
  run.epochs_run = tuned.loss_trace.size();
  auto pred = prompt::predict(tuned, enc, ds, task.query, run_cfg);
  score(run, pred.scores, task.query, ds.num_classes);
  run.wall_ms = ms_since(t0);
  return run;
}

MetricReport run_supervised(const graph::Dataset& ds, std::span<const graph::KShotTask> tasks,
                            const TrainConfig& cfg) {
  auto r = make_report("supervised", "none", ds, tasks);
  for (const auto& t : tasks) r.runs.push_back(evaluate_supervised(ds, t, cfg));
  r.aggregate();
  return r;
}

MetricReport run_finetune(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                          std::span<const graph::KShotTask> tasks, const TrainConfig& cfg) {
  auto r = make_report("finetune", enc.pretext(), ds, tasks);
  for (const auto& t : tasks) r.runs.push_back(evaluate_finetune(enc, ds, t, cfg));
  r.aggregate();
  return r;
}

MetricReport run_prompt(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                        std::span<const graph::KShotTask> tasks, const prompt::PromptRunConfig& cfg) {
  auto r = make_report(prompt::to_string(cfg.method), enc.pretext(), ds, tasks);
  for (const auto& t : tasks) r.runs.push_back(evaluate_prompt(enc, ds, t, cfg));
  r.aggregate();
  return r;
}

ValidationSplit validation_split(const graph::KShotTask& task) {
  ValidationSplit s;
  s.train = task;
  if (task.k < 2) {
    s.validation = task.support;
    return s;
  }
  s.train.support.clear();
  s.train.k = task.k - 1;
  std::vector<bool> held(task.num_classes, false);
  for (const auto& it : task.support) {
    if (!held[it.label]) {
      held[it.label] = true;
      s.validation.push_back(it);
    } else {
      s.train.support.push_back(it);
    }
  }
  return s;
}

}  // namespace gpb::eval
