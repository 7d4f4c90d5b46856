#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpb/eval/metrics.hpp"
#include "gpb/graph/sampler.hpp"
#include "gpb/model/gcn.hpp"
#include "gpb/prompt/prompt.hpp"

namespace gpb::eval {

// Training schedule for the supervised and fine-tune baselines.
struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t patience = 50;  // stop after this many epochs without a lower loss; 0 disables
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  std::size_t batch_size = 32;     // graphs per step on graph-level tasks
  model::BackboneConfig backbone;  // supervised only; input_dim 0 takes the data's width
  std::uint64_t seed = 0;

  void validate() const;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double macro_auroc = 0.0;
  std::vector<std::size_t> auroc_skipped;
  std::size_t tunable_params = 0;
  std::size_t epochs_run = 0;
  double wall_ms = 0.0;
  std::vector<double> epoch_ms;
  std::vector<double> loss_trace;
};

struct MetricReport {
  std::string method;
  std::string pretext;  // "none" for the supervised baseline
  std::string dataset;
  graph::TaskLevel level = graph::TaskLevel::node;
  std::size_t k = 0;
  std::vector<SeedRun> runs;
  Stat accuracy, macro_f1, macro_auroc;

  // Recomputes the mean/std fields from runs.
  void aggregate();
};

// count tasks with seeds derive_seed(root_seed, i).
std::vector<graph::KShotTask> make_tasks(const graph::Dataset& ds, std::size_t k,
                                         std::uint64_t root_seed, std::size_t count = 5);

SeedRun evaluate_supervised(const graph::Dataset& ds, const graph::KShotTask& task,
                            const TrainConfig& cfg);
// Trains a copy of enc; enc itself is never touched.
SeedRun evaluate_finetune(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                          const graph::KShotTask& task, const TrainConfig& cfg);
SeedRun evaluate_prompt(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                        const graph::KShotTask& task, const prompt::PromptRunConfig& cfg);

MetricReport run_supervised(const graph::Dataset& ds, std::span<const graph::KShotTask> tasks,
                            const TrainConfig& cfg);
MetricReport run_finetune(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                          std::span<const graph::KShotTask> tasks, const TrainConfig& cfg);
MetricReport run_prompt(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                        std::span<const graph::KShotTask> tasks, const prompt::PromptRunConfig& cfg);

// Random-search validation split: one support item per class moves to the
// validation set when k >= 2; at k = 1 the support doubles as validation.
struct ValidationSplit {
  graph::KShotTask train;
  std::vector<graph::LabeledItem> validation;
};
ValidationSplit validation_split(const graph::KShotTask& task);

}  // namespace gpb::eval
