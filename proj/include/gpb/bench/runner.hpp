#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gpb/bench/config.hpp"
#include "gpb/eval/harness.hpp"

namespace gpb::bench {

struct EfficiencyReport {
  std::size_t tunable_params = 0;
  std::size_t epochs_run = 0;
  double total_ms = 0.0;
  std::vector<double> epoch_ms;
  double mean_epoch_ms() const;
};

// Times run() on a monotonic clock and copies its counts.
EfficiencyReport profile_run(const std::function<eval::SeedRun()>& run, eval::SeedRun* out = nullptr);

// One line of results.csv.
struct ResultRow {
  std::string method;
  std::string pretext;
  std::string dataset;
  std::string level;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double macro_auroc = 0.0;
  std::size_t tunable_params = 0;
  double wall_ms = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* kResultHeader =
    "method,pretext,dataset,level,k,seed,accuracy,macro_f1,macro_auroc,tunable_params,wall_ms";
std::string to_csv(const ResultRow& row);
ResultRow parse_result_row(const std::string& line);

// GPB_WORKERS, default 1. Throws ConfigError on a malformed value.
std::size_t workers_from_env();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Rethrows the
// exception of the lowest failing index after every job has finished.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<eval::MetricReport> reports;
};

// Output layout under cfg.output_dir:
//   config.json, encoders/<pretext>.gpbckpt,
//   runs/<index>_<method>_<pretext>_s<i>/{row.csv, run.json},
//   results.csv and summary.json (rendered from the run directories).
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t workers);

struct SearchOutcome {
  std::string method;
  std::string pretext;
  eval::SearchResult result;
};

// Random search per (method, pretext) on validation splits of the configured
// tasks. Score is the mean validation accuracy over those tasks.
std::vector<SearchOutcome> run_search(const ExperimentConfig& cfg, std::size_t workers);

}  // namespace gpb::bench
