#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gpb::eval {

// Exponent bounds are stored as written; normalized() orders each pair, so
// the published weight-decay range 10^uniform(-5,-6) reads as [1e-6, 1e-5].
struct SearchSpace {
  double log_lr_lo = -3.0;
  double log_lr_hi = -1.0;
  double log_wd_lo = -5.0;
  double log_wd_hi = -6.0;
  std::vector<std::size_t> batch_sizes{32, 64, 128};

  SearchSpace normalized() const;
  void validate() const;
};

struct TrialConfig {
  double learning_rate = 0.0;
  double weight_decay = 0.0;
  std::size_t batch_size = 0;

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

struct Trial {
  std::size_t index = 0;
  TrialConfig config;
  std::optional<double> score;  // empty when the objective threw
  std::string error;
};

struct SearchResult {
  std::size_t best_index = 0;
  TrialConfig best;
  double best_score = 0.0;
  std::vector<Trial> trials;
};

std::vector<TrialConfig> sample_trials(const SearchSpace& space, std::size_t trials, std::uint64_t seed);

// Maximizes objective over sampled configs. Ties keep the earliest trial;
// trials whose objective throws are recorded and skipped. Throws when every
// trial fails.
SearchResult random_search(const SearchSpace& space,
                           const std::function<double(const TrialConfig&)>& objective,
                           std::size_t trials, std::uint64_t seed);

}  // namespace gpb::eval
