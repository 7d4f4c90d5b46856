#include "gpb/eval/search.hpp"

#include <cmath>
#include <utility>

#include "gpb/error.hpp"
#include "gpb/random.hpp"

namespace gpb::eval {

SearchSpace SearchSpace::normalized() const {
  SearchSpace s = *this;
  if (s.log_lr_lo > s.log_lr_hi) std::swap(s.log_lr_lo, s.log_lr_hi);
  if (s.log_wd_lo > s.log_wd_hi) std::swap(s.log_wd_lo, s.log_wd_hi);
  return s;
}

void SearchSpace::validate() const {
  for (double v : {log_lr_lo, log_lr_hi, log_wd_lo, log_wd_hi})
    if (!std::isfinite(v)) throw ConfigError("search bounds must be finite");
  if (batch_sizes.empty()) throw ConfigError("search needs at least one batch size");
  for (auto b : batch_sizes)
    if (b == 0) throw ConfigError("batch sizes must be >= 1");
}

std::vector<TrialConfig> sample_trials(const SearchSpace& space, std::size_t trials, std::uint64_t seed) {
  space.validate();
  const SearchSpace s = space.normalized();
  Rng rng(derive_seed(seed, "search"));
  std::vector<TrialConfig> out;
  for (std::size_t i = 0; i < trials; ++i) {
    TrialConfig t;
    t.learning_rate = std::pow(10.0, s.log_lr_lo + (s.log_lr_hi - s.log_lr_lo) * uniform01(rng));
    t.weight_decay = std::pow(10.0, s.log_wd_lo + (s.log_wd_hi - s.log_wd_lo) * uniform01(rng));
    t.batch_size = s.batch_sizes[uniform_index(rng, s.batch_sizes.size())];
    out.push_back(t);
  }
  return out;
}

SearchResult random_search(const SearchSpace& space,
                           const std::function<double(const TrialConfig&)>& objective,
                           std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw InvalidArgument("random_search needs at least one trial");
  SearchResult result;
  bool found = false;
  const auto configs = sample_trials(space, trials, seed);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    Trial t{.index = i, .config = configs[i], .score = std::nullopt, .error = {}};
    try {
      t.score = objective(configs[i]);
    } catch (const std::exception& e) {
      t.error = e.what();
    }
    if (t.score && !std::isnan(*t.score) && (!found || *t.score > result.best_score)) {
      found = true;
      result.best_index = i;
      result.best = configs[i];
      result.best_score = *t.score;
    }
    result.trials.push_back(std::move(t));
  }
  if (!found) throw Error("random_search: every trial failed");
  return result;
}

}  // namespace gpb::eval
