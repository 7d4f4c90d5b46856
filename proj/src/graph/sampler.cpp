#include "gpb/graph/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpb/error.hpp"
#include "gpb/random.hpp"

namespace gpb::graph {

std::vector<LabeledItem> labeled_items(const Dataset& ds) {
  std::vector<LabeledItem> items;
  if (ds.level == TaskLevel::node) {
    const auto& labels = ds.graphs.front().node_labels;
    for (std::size_t u = 0; u < labels.size(); ++u)
      if (labels[u] != kUnlabeled) items.push_back({u, static_cast<std::size_t>(labels[u])});
  } else {
    for (std::size_t i = 0; i < ds.graphs.size(); ++i)
      items.push_back({i, static_cast<std::size_t>(*ds.graphs[i].graph_label)});
  }
  return items;
}

KShotTask sample_kshot(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  const auto items = labeled_items(ds);
  const std::size_t n = items.size();
  const double frac = ds.level == TaskLevel::node ? kNodeTestFraction : kGraphTestFraction;
  const auto test_size = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n)));
  const std::size_t residual = n - test_size;

  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < n; ++i) by_class[items[i].label].push_back(i);
  for (std::size_t c = 0; c < ds.num_classes; ++c)
    if (by_class[c].size() < k)
      throw InfeasibleError("class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " items, fewer than k=" +
                            std::to_string(k));
  if (residual < k * ds.num_classes)
    throw InfeasibleError("class " + std::to_string(residual / k) +
                          " cannot receive k=" + std::to_string(k) +
                          " items: the pool outside the test set holds only " +
                          std::to_string(residual) + " items");

  Rng rng(seed);
  std::vector<char> taken(n, 0);
  KShotTask task;
  task.level = ds.level;
  task.k = k;
  task.num_classes = ds.num_classes;
  task.seed = seed;
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    auto pool = by_class[c];
    shuffle(pool, rng);
    for (std::size_t i = 0; i < k; ++i) {
      taken[pool[i]] = 1;
      task.support.push_back(items[pool[i]]);
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i)
    if (!taken[i]) rest.push_back(i);
  shuffle(rest, rng);
  // The first residual − k·|C| of the shuffled rest stay outside the test pool.
  const std::size_t spare = residual - k * ds.num_classes;
  std::vector<std::size_t> query_idx(rest.begin() + static_cast<std::ptrdiff_t>(spare), rest.end());
  std::sort(query_idx.begin(), query_idx.end());
  for (std::size_t i : query_idx) task.query.push_back(items[i]);
  return task;
}

}  // namespace gpb::graph
