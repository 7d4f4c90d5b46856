#pragma once

#include <cstdint>
#include <vector>

#include "gpb/graph/graph.hpp"

namespace gpb::graph {

struct LabeledItem {
  std::size_t id;  // node id (node level) or graph index (graph level)
  std::size_t label;

  friend bool operator==(const LabeledItem&, const LabeledItem&) = default;
};

// Exactly k support items per class; the query set is the held-out test pool.
struct KShotTask {
  TaskLevel level = TaskLevel::node;
  std::size_t k = 0;
  std::size_t num_classes = 0;
  std::vector<LabeledItem> support;
  std::vector<LabeledItem> query;
  std::uint64_t seed = 0;

  friend bool operator==(const KShotTask&, const KShotTask&) = default;
};

inline constexpr double kNodeTestFraction = 0.9;
inline constexpr double kGraphTestFraction = 0.8;

// Test pool of ⌊0.9·N⌋ labeled nodes (node level) or ⌊0.8·G⌋ graphs (graph
// level). The remaining pool always contains k items of every class when the
// data allows it: k per class are reserved first, the rest of the residual is
// filled at random, and the support is the reserved items. Throws
// InfeasibleError naming the class that cannot supply k items.
KShotTask sample_kshot(const Dataset& ds, std::size_t k, std::uint64_t seed);

// Items eligible for sampling: labeled nodes of the single graph, or all graphs.
std::vector<LabeledItem> labeled_items(const Dataset& ds);

}  // namespace gpb::graph
