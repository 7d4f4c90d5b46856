#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpb/graph/graph.hpp"
#include "gpb/graph/transform.hpp"
#include "gpb/model/gcn.hpp"
#include "gpb/prompt/prompt.hpp"

namespace gpb::probe {

using ad::Matrix;
using ad::Tensor;
using graph::Graph;

// Euclidean distance between mean-pooled embeddings.
double embed_distance(const model::PretrainedEncoder& enc, const Graph& a, const Graph& b);

struct FitConfig {
  std::size_t epochs = 500;
  double learning_rate = 0.05;
  std::size_t num_tokens = 10;   // All-in-one
  std::size_t basis_count = 10;  // GPF-plus
  double link_threshold = 0.5;
  std::uint64_t seed = 0;
  void validate() const;
};

struct FitResult {
  double initial_error = 0.0;
  double final_error = 0.0;  // best distance seen, never above initial_error
  std::size_t best_epoch = 0;
  std::vector<double> error_trace;  // distance before each update
};

// Minimizes ‖pooled ψ*(prompt(g)) − target‖² over the prompt's parameters.
FitResult fit_prompt_to_target(prompt::Method method, const model::PretrainedEncoder& enc,
                               const Graph& g, const Matrix& target, const FitConfig& cfg);

struct FlexibilityConfig {
  std::vector<graph::ManipulationKind> manipulations{graph::ManipulationKind::drop_nodes,
                                                    graph::ManipulationKind::drop_edges,
                                                    graph::ManipulationKind::mask_features};
  std::vector<prompt::Method> methods{prompt::Method::allinone, prompt::Method::gprompt,
                                      prompt::Method::gpfplus, prompt::Method::gpf};
  double fraction = 0.1;
  FitConfig fit;
  std::uint64_t seed = 0;
  void validate() const;
};

struct ManipulationRow {
  graph::ManipulationKind kind;
  double ori_error = 0.0;
  bool skipped = false;  // ori_error is 0, nothing to restore
};

struct FitRow {
  prompt::Method method;
  graph::ManipulationKind kind;
  double final_error = 0.0;
};

struct MethodRed {
  prompt::Method method;
  double red_percent = 0.0;
};

struct ErrorBoundReport {
  std::vector<ManipulationRow> manipulations;
  std::vector<FitRow> fits;
  std::vector<MethodRed> red;

  double ori_error(graph::ManipulationKind kind) const;
  double final_error(prompt::Method method, graph::ManipulationKind kind) const;
  double red_percent(prompt::Method method) const;
};

// 100·(1 − mean(final)/mean(ori)) over the non-skipped manipulations.
double red_percent(std::span<const double> ori, std::span<const double> final);

ErrorBoundReport run_flexibility(const model::PretrainedEncoder& enc, const Graph& g,
                                 const FlexibilityConfig& cfg);

// Columns manipulation,ori_error,method,final_error,red_percent.
void write_csv(std::ostream& out, const ErrorBoundReport& report);

// Seeded 30-node three-community graph used by the probe.
Graph probe_graph(std::uint64_t seed);

}  // namespace gpb::probe
