#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpb/ad/tensor.hpp"
#include "gpb/graph/graph.hpp"
#include "gpb/graph/sampler.hpp"
#include "gpb/model/gcn.hpp"

namespace gpb::prompt {

using ad::Matrix;
using ad::Tensor;
using graph::Graph;

enum class Method { gppt, gprompt, allinone, gpf, gpfplus };

std::string to_string(Method m);
Method parse_method(const std::string& s);
const std::vector<Method>& all_methods();

struct PromptRunConfig {
  Method method = Method::gpf;
  std::size_t num_tokens = 10;      // All-in-one K
  std::size_t basis_count = 10;     // GPF-plus basis vectors
  double link_threshold = 0.5;      // All-in-one δ
  std::size_t hops = 2;             // node tasks become subgraph tasks
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  std::size_t batch_size = 32;      // graphs per step on graph-level tasks
  double temperature = 0.1;         // Gprompt prototype logits
  std::size_t centers_per_class = 1;  // GPPT task tokens per class
  bool gppt_recluster = false;      // Lloyd step on the task tokens every epoch
  std::uint64_t seed = 0;

  void validate() const;
};

// Learnable part of P(·). Which fields are live depends on the method:
//   gpf       tokens 1×d, added to every node
//   gpfplus   tokens K×d basis, attention K×d
//   allinone  tokens K×d, linked by thresholded dot products
//   gprompt   tokens 1×D, multiplied into the readout
//   gppt      none; its task tokens live in the head
struct PromptModule {
  Method method = Method::gpf;
  Tensor tokens;
  Tensor attention;
  double threshold = 0.5;

  std::size_t num_tokens() const { return tokens.defined() ? tokens.rows() : 0; }
  std::vector<Tensor> parameters() const;
};

PromptModule init_prompt(const PromptRunConfig& cfg, std::size_t d, std::size_t hidden, Rng& rng);

enum class HeadKind { linear, prototypes, task_tokens };
std::string to_string(HeadKind k);

struct TaskHead {
  HeadKind kind = HeadKind::linear;
  std::size_t num_classes = 0;
  Tensor weight;      // linear D×C, or task tokens (C·m)×D
  Matrix prototypes;  // C×D class means of support embeddings
  std::vector<std::vector<std::size_t>> groups;  // task-token rows per class
  double temperature = 0.1;

  std::vector<Tensor> parameters() const;
};

// ---- unified-view operations on values ----

// X' = X + 1·pᵀ.
Graph gpf_apply(const PromptModule& prompt, const Graph& g);
// α = softmax_rows(X·Aᵀ); X' = X + α·B.
Matrix gpfplus_attention(const PromptModule& prompt, const Matrix& x);
Graph gpfplus_apply(const PromptModule& prompt, const Graph& g);
// N+K nodes: features [X; P], original edges kept, inner links where
// sigmoid(pᵢ·pⱼ) > δ, cross links where sigmoid(pᵢ·x_v) > δ.
Graph allinone_insert(const PromptModule& prompt, const Graph& g);
// mean over nodes of p ⊙ h_v.
Tensor gprompt_readout(const Tensor& p, const Tensor& h);

// ---- differentiable prompted embeddings through a frozen encoder ----

// One row per graph (1×D each). Not defined for GPPT.
Tensor prompted_embeddings(const PromptModule& prompt, const model::PretrainedEncoder& enc,
                           std::span<const Graph* const> graphs);
Tensor prompted_embedding(const PromptModule& prompt, const model::PretrainedEncoder& enc,
                          const Graph& g);

// ---- heads ----

// Logits: linear e·W; prototypes cos(e, proto_c)/τ; task tokens max over the
// class's tokens of e·t.
Tensor head_logits(const TaskHead& head, const Tensor& e);
// Row-wise class scores: softmax for linear, cosine for prototypes, sigmoid of
// the best token dot for task tokens.
Matrix class_scores(const TaskHead& head, const Matrix& e);

// Per-class means. Throws InvalidArgument when a class has no rows.
Matrix class_means(const Matrix& e, std::span<const std::size_t> labels, std::size_t num_classes);

// Lloyd's algorithm with deterministic Forgy initialization; k is clamped to
// the point count.
Matrix kmeans(const Matrix& points, std::size_t k, Rng& rng, std::size_t max_iter = 100);
std::vector<std::size_t> nearest_center(const Matrix& points, const Matrix& centers);

// GPPT graph adaptation: per-node argmax of the link probabilities, majority
// vote, ties broken by summed probability then lowest class index.
std::size_t gppt_graph_vote(const Matrix& node_probs);

// ---- tuning ----

struct TunedPrompt {
  PromptModule prompt;
  TaskHead head;
  std::vector<double> loss_trace;  // mean loss per epoch
  std::vector<double> epoch_ms;
};

// Trains prompt and head on the support set against a frozen encoder. Node
// tasks use induced subgraphs for every method except GPPT.
TunedPrompt tune_prompt(const model::PretrainedEncoder& enc, const graph::Dataset& ds,
                        const graph::KShotTask& task, const PromptRunConfig& cfg);

struct Prediction {
  std::vector<std::size_t> labels;
  Matrix scores;  // items × classes
};

Prediction predict(const TunedPrompt& tuned, const model::PretrainedEncoder& enc,
                   const graph::Dataset& ds, std::span<const graph::LabeledItem> items,
                   const PromptRunConfig& cfg);

// Prompt plus head scalars that receive gradients.
std::size_t tunable_params(const TunedPrompt& tuned);

}  // namespace gpb::prompt
