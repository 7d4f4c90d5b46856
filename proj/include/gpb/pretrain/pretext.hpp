#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gpb/ad/tensor.hpp"
#include "gpb/graph/graph.hpp"
#include "gpb/graph/transform.hpp"
#include "gpb/model/gcn.hpp"

namespace gpb::pretrain {

using ad::Matrix;
using ad::Tensor;

enum class Pretext { dgi, graphmae, edge_gppt, edge_gprompt, graphcl, simgrace };

std::string to_string(Pretext p);
Pretext parse_pretext(const std::string& s);
const std::vector<Pretext>& all_pretexts();

// GraphCL and SimGRACE contrast whole graphs; the rest work on nodes or edges.
bool is_graph_level(Pretext p);

struct PretextConfig {
  Pretext method = Pretext::dgi;
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  double temperature = 0.5;     // τ, contrastive objectives
  double mask_rate = 0.5;       // ρ, GraphMAE
  double cosine_power = 2.0;    // γ, GraphMAE
  double perturb_scale = 0.1;   // η, SimGRACE
  std::vector<graph::ManipulationKind> augmentations{graph::ManipulationKind::drop_edges,
                                                     graph::ManipulationKind::mask_features};
  double augment_rate = 0.2;
  std::size_t neg_ratio = 1;    // negatives per positive edge
  std::size_t hops = 2;         // context subgraphs
  std::size_t batch_size = 32;  // graphs, subgraphs or anchors per step
  std::uint64_t seed = 0;
  model::BackboneConfig backbone;  // input_dim 0 takes the dataset's width

  void validate() const;
};

// Everything random about one optimization step. Drawn once, then the loss is
// a deterministic function of the parameters.
struct PretextBatch {
  graph::Graph graph;                // graph to encode (a disjoint union for batches)
  std::vector<std::size_t> offsets;  // segment boundaries within `graph`
  ad::SparseAdj norm;
  graph::Graph view;                 // GraphCL second view
  ad::SparseAdj view_norm;
  std::vector<std::size_t> view_offsets;
  std::vector<std::size_t> corruption;  // DGI feature-row permutation
  std::vector<std::size_t> masked;      // GraphMAE masked nodes
  std::vector<std::pair<std::size_t, std::size_t>> positives;  // edge pretexts
  std::vector<std::pair<std::size_t, std::size_t>> negatives;
  std::vector<Matrix> perturbed;        // SimGRACE second encoder
};

// Mean logistic loss with positives labelled 1 and negatives 0. Serves the DGI
// discriminator and edge prediction.
Tensor binary_discrimination(const Tensor& pos_logits, const Tensor& neg_logits);

// NT-Xent over 2B views. Row i of z1 and row i of z2 are positives; every other
// row is a negative. Averaged over all 2B anchors.
Tensor nt_xent(const Tensor& z1, const Tensor& z2, double tau);

// −log softmax([cos(s_v, s_a), cos(s_v, s_b)] / τ)[0], averaged over rows.
Tensor triplet_context_loss(const Tensor& sv, const Tensor& sa, const Tensor& sb, double tau);

// Uniform non-adjacent ordered pairs (u ≠ v). Throws InfeasibleError when the
// graph is complete.
std::vector<std::pair<std::size_t, std::size_t>> sample_non_edges(const ad::SparseAdj& adj,
                                                                  std::size_t count, Rng& rng);

// Holds the encoder plus the pretext-specific extras (DGI bilinear weight,
// GraphMAE mask token and decoder, projection head).
class Pretrainer {
 public:
  Pretrainer(PretextConfig config, const graph::Dataset& ds);

  const PretextConfig& config() const { return config_; }
  const std::vector<Tensor>& encoder() const { return encoder_; }
  const std::vector<Tensor>& extras() const { return extras_; }
  std::vector<Tensor> parameters() const;

  PretextBatch draw(std::uint64_t step_seed) const;
  Tensor loss(const PretextBatch& batch) const;

  model::PretrainedEncoder snapshot() const;

 private:
  Tensor encode(const std::vector<Tensor>& weights, const graph::Graph& g,
                const ad::SparseAdj& norm) const;
  Tensor project(const Tensor& z) const;
  graph::Graph sample_graph_batch(Rng& rng, std::vector<std::size_t>& offsets) const;
  std::vector<graph::Graph> sample_units(Rng& rng) const;
  graph::Graph augment(const graph::Graph& g, Rng& rng) const;

  PretextConfig config_;
  const graph::Dataset* ds_;
  std::vector<Tensor> encoder_;
  std::vector<Tensor> extras_;
};

struct PretrainResult {
  model::PretrainedEncoder encoder;
  std::vector<double> loss_trace;  // one entry per epoch
};

// Adam over encoder + extras, one sampled batch per epoch. Extras are dropped
// at the end; the result is the frozen encoder.
PretrainResult run_pretraining(const PretextConfig& config, const graph::Dataset& ds);

}  // namespace gpb::pretrain
