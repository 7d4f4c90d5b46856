#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpb/ad/ops.hpp"
#include "gpb/graph/graph.hpp"
#include "gpb/random.hpp"

namespace gpb::model {

using ad::Matrix;
using ad::SparseAdj;
using ad::Tensor;

// GCN layers carry no bias terms, so the trainable-scalar count is exactly
// d·D + D²·(L−1).
struct BackboneConfig {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 128;
  std::size_t num_layers = 2;
  bool with_projection_head = false;

  void validate() const;
  // Shape of layer l: (l == 0 ? d : D) × D.
  std::pair<std::size_t, std::size_t> layer_shape(std::size_t layer) const;

  friend bool operator==(const BackboneConfig&, const BackboneConfig&) = default;
};

// Ŝ = D̂^{-1/2}(A + I)D̂^{-1/2}, D̂ the degree matrix of A + I.
SparseAdj normalized_adjacency(const SparseAdj& adj);

// Glorot-uniform initial weights.
std::vector<Matrix> init_gcn_weights(const BackboneConfig& config, Rng& rng);
Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng);

// H⁰ = X; H^{l+1} = ReLU(Ŝ H^l W^l); the last layer stays linear.
Tensor gcn_forward(std::span<const Tensor> weights, const SparseAdj& norm_adj, const Tensor& x);

// Column means of node embeddings (1×D). Throws on an empty graph.
Tensor readout_mean(const Tensor& h);

// A pre-trained GCN ψ*. Immutable: the only way to train from it is
// trainable_copy(), which hands out fresh leaves.
class PretrainedEncoder {
 public:
  PretrainedEncoder() = default;
  PretrainedEncoder(BackboneConfig config, std::vector<Matrix> weights, std::string pretext);

  const BackboneConfig& config() const { return config_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::string& pretext() const { return pretext_; }
  bool frozen() const { return true; }

  // CRC-32 over the raw weight bytes.
  std::uint32_t checksum() const;

  std::vector<Tensor> constant_weights() const;
  std::vector<Tensor> trainable_copy() const;

  // Node embeddings of g (N×D) with frozen weights.
  Matrix embed(const graph::Graph& g) const;

  friend bool operator==(const PretrainedEncoder&, const PretrainedEncoder&) = default;

 private:
  BackboneConfig config_;
  std::vector<Matrix> weights_;
  std::string pretext_;
};

// Trainable scalars.
std::size_t param_count(std::span<const Tensor> params);
std::size_t param_count(const PretrainedEncoder& enc);
std::size_t gcn_param_closed_form(std::size_t d, std::size_t hidden, std::size_t layers);

}  // namespace gpb::model
