#include "gpb/model/gcn.hpp"

#include <zlib.h>

#include <cmath>
#include <string>

#include "gpb/error.hpp"

namespace gpb::model {

void BackboneConfig::validate() const {
  if (input_dim < 1) throw InvalidArgument("backbone input_dim must be >= 1");
  if (hidden_dim < 1) throw InvalidArgument("backbone hidden_dim must be >= 1");
  if (num_layers < 1) throw InvalidArgument("backbone num_layers must be >= 1");
}

std::pair<std::size_t, std::size_t> BackboneConfig::layer_shape(std::size_t layer) const {
  return {layer == 0 ? input_dim : hidden_dim, hidden_dim};
}

SparseAdj normalized_adjacency(const SparseAdj& adj) {
  const std::size_t n = adj.n();
  std::vector<double> deg(n, 1.0);  // the self-loop
  std::vector<ad::SparseEntry> entries;
  entries.reserve(adj.nnz() + n);
  for (const auto& e : adj.entries()) {
    if (e.row == e.col) continue;
    deg[e.row] += e.weight;
    entries.push_back(e);
  }
  for (std::size_t u = 0; u < n; ++u) entries.push_back({u, u, 1.0});
  for (auto& e : entries) e.weight /= std::sqrt(deg[e.row]) * std::sqrt(deg[e.col]);
  // Directed inputs give an asymmetric Ŝ.
  return SparseAdj::from_entries(n, std::move(entries), false);
}

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(rows, cols);
  for (double& v : w.values()) v = (2.0 * uniform01(rng) - 1.0) * a;
  return w;
}

std::vector<Matrix> init_gcn_weights(const BackboneConfig& config, Rng& rng) {
  config.validate();
  std::vector<Matrix> ws;
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    auto [r, c] = config.layer_shape(l);
    ws.push_back(glorot(r, c, rng));
  }
  return ws;
}

Tensor gcn_forward(std::span<const Tensor> weights, const SparseAdj& norm_adj, const Tensor& x) {
  if (weights.empty()) throw InvalidArgument("gcn_forward: no layers");
  if (x.cols() != weights.front().rows())
    throw DimensionError("gcn_forward: features have " + std::to_string(x.cols()) +
                         " columns, first layer expects " + std::to_string(weights.front().rows()));
  Tensor h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = ad::spmm(norm_adj, ad::matmul(h, weights[l]));
    if (l + 1 < weights.size()) h = ad::relu(h);
  }
  return h;
}

Tensor readout_mean(const Tensor& h) {
  if (h.rows() == 0) throw DimensionError("readout of an empty graph");
  return ad::mean_rows(h);
}

PretrainedEncoder::PretrainedEncoder(BackboneConfig config, std::vector<Matrix> weights,
                                     std::string pretext)
    : config_(config), weights_(std::move(weights)), pretext_(std::move(pretext)) {
  config_.validate();
  if (weights_.size() != config_.num_layers)
    throw DimensionError("encoder has " + std::to_string(weights_.size()) + " weight tensors, config says " +
                         std::to_string(config_.num_layers));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto [r, c] = config_.layer_shape(l);
    if (weights_[l].rows() != r || weights_[l].cols() != c)
      throw DimensionError("encoder layer " + std::to_string(l) + " has the wrong shape");
  }
}

std::uint32_t PretrainedEncoder::checksum() const {
  uLong crc = crc32(0L, Z_NULL, 0);
  for (const auto& w : weights_)
    crc = crc32(crc, reinterpret_cast<const Bytef*>(w.data()),
                static_cast<uInt>(w.size() * sizeof(double)));
  return static_cast<std::uint32_t>(crc);
}

std::vector<Tensor> PretrainedEncoder::constant_weights() const {
  std::vector<Tensor> out;
  for (const auto& w : weights_) out.push_back(Tensor::constant(w));
  return out;
}

std::vector<Tensor> PretrainedEncoder::trainable_copy() const {
  std::vector<Tensor> out;
  for (const auto& w : weights_) out.push_back(Tensor::parameter(w));
  return out;
}

Matrix PretrainedEncoder::embed(const graph::Graph& g) const {
  const auto ws = constant_weights();
  return gcn_forward(ws, normalized_adjacency(g.adj), Tensor::constant(g.features)).value();
}

std::size_t param_count(std::span<const Tensor> params) {
  std::size_t n = 0;
  for (const auto& p : params)
    if (p.requires_grad()) n += p.value().size();
  return n;
}

std::size_t param_count(const PretrainedEncoder& enc) {
  std::size_t n = 0;
  for (const auto& w : enc.weights()) n += w.size();
  return n;
}

std::size_t gcn_param_closed_form(std::size_t d, std::size_t hidden, std::size_t layers) {
  return d * hidden + hidden * hidden * (layers - 1);
}

}  // namespace gpb::model
