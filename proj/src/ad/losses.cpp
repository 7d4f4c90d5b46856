#include "gpb/ad/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ops_common.hpp"

namespace gpb::ad {

using detail::make_node;
using detail::Node;

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  const std::size_t r = logits.rows(), c = logits.cols();
  if (r == 0) throw InvalidArgument("softmax_cross_entropy: empty batch");
  if (labels.size() != r)
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(r) + " rows");
  Matrix probs(r, c);
  double loss = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (labels[i] >= c)
      throw InvalidArgument("softmax_cross_entropy: class index " + std::to_string(labels[i]) +
                            " outside [0, " + std::to_string(c) + ")");
    auto row = logits.value().row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) probs(i, j) = std::exp(row[j] - lse);
    loss += lse - row[labels[i]];
  }
  loss /= static_cast<double>(r);
  return make_node("softmax_cross_entropy", Matrix(1, 1, loss), {logits.node()},
                   [probs = std::move(probs),
                    lab = std::vector<std::size_t>(labels.begin(), labels.end()), r,
                    c](Node& self) {
                     const double s = self.grad(0, 0) / static_cast<double>(r);
                     Matrix g = probs;
                     for (std::size_t i = 0; i < r; ++i) g(i, lab[i]) -= 1.0;
                     for (double& v : g.values()) v *= s;
                     detail::accumulate(*self.inputs[0], g);
                   });
}

Tensor bce_with_logits(const Tensor& logits, const Matrix& targets) {
  if (!logits.value().same_shape(targets))
    throw DimensionError("bce_with_logits: target shape differs from logits");
  if (targets.empty()) throw InvalidArgument("bce_with_logits: empty batch");
  for (double t : targets.values())
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("bce_with_logits: target outside [0, 1]");
  const std::size_t n = targets.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = logits.value().data()[i];
    const double t = targets.data()[i];
    loss += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  loss /= static_cast<double>(n);
  return make_node("bce_with_logits", Matrix(1, 1, loss), {logits.node()},
                   [targets, n](Node& self) {
                     const Matrix& x = self.inputs[0]->value;
                     const double s = self.grad(0, 0) / static_cast<double>(n);
                     Matrix g(x.rows(), x.cols());
                     for (std::size_t i = 0; i < n; ++i) {
                       const double v = x.data()[i];
                       const double p = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                                 : std::exp(v) / (1.0 + std::exp(v));
                       g.data()[i] = s * (p - targets.data()[i]);
                     }
                     detail::accumulate(*self.inputs[0], g);
                   });
}

Tensor mse(const Tensor& pred, const Matrix& target) {
  if (!pred.value().same_shape(target)) throw DimensionError("mse: target shape differs");
  if (target.empty()) throw InvalidArgument("mse: empty batch");
  const std::size_t n = target.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred.value().data()[i] - target.data()[i];
    loss += d * d;
  }
  loss /= static_cast<double>(n);
  return make_node("mse", Matrix(1, 1, loss), {pred.node()}, [target, n](Node& self) {
    const Matrix& x = self.inputs[0]->value;
    const double s = 2.0 * self.grad(0, 0) / static_cast<double>(n);
    Matrix g(x.rows(), x.cols());
    for (std::size_t i = 0; i < n; ++i) g.data()[i] = s * (x.data()[i] - target.data()[i]);
    detail::accumulate(*self.inputs[0], g);
  });
}

Tensor cosine_error(const Tensor& pred, const Matrix& target, double gamma) {
  constexpr double kEps = 1e-12;
  if (!pred.value().same_shape(target)) throw DimensionError("cosine_error: target shape differs");
  if (target.rows() == 0) throw InvalidArgument("cosine_error: empty batch");
  if (!(gamma >= 1.0)) throw InvalidArgument("cosine_error: gamma must be >= 1");
  const std::size_t r = target.rows(), c = target.cols();
  std::vector<double> cosv(r), nx(r), nt(r);
  double loss = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    double dot = 0.0, sx = 0.0, st = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double x = pred.value()(i, j), t = target(i, j);
      dot += x * t;
      sx += x * x;
      st += t * t;
    }
    nx[i] = std::sqrt(sx);
    nt[i] = std::sqrt(st);
    cosv[i] = dot / ((nx[i] + kEps) * (nt[i] + kEps));
    loss += std::pow(1.0 - cosv[i], gamma);
  }
  loss /= static_cast<double>(r);
  return make_node(
      "cosine_error", Matrix(1, 1, loss), {pred.node()},
      [target, cosv = std::move(cosv), nx = std::move(nx), nt = std::move(nt), gamma, r,
       c](Node& self) {
        const Matrix& x = self.inputs[0]->value;
        const double s = self.grad(0, 0) / static_cast<double>(r);
        Matrix g(r, c);
        for (std::size_t i = 0; i < r; ++i) {
          // d(1−cos)^γ/dcos = −γ(1−cos)^{γ−1}
          const double dl = -gamma * std::pow(1.0 - cosv[i], gamma - 1.0) * s;
          const double denom = (nx[i] + kEps) * (nt[i] + kEps);
          const double self_term = nx[i] > 0.0 ? cosv[i] / (nx[i] * (nx[i] + kEps)) : 0.0;
          for (std::size_t j = 0; j < c; ++j)
            g(i, j) = dl * (target(i, j) / denom - self_term * x(i, j));
        }
        detail::accumulate(*self.inputs[0], g);
      });
}

}  // namespace gpb::ad
