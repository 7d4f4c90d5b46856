#pragma once

#include <cstddef>
#include <span>

#include "gpb/ad/tensor.hpp"

namespace gpb::ad {

// Mean over rows of −log softmax(logits)[label].
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

// Mean over entries of the numerically stable logistic loss. Targets in [0, 1].
Tensor bce_with_logits(const Tensor& logits, const Matrix& targets);

Tensor mse(const Tensor& pred, const Matrix& target);

// Mean over rows of (1 − cos(pred_i, target_i))^gamma with
// cos = x·t / ((‖x‖ + 1e-12)(‖t‖ + 1e-12)).
Tensor cosine_error(const Tensor& pred, const Matrix& target, double gamma);

}  // namespace gpb::ad
