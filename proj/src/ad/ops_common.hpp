#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gpb/ad/tensor.hpp"
#include "gpb/error.hpp"

namespace gpb::ad::detail {

using NodePtr = std::shared_ptr<Node>;

// Builds an interior node. The backward closure is dropped when no input needs
// gradients.
inline Tensor make_node(const char* op, Matrix value, std::vector<NodePtr> inputs,
                        std::function<void(Node&)> backward) {
  if (finite_checks() && !value.all_finite())
    throw NonFiniteError(std::string("non-finite output from ") + op);
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->leaf = false;
  node->op = op;
  for (const auto& in : inputs) node->requires_grad = node->requires_grad || in->requires_grad;
  if (node->requires_grad) {
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Tensor::wrap(std::move(node));
}

inline void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + " differ");
}

}  // namespace gpb::ad::detail
