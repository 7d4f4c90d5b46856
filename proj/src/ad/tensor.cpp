#include "gpb/ad/tensor.hpp"

#include <atomic>
#include <unordered_set>

#include "gpb/error.hpp"

namespace gpb::ad {

namespace {
std::atomic<bool> g_finite_checks{true};
}

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks() { return g_finite_checks.load(std::memory_order_relaxed); }

namespace detail {

Matrix& grad_buffer(Node& node) {
  if (node.grad.empty() && !node.value.empty())
    node.grad = Matrix(node.value.rows(), node.value.cols());
  return node.grad;
}

void accumulate(Node& node, const Matrix& g) {
  if (!node.requires_grad) return;
  Matrix& buf = grad_buffer(node);
  if (!buf.same_shape(g)) throw DimensionError("gradient shape mismatch");
  double* dst = buf.data();
  const double* src = g.data();
  for (std::size_t i = 0; i < buf.size(); ++i) dst[i] += src[i];
}

}  // namespace detail

Tensor Tensor::constant(Matrix value) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  if (finite_checks() && !node->value.all_finite())
    throw NonFiniteError("non-finite value in constant tensor");
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
  Tensor t = constant(std::move(value));
  t.node_->requires_grad = true;
  return t;
}

Matrix& Tensor::leaf_value() {
  if (!node_->leaf) throw InvalidArgument("leaf_value() on an interior tensor");
  return node_->value;
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1)
    throw DimensionError("item() needs a 1x1 tensor, got " + std::to_string(rows()) + "x" +
                         std::to_string(cols()));
  return node_->value(0, 0);
}

Matrix Tensor::grad() const {
  if (node_->grad.empty()) return Matrix(rows(), cols());
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad = Matrix(); }

void Tensor::backward() const {
  if (rows() != 1 || cols() != 1)
    throw DimensionError("backward() needs a scalar loss, got " + std::to_string(rows()) +
                         "x" + std::to_string(cols()));
  if (!node_->requires_grad) return;

  // Iterative post-order DFS over nodes that carry gradients.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      detail::Node* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (detail::Node* n : order)
    if (!n->leaf) n->grad = Matrix(n->value.rows(), n->value.cols());
  detail::grad_buffer(*node_)(0, 0) += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->leaf && n->backward) n->backward(*n);
  }
}

}  // namespace gpb::ad
