#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gpb/ad/matrix.hpp"

namespace gpb::ad {

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;  // empty until a gradient arrives
  bool requires_grad = false;
  bool leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into inputs' grads.
  std::function<void(Node&)> backward;
};

void accumulate(Node& node, const Matrix& g);
Matrix& grad_buffer(Node& node);  // zero-initialized on first use

}  // namespace detail

// Handle to a node of a define-by-run computation graph. Copies alias the same
// node. The graph is rebuilt on every forward pass.
class Tensor {
 public:
  Tensor() = default;

  // Leaf that never receives gradients.
  static Tensor constant(Matrix value);
  // Trainable leaf.
  static Tensor parameter(Matrix value);

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->leaf; }

  const Matrix& value() const { return node_->value; }
  // Mutable access to a leaf's storage (optimizers, grad_check). Throws for
  // interior nodes.
  Matrix& leaf_value();
  double item() const;

  bool has_grad() const { return !node_->grad.empty(); }
  // Gradient buffer; zeros when nothing has been accumulated yet.
  Matrix grad() const;
  void zero_grad();

  // Reverse pass from a 1×1 tensor. Leaf gradients accumulate across calls;
  // interior gradients are recomputed each call.
  void backward() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  static Tensor wrap(std::shared_ptr<detail::Node> node) { return Tensor(std::move(node)); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

// NaN/Inf check after every op. On by default.
void set_finite_checks(bool enabled);
bool finite_checks();

}  // namespace gpb::ad
