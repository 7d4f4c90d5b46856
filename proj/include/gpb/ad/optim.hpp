#pragma once

#include <cstdint>
#include <vector>

#include "gpb/ad/tensor.hpp"

namespace gpb::ad {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 0.01;
  double weight_decay = 0.0;  // L2 term added to the gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Optimizer {
 public:
  Optimizer(std::vector<Tensor> params, OptimizerConfig config);

  void zero_grad();
  void step();

  std::uint64_t step_count() const { return steps_; }
  const OptimizerConfig& config() const { return config_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  OptimizerConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::uint64_t steps_ = 0;
};

}  // namespace gpb::ad
