#include "gpb/ad/optim.hpp"

#include <cmath>

#include "gpb/error.hpp"

namespace gpb::ad {

Optimizer::Optimizer(std::vector<Tensor> params, OptimizerConfig config)
    : params_(std::move(params)), config_(config) {
  // A zero rate is allowed: it makes step() an exact no-op on the parameters.
  if (!(config_.learning_rate >= 0.0) || !std::isfinite(config_.learning_rate))
    throw InvalidArgument("learning rate must be finite and non-negative");
  if (!(config_.weight_decay >= 0.0)) throw InvalidArgument("weight decay must be non-negative");
  for (const auto& p : params_) {
    if (!p.is_leaf() || !p.requires_grad())
      throw InvalidArgument("optimizer parameters must be trainable leaves");
    m_.emplace_back(p.rows(), p.cols());
    v_.emplace_back(p.rows(), p.cols());
  }
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Optimizer::step() {
  ++steps_;
  const auto& cfg = config_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    if (!p.has_grad()) continue;
    const Matrix g = p.grad();
    Matrix& w = p.leaf_value();
    for (std::size_t i = 0; i < w.size(); ++i) {
      double gi = g.data()[i] + cfg.weight_decay * w.data()[i];
      double update;
      if (cfg.kind == OptimizerKind::sgd) {
        update = gi;
      } else {
        double& m = m_[k].data()[i];
        double& v = v_[k].data()[i];
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * gi;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * gi * gi;
        update = (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
      }
      w.data()[i] -= cfg.learning_rate * update;
    }
    if (!w.all_finite()) throw NonFiniteError("optimizer step produced a non-finite parameter");
  }
}

}  // namespace gpb::ad
