#include "gpb/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gpb/error.hpp"

namespace gpb::ad {

double grad_check(const std::function<Tensor()>& f, Tensor x, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("grad_check: eps must be positive");
  x.zero_grad();
  f().backward();
  const Matrix analytic = x.grad();
  x.zero_grad();

  Matrix& w = x.leaf_value();
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double saved = w.data()[i];
    w.data()[i] = saved + eps;
    const double fp = f().item();
    w.data()[i] = saved - eps;
    const double fm = f().item();
    w.data()[i] = saved;
    const double cd = (fp - fm) / (2.0 * eps);
    const double a = analytic.data()[i];
    worst = std::max(worst, std::abs(a - cd) / (std::abs(a) + std::abs(cd) + 1e-12));
  }
  return worst;
}

}  // namespace gpb::ad
