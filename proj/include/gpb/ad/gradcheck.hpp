#pragma once

#include <functional>

#include "gpb/ad/tensor.hpp"

namespace gpb::ad {

// Max over entries of x of |analytic − central difference| /
// (|analytic| + |cd| + 1e-12). `f` must rebuild its graph on every call and
// return a 1×1 tensor; x must be a parameter leaf reachable from it.
double grad_check(const std::function<Tensor()>& f, Tensor x, double eps = 1e-5);

}  // namespace gpb::ad
