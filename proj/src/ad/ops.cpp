#include "gpb/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpb/simd/kernels.hpp"
#include "ops_common.hpp"

namespace gpb::ad {

using detail::make_node;
using detail::Node;
using detail::require_same_shape;

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix out(m, n);
  simd::active().gemm_nn(a.value().data(), b.value().data(), out.data(), m, k, n);
  return make_node("matmul", std::move(out), {a.node(), b.node()}, [m, k, n](Node& self) {
    const auto& ka = simd::active();
    Node& na = *self.inputs[0];
    Node& nb = *self.inputs[1];
    if (na.requires_grad) {
      Matrix ga(m, k);
      ka.gemm_nt(self.grad.data(), nb.value.data(), ga.data(), m, n, k);
      detail::accumulate(na, ga);
    }
    if (nb.requires_grad) {
      Matrix gb(k, n);
      ka.gemm_tn(na.value.data(), self.grad.data(), gb.data(), k, m, n);
      detail::accumulate(nb, gb);
    }
  });
}

Tensor spmm(const SparseAdj& adj, const Tensor& h) {
  if (adj.n() != h.rows())
    throw DimensionError("spmm: adjacency over " + std::to_string(adj.n()) + " nodes, features have " +
                         std::to_string(h.rows()) + " rows");
  const std::size_t cols = h.cols();
  Matrix out(adj.n(), cols);
  simd::active().spmm(adj.row_ptr().data(), adj.col_idx().data(), adj.weights().data(), adj.n(),
                      h.value().data(), cols, out.data());
  return make_node("spmm", std::move(out), {h.node()}, [adj, cols](Node& self) {
    Matrix g(adj.n(), cols);
    simd::active().spmm_t(adj.row_ptr().data(), adj.col_idx().data(), adj.weights().data(),
                          adj.n(), self.grad.data(), cols, g.data());
    detail::accumulate(*self.inputs[0], g);
  });
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  Matrix out(c, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(j, i) = a.value()(i, j);
  return make_node("transpose", std::move(out), {a.node()}, [r, c](Node& self) {
    Matrix g(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g(i, j) = self.grad(j, i);
    detail::accumulate(*self.inputs[0], g);
  });
}

namespace {

template <typename F>
Matrix zip(const Matrix& a, const Matrix& b, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = f(a.data()[i], b.data()[i]);
  return out;
}

template <typename F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = f(a.data()[i]);
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  return make_node("add", zip(a.value(), b.value(), std::plus<>{}), {a.node(), b.node()},
                   [](Node& self) {
                     detail::accumulate(*self.inputs[0], self.grad);
                     detail::accumulate(*self.inputs[1], self.grad);
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  return make_node("sub", zip(a.value(), b.value(), std::minus<>{}), {a.node(), b.node()},
                   [](Node& self) {
                     detail::accumulate(*self.inputs[0], self.grad);
                     if (self.inputs[1]->requires_grad)
                       detail::accumulate(*self.inputs[1], map(self.grad, std::negate<>{}));
                   });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  return make_node("mul", zip(a.value(), b.value(), std::multiplies<>{}), {a.node(), b.node()},
                   [](Node& self) {
                     Node& na = *self.inputs[0];
                     Node& nb = *self.inputs[1];
                     if (na.requires_grad)
                       detail::accumulate(na, zip(self.grad, nb.value, std::multiplies<>{}));
                     if (nb.requires_grad)
                       detail::accumulate(nb, zip(self.grad, na.value, std::multiplies<>{}));
                   });
}

Tensor scale(const Tensor& a, double c) {
  return make_node("scale", map(a.value(), [c](double x) { return c * x; }), {a.node()},
                   [c](Node& self) {
                     detail::accumulate(*self.inputs[0],
                                        map(self.grad, [c](double g) { return c * g; }));
                   });
}

Tensor relu(const Tensor& a) {
  return make_node("relu", map(a.value(), [](double x) { return x > 0.0 ? x : 0.0; }),
                   {a.node()}, [](Node& self) {
                     const Matrix& x = self.inputs[0]->value;
                     detail::accumulate(*self.inputs[0],
                                        zip(self.grad, x, [](double g, double v) {
                                          return v > 0.0 ? g : 0.0;
                                        }));
                   });
}

namespace {
double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Tensor sigmoid(const Tensor& a) {
  Matrix out = map(a.value(), stable_sigmoid);
  return make_node("sigmoid", out, {a.node()}, [out](Node& self) {
    detail::accumulate(*self.inputs[0], zip(self.grad, out, [](double g, double s) {
                         return g * s * (1.0 - s);
                       }));
  });
}

Tensor tanh(const Tensor& a) {
  Matrix out = map(a.value(), [](double x) { return std::tanh(x); });
  return make_node("tanh", out, {a.node()}, [out](Node& self) {
    detail::accumulate(*self.inputs[0], zip(self.grad, out, [](double g, double t) {
                         return g * (1.0 - t * t);
                       }));
  });
}

namespace {
void require_row_vector(const char* op, const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw DimensionError(std::string(op) + ": expected a 1x" + std::to_string(a.cols()) +
                         " row, got " + std::to_string(row.rows()) + "x" +
                         std::to_string(row.cols()));
}
}  // namespace

Tensor add_row(const Tensor& a, const Tensor& row) {
  require_row_vector("add_row", a, row);
  const std::size_t r = a.rows(), c = a.cols();
  Matrix out = a.value();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) += row.value()(0, j);
  return make_node("add_row", std::move(out), {a.node(), row.node()}, [r, c](Node& self) {
    detail::accumulate(*self.inputs[0], self.grad);
    if (self.inputs[1]->requires_grad) {
      Matrix g(1, c);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g(0, j) += self.grad(i, j);
      detail::accumulate(*self.inputs[1], g);
    }
  });
}

Tensor mul_row(const Tensor& a, const Tensor& row) {
  require_row_vector("mul_row", a, row);
  const std::size_t r = a.rows(), c = a.cols();
  Matrix out = a.value();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) *= row.value()(0, j);
  return make_node("mul_row", std::move(out), {a.node(), row.node()}, [r, c](Node& self) {
    Node& na = *self.inputs[0];
    Node& nr = *self.inputs[1];
    if (na.requires_grad) {
      Matrix g(r, c);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g(i, j) = self.grad(i, j) * nr.value(0, j);
      detail::accumulate(na, g);
    }
    if (nr.requires_grad) {
      Matrix g(1, c);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g(0, j) += self.grad(i, j) * na.value(i, j);
      detail::accumulate(nr, g);
    }
  });
}

Tensor vstack(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("vstack: no inputs");
  const std::size_t c = parts.front().cols();
  std::size_t r = 0;
  std::vector<detail::NodePtr> inputs;
  std::vector<std::size_t> offsets{0};
  for (const auto& p : parts) {
    if (p.cols() != c) throw DimensionError("vstack: column counts differ");
    r += p.rows();
    offsets.push_back(r);
    inputs.push_back(p.node());
  }
  Matrix out(r, c);
  for (std::size_t k = 0; k < parts.size(); ++k)
    std::copy(parts[k].value().values().begin(), parts[k].value().values().end(),
              out.data() + offsets[k] * c);
  return make_node("vstack", std::move(out), std::move(inputs),
                   [offsets = std::move(offsets), c](Node& self) {
                     for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                       Node& in = *self.inputs[k];
                       if (!in.requires_grad) continue;
                       const std::size_t rows = offsets[k + 1] - offsets[k];
                       std::vector<double> g(self.grad.data() + offsets[k] * c,
                                             self.grad.data() + offsets[k + 1] * c);
                       detail::accumulate(in, Matrix(rows, c, std::move(g)));
                     }
                   });
}

Tensor hstack(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("hstack: no inputs");
  const std::size_t r = parts.front().rows();
  std::size_t c = 0;
  std::vector<detail::NodePtr> inputs;
  std::vector<std::size_t> offsets{0};
  for (const auto& p : parts) {
    if (p.rows() != r) throw DimensionError("hstack: row counts differ");
    c += p.cols();
    offsets.push_back(c);
    inputs.push_back(p.node());
  }
  Matrix out(r, c);
  for (std::size_t k = 0; k < parts.size(); ++k)
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < parts[k].cols(); ++j)
        out(i, offsets[k] + j) = parts[k].value()(i, j);
  return make_node("hstack", std::move(out), std::move(inputs),
                   [offsets = std::move(offsets), r](Node& self) {
                     for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                       Node& in = *self.inputs[k];
                       if (!in.requires_grad) continue;
                       const std::size_t w = offsets[k + 1] - offsets[k];
                       Matrix g(r, w);
                       for (std::size_t i = 0; i < r; ++i)
                         for (std::size_t j = 0; j < w; ++j) g(i, j) = self.grad(i, offsets[k] + j);
                       detail::accumulate(in, g);
                     }
                   });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> idx) {
  const std::size_t c = a.cols(), r_in = a.rows();
  Matrix out(idx.size(), c);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= r_in)
      throw StructuralError("gather_rows: row " + std::to_string(idx[i]) + " of " +
                            std::to_string(r_in));
    std::copy_n(a.value().data() + idx[i] * c, c, out.data() + i * c);
  }
  return make_node("gather_rows", std::move(out), {a.node()},
                   [rows = std::vector<std::size_t>(idx.begin(), idx.end()), r_in, c](Node& self) {
                     Matrix g(r_in, c);
                     for (std::size_t i = 0; i < rows.size(); ++i)
                       for (std::size_t j = 0; j < c; ++j) g(rows[i], j) += self.grad(i, j);
                     detail::accumulate(*self.inputs[0], g);
                   });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t r = a.rows(), c = a.cols();
  return make_node("sum", Matrix(1, 1, s), {a.node()}, [r, c](Node& self) {
    detail::accumulate(*self.inputs[0], Matrix(r, c, self.grad(0, 0)));
  });
}

Tensor mean(const Tensor& a) {
  if (a.value().empty()) throw DimensionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Tensor row_sum(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  Matrix out(r, 1);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, 0) += a.value()(i, j);
  return make_node("row_sum", std::move(out), {a.node()}, [r, c](Node& self) {
    Matrix g(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g(i, j) = self.grad(i, 0);
    detail::accumulate(*self.inputs[0], g);
  });
}

Tensor mean_rows(const Tensor& a) {
  const std::size_t offsets[] = {0, a.rows()};
  return segment_mean(a, offsets);
}

Tensor segment_mean(const Tensor& a, std::span<const std::size_t> offsets) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != a.rows())
    throw DimensionError("segment_mean: offsets must span [0, rows]");
  const std::size_t segs = offsets.size() - 1, c = a.cols(), r = a.rows();
  Matrix out(segs, c);
  for (std::size_t s = 0; s < segs; ++s) {
    if (offsets[s + 1] <= offsets[s]) throw DimensionError("segment_mean: empty segment");
    for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
      for (std::size_t j = 0; j < c; ++j) out(s, j) += a.value()(i, j);
    const double inv = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
    for (std::size_t j = 0; j < c; ++j) out(s, j) *= inv;
  }
  return make_node("segment_mean", std::move(out), {a.node()},
                   [offs = std::vector<std::size_t>(offsets.begin(), offsets.end()), segs, r,
                    c](Node& self) {
                     Matrix g(r, c);
                     for (std::size_t s = 0; s < segs; ++s) {
                       const double inv = 1.0 / static_cast<double>(offs[s + 1] - offs[s]);
                       for (std::size_t i = offs[s]; i < offs[s + 1]; ++i)
                         for (std::size_t j = 0; j < c; ++j) g(i, j) = self.grad(s, j) * inv;
                     }
                     detail::accumulate(*self.inputs[0], g);
                   });
}

Tensor softmax_rows(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  Matrix out(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    auto row = a.value().row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (out(i, j) = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) out(i, j) /= z;
  }
  return make_node("softmax_rows", out, {a.node()}, [out, r, c](Node& self) {
    Matrix g(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += self.grad(i, j) * out(i, j);
      for (std::size_t j = 0; j < c; ++j) g(i, j) = out(i, j) * (self.grad(i, j) - dot);
    }
    detail::accumulate(*self.inputs[0], g);
  });
}

Tensor normalize_rows(const Tensor& a, double eps) {
  const std::size_t r = a.rows(), c = a.cols();
  Matrix out(r, c);
  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (double v : a.value().row(i)) s += v * v;
    norms[i] = std::sqrt(s);
    for (std::size_t j = 0; j < c; ++j) out(i, j) = a.value()(i, j) / (norms[i] + eps);
  }
  return make_node("normalize_rows", out, {a.node()},
                   [out, norms = std::move(norms), eps, r, c](Node& self) {
                     // y = x / (n + eps); dy/dx = I/(n+eps) − x xᵀ / (n (n+eps)²)
                     Matrix g(r, c);
                     for (std::size_t i = 0; i < r; ++i) {
                       const double d = norms[i] + eps;
                       double gy = 0.0;
                       for (std::size_t j = 0; j < c; ++j) gy += self.grad(i, j) * out(i, j);
                       const double coef = norms[i] > 0.0 ? gy / (norms[i] * d) : 0.0;
                       const Matrix& x = self.inputs[0]->value;
                       for (std::size_t j = 0; j < c; ++j)
                         g(i, j) = self.grad(i, j) / d - coef * x(i, j);
                     }
                     detail::accumulate(*self.inputs[0], g);
                   });
}

Tensor offdiag(const Tensor& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("offdiag: matrix must be square");
  if (n < 2) throw DimensionError("offdiag: needs at least 2 rows");
  Matrix out(n, n - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0, k = 0; j < n; ++j)
      if (j != i) out(i, k++) = a.value()(i, j);
  return make_node("offdiag", std::move(out), {a.node()}, [n](Node& self) {
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0, k = 0; j < n; ++j)
        if (j != i) g(i, j) = self.grad(i, k++);
    detail::accumulate(*self.inputs[0], g);
  });
}

Tensor group_max_cols(const Tensor& a, const std::vector<std::vector<std::size_t>>& groups) {
  const std::size_t r = a.rows(), c = a.cols(), ng = groups.size();
  Matrix out(r, ng);
  std::vector<std::size_t> arg(r * ng);
  for (std::size_t g = 0; g < ng; ++g) {
    if (groups[g].empty()) throw DimensionError("group_max_cols: empty group");
    for (std::size_t col : groups[g])
      if (col >= c) throw StructuralError("group_max_cols: column out of range");
    for (std::size_t i = 0; i < r; ++i) {
      std::size_t best = groups[g].front();
      for (std::size_t col : groups[g])
        if (a.value()(i, col) > a.value()(i, best)) best = col;
      out(i, g) = a.value()(i, best);
      arg[i * ng + g] = best;
    }
  }
  return make_node("group_max_cols", std::move(out), {a.node()},
                   [arg = std::move(arg), r, c, ng](Node& self) {
                     Matrix g(r, c);
                     for (std::size_t i = 0; i < r; ++i)
                       for (std::size_t k = 0; k < ng; ++k) g(i, arg[i * ng + k]) += self.grad(i, k);
                     detail::accumulate(*self.inputs[0], g);
                   });
}

Tensor row_dot(const Tensor& a, const Tensor& b) { return row_sum(mul(a, b)); }

Tensor squared_norm(const Tensor& a) { return sum(mul(a, a)); }

}  // namespace gpb::ad
