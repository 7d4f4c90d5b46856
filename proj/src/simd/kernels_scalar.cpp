#include "gpb/simd/kernels.hpp"

namespace gpb::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn_scalar(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      axpy_scalar(av, b + p * n, crow, n);
    }
  }
}

void gemm_nt_scalar(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] += dot_scalar(a + i * k, b + j * k, k);
}

void gemm_tn_scalar(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      if (arow[i] == 0.0) continue;
      axpy_scalar(arow[i], brow, c + i * n, n);
    }
  }
}

void spmm_scalar(const std::size_t* row_ptr, const std::size_t* col_idx,
                 const double* weights, std::size_t rows, const double* h,
                 std::size_t cols, double* out) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e)
      axpy_scalar(weights[e], h + col_idx[e] * cols, out + r * cols, cols);
}

void spmm_t_scalar(const std::size_t* row_ptr, const std::size_t* col_idx,
                   const double* weights, std::size_t rows, const double* g,
                   std::size_t cols, double* out) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e)
      axpy_scalar(weights[e], g + r * cols, out + col_idx[e] * cols, cols);
}

constexpr KernelTable kScalar{
    Isa::scalar,    "scalar",       dot_scalar,  axpy_scalar, gemm_nn_scalar,
    gemm_nt_scalar, gemm_tn_scalar, spmm_scalar, spmm_t_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace gpb::simd
