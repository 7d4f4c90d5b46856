#pragma once

// Dense and sparse inner loops used by the autodiff core. Every kernel has a
// scalar reference implementation; an AVX2+FMA variant is selected at startup
// when the CPU supports it. The GPB_SIMD environment variable ("scalar",
// "avx2", "auto") overrides the choice.

#include <cstddef>
#include <string_view>

namespace gpb::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // c[m×n] += a[m×k] · b[k×n]
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n);
  // c[m×n] += a[m×k] · b[n×k]ᵀ
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n);
  // c[m×n] += a[k×m]ᵀ · b[k×n]
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n);
  // out[rows×cols] += S · h, S in CSR form with `rows` rows.
  void (*spmm)(const std::size_t* row_ptr, const std::size_t* col_idx,
               const double* weights, std::size_t rows, const double* h,
               std::size_t cols, double* out);
  // out[n×cols] += Sᵀ · g, scattering row r of g along S's row r.
  void (*spmm_t)(const std::size_t* row_ptr, const std::size_t* col_idx,
                 const double* weights, std::size_t rows, const double* g,
                 std::size_t cols, double* out);
};

const KernelTable& scalar_table();
// Returns nullptr when the build has no AVX2 variant.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);

// The table every op dispatches through.
const KernelTable& active();

// Forces a variant for the rest of the process. Throws InvalidArgument when the
// CPU lacks support.
void select(Isa isa);

// Parses "scalar" / "avx2" / "auto"; "auto" picks the widest supported variant.
Isa parse_isa(std::string_view name);

}  // namespace gpb::simd
