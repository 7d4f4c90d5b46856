#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gpb/ad/sparse.hpp"
#include "gpb/ad/tensor.hpp"

namespace gpb::ad {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor spmm(const SparseAdj& adj, const Tensor& h);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);

// Row-vector broadcast over every row of a matrix; `row` is 1×cols.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor mul_row(const Tensor& a, const Tensor& row);

Tensor vstack(std::span<const Tensor> parts);
Tensor hstack(std::span<const Tensor> parts);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> idx);

Tensor sum(const Tensor& a);       // 1×1
Tensor mean(const Tensor& a);      // 1×1
Tensor row_sum(const Tensor& a);   // rows×1
Tensor mean_rows(const Tensor& a); // 1×cols
// Per-segment row means; segment s covers rows [offsets[s], offsets[s+1]).
Tensor segment_mean(const Tensor& a, std::span<const std::size_t> offsets);

Tensor softmax_rows(const Tensor& a);
// x / (‖x‖ + eps) per row.
Tensor normalize_rows(const Tensor& a, double eps = 1e-12);
// n×n → n×(n−1), dropping the diagonal.
Tensor offdiag(const Tensor& a);
// out(r, g) = max over columns in groups[g] of a(r, ·). Subgradient goes to the
// first maximizing column.
Tensor group_max_cols(const Tensor& a, const std::vector<std::vector<std::size_t>>& groups);

// Composite helpers.
Tensor row_dot(const Tensor& a, const Tensor& b);  // rows×1
Tensor squared_norm(const Tensor& a);              // 1×1

}  // namespace gpb::ad
