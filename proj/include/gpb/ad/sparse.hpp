#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "gpb/ad/matrix.hpp"

namespace gpb::ad {

struct SparseEntry {
  std::size_t row;
  std::size_t col;
  double weight;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Immutable n×n sparse matrix in CSR form. Copies share storage.
//
// Invariants: no duplicate (row, col); weights finite; when flagged undirected
// every (u, v, w) has a matching (v, u, w).
class SparseAdj {
 public:
  SparseAdj();
  explicit SparseAdj(std::size_t n);  // n nodes, no entries

  // Strict constructor: duplicates, out-of-range indices and non-finite weights
  // throw StructuralError; undirected=true additionally demands symmetry.
  static SparseAdj from_entries(std::size_t n, std::vector<SparseEntry> entries,
                                bool undirected = false);

  // Unit-weight edge list. Repeated pairs collapse; undirected=true
  // materializes both directions.
  static SparseAdj from_edges(std::size_t n,
                              std::span<const std::pair<std::size_t, std::size_t>> edges,
                              bool undirected);

  std::size_t n() const { return csr_->n; }
  std::size_t nnz() const { return csr_->col_idx.size(); }
  bool undirected() const { return csr_->undirected; }

  std::span<const std::size_t> row_ptr() const { return csr_->row_ptr; }
  std::span<const std::size_t> col_idx() const { return csr_->col_idx; }
  std::span<const double> weights() const { return csr_->weights; }

  std::span<const std::size_t> neighbors(std::size_t u) const;
  bool has_edge(std::size_t u, std::size_t v) const;
  std::size_t degree(std::size_t u) const { return neighbors(u).size(); }

  // Entries in (row, col) order.
  std::vector<SparseEntry> entries() const;
  // Distinct node pairs: (u, v) with u < v for undirected, every entry otherwise.
  std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;
  Matrix dense() const;

  friend bool operator==(const SparseAdj& a, const SparseAdj& b);

 private:
  struct Csr {
    std::size_t n = 0;
    bool undirected = false;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_idx;
    std::vector<double> weights;
  };
  explicit SparseAdj(std::shared_ptr<const Csr> csr) : csr_(std::move(csr)) {}

  std::shared_ptr<const Csr> csr_;
};

}  // namespace gpb::ad
