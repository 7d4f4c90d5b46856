#include "gpb/ad/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpb/error.hpp"

namespace gpb::ad {

SparseAdj::SparseAdj() : SparseAdj(0) {}

SparseAdj::SparseAdj(std::size_t n) {
  auto csr = std::make_shared<Csr>();
  csr->n = n;
  csr->undirected = true;
  csr->row_ptr.assign(n + 1, 0);
  csr_ = std::move(csr);
}

SparseAdj SparseAdj::from_entries(std::size_t n, std::vector<SparseEntry> entries,
                                  bool undirected) {
  for (const auto& e : entries) {
    if (e.row >= n || e.col >= n)
      throw StructuralError("sparse entry (" + std::to_string(e.row) + ", " +
                            std::to_string(e.col) + ") outside " + std::to_string(n) +
                            "-node matrix");
    if (!std::isfinite(e.weight)) throw StructuralError("non-finite sparse weight");
  }
  std::sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col)
      throw StructuralError("duplicate sparse entry (" + std::to_string(entries[i].row) +
                            ", " + std::to_string(entries[i].col) + ")");

  auto csr = std::make_shared<Csr>();
  csr->n = n;
  csr->undirected = undirected;
  csr->row_ptr.assign(n + 1, 0);
  csr->col_idx.reserve(entries.size());
  csr->weights.reserve(entries.size());
  for (const auto& e : entries) {
    ++csr->row_ptr[e.row + 1];
    csr->col_idx.push_back(e.col);
    csr->weights.push_back(e.weight);
  }
  for (std::size_t r = 0; r < n; ++r) csr->row_ptr[r + 1] += csr->row_ptr[r];
  SparseAdj adj(std::move(csr));

  if (undirected) {
    for (const auto& e : entries) {
      auto nb = adj.neighbors(e.col);
      auto it = std::lower_bound(nb.begin(), nb.end(), e.row);
      if (it == nb.end() || *it != e.row)
        throw StructuralError("undirected matrix missing mirror of (" +
                              std::to_string(e.row) + ", " + std::to_string(e.col) + ")");
      const std::size_t pos = adj.row_ptr()[e.col] + static_cast<std::size_t>(it - nb.begin());
      if (adj.weights()[pos] != e.weight)
        throw StructuralError("undirected matrix has asymmetric weights");
    }
  }
  return adj;
}

SparseAdj SparseAdj::from_edges(std::size_t n,
                                std::span<const std::pair<std::size_t, std::size_t>> edges,
                                bool undirected) {
  std::vector<SparseEntry> entries;
  entries.reserve(edges.size() * (undirected ? 2 : 1));
  for (auto [u, v] : edges) {
    entries.push_back({u, v, 1.0});
    if (undirected && u != v) entries.push_back({v, u, 1.0});
  }
  std::sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  entries.erase(std::unique(entries.begin(), entries.end(),
                            [](const SparseEntry& a, const SparseEntry& b) {
                              return a.row == b.row && a.col == b.col;
                            }),
                entries.end());
  return from_entries(n, std::move(entries), undirected);
}

std::span<const std::size_t> SparseAdj::neighbors(std::size_t u) const {
  if (u >= n()) throw StructuralError("node " + std::to_string(u) + " out of range");
  const auto& c = *csr_;
  return {c.col_idx.data() + c.row_ptr[u], c.row_ptr[u + 1] - c.row_ptr[u]};
}

bool SparseAdj::has_edge(std::size_t u, std::size_t v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<SparseEntry> SparseAdj::entries() const {
  std::vector<SparseEntry> out;
  out.reserve(nnz());
  const auto& c = *csr_;
  for (std::size_t r = 0; r < c.n; ++r)
    for (std::size_t e = c.row_ptr[r]; e < c.row_ptr[r + 1]; ++e)
      out.push_back({r, c.col_idx[e], c.weights[e]});
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> SparseAdj::edge_list() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& c = *csr_;
  for (std::size_t r = 0; r < c.n; ++r)
    for (std::size_t e = c.row_ptr[r]; e < c.row_ptr[r + 1]; ++e)
      if (!c.undirected || r <= c.col_idx[e]) out.emplace_back(r, c.col_idx[e]);
  return out;
}

Matrix SparseAdj::dense() const {
  Matrix m(n(), n());
  for (const auto& e : entries()) m(e.row, e.col) = e.weight;
  return m;
}

bool operator==(const SparseAdj& a, const SparseAdj& b) {
  if (a.csr_ == b.csr_) return true;
  return a.n() == b.n() && a.undirected() == b.undirected() &&
         a.csr_->row_ptr == b.csr_->row_ptr && a.csr_->col_idx == b.csr_->col_idx &&
         a.csr_->weights == b.csr_->weights;
}

}  // namespace gpb::ad
