#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sttopo/mesh.hpp"

namespace sttopo {

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Compressed sparse row matrix. Column indices within a row are sorted and
// unique.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<std::int64_t> row_ptr,
               std::vector<std::int32_t> col_idx, std::vector<double> values);

  static SparseMatrix identity(Index n);
  // Duplicate entries are summed.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

  std::span<const std::int64_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::int32_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  // Entry (r, c), zero when structurally absent.
  double at(Index r, Index c) const;
  // Position of (r, c) in values(), or -1.
  Index find(Index r, Index c) const;

  std::vector<double> diagonal() const;
  SparseMatrix transposed() const;

  // y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  // y = A^T x without forming the transpose.
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;
  // r = b - A x
  void residual(std::span<const double> b, std::span<const double> x, std::span<double> r) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int32_t> col_idx_;
  std::vector<double> values_;
};

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x);
std::vector<double> transpose_spmv(const SparseMatrix& a, std::span<const double> x);

// C = A B (Gustavson row-by-row product).
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

// P^T J P.
SparseMatrix galerkin_product(const SparseMatrix& fine, const SparseMatrix& prolongation);

}  // namespace sttopo
