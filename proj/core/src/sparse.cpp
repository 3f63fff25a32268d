#include "sttopo/sparse.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "sttopo/error.hpp"

namespace sttopo {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<std::int64_t> row_ptr,
                           std::vector<std::int32_t> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  require(rows >= 0 && cols >= 0, "negative matrix dimension");
  require(cols <= std::numeric_limits<std::int32_t>::max(), "column count exceeds index range");
  require(static_cast<Index>(row_ptr_.size()) == rows + 1, "row_ptr size must be rows + 1");
  require(row_ptr_.front() == 0, "row_ptr must start at 0");
  require(col_idx_.size() == values_.size(), "col_idx and values size differ");
  require(row_ptr_.back() == static_cast<std::int64_t>(values_.size()),
          "row_ptr end does not match nnz");
  for (Index r = 0; r < rows; ++r) {
    require(row_ptr_[r] <= row_ptr_[r + 1], "row_ptr must be non-decreasing");
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      require(col_idx_[p] >= 0 && col_idx_[p] < cols, "column index out of range");
      require(p == row_ptr_[r] || col_idx_[p - 1] < col_idx_[p],
              "column indices must be sorted and unique");
    }
  }
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(n) + 1);
  std::vector<std::int32_t> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i <= n; ++i) ptr[i] = i;
  for (Index i = 0; i < n; ++i) idx[i] = static_cast<std::int32_t>(i);
  return SparseMatrix(n, n, std::move(ptr), std::move(idx),
                      std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    require(t.row >= 0 && t.row < rows && t.col >= 0 && t.col < cols, "triplet out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<std::int32_t> idx;
  std::vector<double> val;
  idx.reserve(triplets.size());
  val.reserve(triplets.size());
  for (std::size_t p = 0; p < triplets.size(); ++p) {
    const auto& t = triplets[p];
    if (p > 0 && triplets[p - 1].row == t.row && triplets[p - 1].col == t.col) {
      val.back() += t.value;
      continue;
    }
    idx.push_back(static_cast<std::int32_t>(t.col));
    val.push_back(t.value);
    ++ptr[t.row + 1];
  }
  for (Index r = 0; r < rows; ++r) ptr[r + 1] += ptr[r];
  return SparseMatrix(rows, cols, std::move(ptr), std::move(idx), std::move(val));
}

Index SparseMatrix::find(Index r, Index c) const {
  if (r < 0 || r >= rows_) return -1;
  const auto first = col_idx_.begin() + row_ptr_[r];
  const auto last = col_idx_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(c));
  if (it == last || *it != c) return -1;
  return it - col_idx_.begin();
}

double SparseMatrix::at(Index r, Index c) const {
  const Index p = find(r, c);
  return p < 0 ? 0.0 : values_[p];
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
  for (Index r = 0; r < static_cast<Index>(d.size()); ++r) d[r] = at(r, r);
  return d;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(cols_) + 1, 0);
  for (auto c : col_idx_) ++ptr[c + 1];
  for (Index c = 0; c < cols_; ++c) ptr[c + 1] += ptr[c];
  std::vector<std::int32_t> idx(col_idx_.size());
  std::vector<double> val(values_.size());
  std::vector<std::int64_t> next(ptr.begin(), ptr.end() - 1);
  // Rows visited in increasing order keep each transposed row sorted.
  for (Index r = 0; r < rows_; ++r) {
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const auto dst = next[col_idx_[p]]++;
      idx[dst] = static_cast<std::int32_t>(r);
      val[dst] = values_[p];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(ptr), std::move(idx), std::move(val));
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  require(static_cast<Index>(x.size()) == cols_ && static_cast<Index>(y.size()) == rows_,
          "spmv dimension mismatch");
  const std::int64_t* ptr = row_ptr_.data();
  const std::int32_t* idx = col_idx_.data();
  const double* val = values_.data();
  const double* px = x.data();
  double* py = y.data();
#pragma omp parallel for schedule(static) if (rows_ > 16384)
  for (Index r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (auto p = ptr[r]; p < ptr[r + 1]; ++p) s += val[p] * px[idx[p]];
    py[r] = s;
  }
}

void SparseMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  require(static_cast<Index>(x.size()) == rows_ && static_cast<Index>(y.size()) == cols_,
          "transpose spmv dimension mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (Index r = 0; r < rows_; ++r) {
    const double xr = x[r];
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) y[col_idx_[p]] += values_[p] * xr;
  }
}

void SparseMatrix::residual(std::span<const double> b, std::span<const double> x,
                            std::span<double> r) const {
  require(static_cast<Index>(b.size()) == rows_ && static_cast<Index>(x.size()) == cols_ &&
              static_cast<Index>(r.size()) == rows_,
          "residual dimension mismatch");
  const std::int64_t* ptr = row_ptr_.data();
  const std::int32_t* idx = col_idx_.data();
  const double* val = values_.data();
  const double* px = x.data();
#pragma omp parallel for schedule(static) if (rows_ > 16384)
  for (Index i = 0; i < rows_; ++i) {
    double s = b[i];
    for (auto p = ptr[i]; p < ptr[i + 1]; ++p) s -= val[p] * px[idx[p]];
    r[i] = s;
  }
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) {
  std::vector<double> y(static_cast<std::size_t>(a.rows()));
  a.multiply(x, y);
  return y;
}

std::vector<double> transpose_spmv(const SparseMatrix& a, std::span<const double> x) {
  std::vector<double> y(static_cast<std::size_t>(a.cols()));
  a.multiply_transpose(x, y);
  return y;
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "matrix product dimension mismatch: " << a.rows() << "x" << a.cols() << " * "
       << b.rows() << "x" << b.cols();
    throw DimensionError(os.str());
  }
  const auto aptr = a.row_ptr();
  const auto aidx = a.col_idx();
  const auto aval = a.values();
  const auto bptr = b.row_ptr();
  const auto bidx = b.col_idx();
  const auto bval = b.values();

  std::vector<std::int64_t> ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<std::int32_t> idx;
  std::vector<double> val;
  idx.reserve(static_cast<std::size_t>(a.nnz()));
  val.reserve(static_cast<std::size_t>(a.nnz()));

  // Dense accumulator indexed by column; marker holds the row that last
  // touched the slot.
  std::vector<double> acc(static_cast<std::size_t>(b.cols()), 0.0);
  std::vector<Index> marker(static_cast<std::size_t>(b.cols()), -1);
  std::vector<std::int32_t> cols;
  for (Index r = 0; r < a.rows(); ++r) {
    cols.clear();
    for (auto p = aptr[r]; p < aptr[r + 1]; ++p) {
      const double av = aval[p];
      const auto k = aidx[p];
      for (auto q = bptr[k]; q < bptr[k + 1]; ++q) {
        const auto c = bidx[q];
        if (marker[c] != r) {
          marker[c] = r;
          acc[c] = 0.0;
          cols.push_back(c);
        }
        acc[c] += av * bval[q];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (auto c : cols) {
      idx.push_back(c);
      val.push_back(acc[c]);
    }
    ptr[r + 1] = static_cast<std::int64_t>(idx.size());
  }
  return SparseMatrix(a.rows(), b.cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix galerkin_product(const SparseMatrix& fine, const SparseMatrix& prolongation) {
  if (fine.rows() != fine.cols() || fine.cols() != prolongation.rows()) {
    throw DimensionError("Galerkin product requires square J and P with matching rows");
  }
  return multiply(prolongation.transposed(), multiply(fine, prolongation));
}

}  // namespace sttopo
