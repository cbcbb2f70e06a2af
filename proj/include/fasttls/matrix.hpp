#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "fasttls/errors.hpp"

namespace fasttls {

using Index = std::int64_t;

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense matrix, row-major storage. Entries are required to be finite when a
// filled matrix is constructed in one shot.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw DimensionError("DenseMatrix: negative shape");
    entries_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
  }

  DenseMatrix(Index rows, Index cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows < 0 || cols < 0) throw DimensionError("DenseMatrix: negative shape");
    if (entries_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
      throw DimensionError("DenseMatrix: entry count does not match shape");
    for (double v : entries_)
      if (!std::isfinite(v)) throw DegenerateInputError("DenseMatrix: non-finite entry");
  }

  static DenseMatrix identity(Index n) {
    DenseMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return rows_ * cols_; }

  double& operator()(Index i, Index j) { return entries_[static_cast<std::size_t>(i * cols_ + j)]; }
  double operator()(Index i, Index j) const {
    return entries_[static_cast<std::size_t>(i * cols_ + j)];
  }

  std::span<double> row(Index i) {
    return {entries_.data() + i * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const double> row(Index i) const {
    return {entries_.data() + i * cols_, static_cast<std::size_t>(cols_)};
  }

  double* data() noexcept { return entries_.data(); }
  const double* data() const noexcept { return entries_.data(); }

  Eigen::Map<EigenRowMajor> map() { return {entries_.data(), rows_, cols_}; }
  Eigen::Map<const EigenRowMajor> map() const { return {entries_.data(), rows_, cols_}; }

  static DenseMatrix from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    DenseMatrix out(m.rows(), m.cols());
    out.map() = m;
    return out;
  }

  Index nnz() const noexcept {
    return static_cast<Index>(std::count_if(entries_.begin(), entries_.end(),
                                            [](double v) { return v != 0.0; }));
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> entries_;
};

// Sparse matrix in compressed-row form.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
               std::vector<double> values)
      : rows_(rows),
        cols_(cols),
        row_ptr_(std::move(row_ptr)),
        col_idx_(std::move(col_idx)),
        values_(std::move(values)) {
    validate();
  }

  struct Triplet {
    Index row;
    Index col;
    double value;
  };

  // Duplicate coordinates are summed; explicit zeros are kept.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    std::vector<Index> row_ptr(static_cast<std::size_t>(rows) + 1, 0);
    std::vector<Index> col_idx;
    std::vector<double> values;
    col_idx.reserve(triplets.size());
    values.reserve(triplets.size());
    for (std::size_t i = 0; i < triplets.size();) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < triplets.size() && triplets[j].row == triplets[i].row &&
             triplets[j].col == triplets[i].col)
        sum += triplets[j++].value;
      col_idx.push_back(triplets[i].col);
      values.push_back(sum);
      ++row_ptr[static_cast<std::size_t>(triplets[i].row) + 1];
      i = j;
    }
    for (Index r = 0; r < rows; ++r) row_ptr[r + 1] += row_ptr[r];
    return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_ptr() const noexcept { return row_ptr_; }
  std::span<const Index> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  DenseMatrix to_dense() const {
    DenseMatrix out(rows_, cols_);
    for (Index i = 0; i < rows_; ++i)
      for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out(i, col_idx_[p]) = values_[p];
    return out;
  }

 private:
  void validate() const {
    if (rows_ < 0 || cols_ < 0) throw DimensionError("SparseMatrix: negative shape");
    if (row_ptr_.size() != static_cast<std::size_t>(rows_) + 1)
      throw DimensionError("SparseMatrix: row pointer length must be rows+1");
    if (row_ptr_.front() != 0 || row_ptr_.back() != static_cast<Index>(values_.size()))
      throw DimensionError("SparseMatrix: row pointers do not span the value array");
    if (col_idx_.size() != values_.size())
      throw DimensionError("SparseMatrix: index/value length mismatch");
    for (Index i = 0; i < rows_; ++i) {
      if (row_ptr_[i] > row_ptr_[i + 1])
        throw DimensionError("SparseMatrix: row pointers must be nondecreasing");
      for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        if (col_idx_[p] < 0 || col_idx_[p] >= cols_)
          throw DimensionError("SparseMatrix: column index out of range");
        if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1])
          throw DimensionError("SparseMatrix: column indices must be strictly increasing");
      }
    }
    for (double v : values_)
      if (!std::isfinite(v)) throw DegenerateInputError("SparseMatrix: non-finite entry");
  }

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_ = {0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

// Value type holding either representation. Operations that exploit sparsity
// take Matrix; purely dense kernels take DenseMatrix.
class Matrix {
 public:
  Matrix() : rep_(DenseMatrix()) {}
  Matrix(DenseMatrix m) : rep_(std::move(m)) {}
  Matrix(SparseMatrix m) : rep_(std::move(m)) {}

  Index rows() const {
    return std::visit([](const auto& m) { return m.rows(); }, rep_);
  }
  Index cols() const {
    return std::visit([](const auto& m) { return m.cols(); }, rep_);
  }
  Index nnz() const {
    return std::visit([](const auto& m) { return m.nnz(); }, rep_);
  }
  bool is_sparse() const noexcept { return std::holds_alternative<SparseMatrix>(rep_); }

  const DenseMatrix* as_dense() const noexcept { return std::get_if<DenseMatrix>(&rep_); }
  const SparseMatrix* as_sparse() const noexcept { return std::get_if<SparseMatrix>(&rep_); }

  DenseMatrix to_dense() const {
    if (const auto* d = as_dense()) return *d;
    return as_sparse()->to_dense();
  }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), rep_);
  }

 private:
  std::variant<DenseMatrix, SparseMatrix> rep_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(op) + ": shape mismatch");
}

inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  out.map().noalias() = a.map() * b.map();
  return out;
}

// Left operand may be sparse; result is dense.
inline DenseMatrix multiply(const Matrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimensions differ");
  if (const auto* d = a.as_dense()) return multiply(*d, b);
  const SparseMatrix& s = *a.as_sparse();
  DenseMatrix out(s.rows(), b.cols());
  const auto ptr = s.row_ptr();
  const auto idx = s.col_idx();
  const auto val = s.values();
  for (Index i = 0; i < s.rows(); ++i) {
    auto out_row = out.row(i);
    for (Index p = ptr[i]; p < ptr[i + 1]; ++p) {
      const double v = val[p];
      const auto b_row = b.row(idx[p]);
      for (Index j = 0; j < b.cols(); ++j) out_row[j] += v * b_row[j];
    }
  }
  return out;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols(), m.rows());
  out.map() = m.map().transpose();
  return out;
}

inline DenseMatrix hconcat(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("hconcat: row counts differ");
  DenseMatrix out(a.rows(), a.cols() + b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    std::copy(a.row(i).begin(), a.row(i).end(), dst.begin());
    std::copy(b.row(i).begin(), b.row(i).end(), dst.begin() + a.cols());
  }
  return out;
}

inline SparseMatrix hconcat(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("hconcat: row counts differ");
  std::vector<Index> row_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
  values.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      col_idx.push_back(a.col_idx()[p]);
      values.push_back(a.values()[p]);
    }
    for (Index p = b.row_ptr()[i]; p < b.row_ptr()[i + 1]; ++p) {
      col_idx.push_back(a.cols() + b.col_idx()[p]);
      values.push_back(b.values()[p]);
    }
    row_ptr[i + 1] = static_cast<Index>(values.size());
  }
  return SparseMatrix(a.rows(), a.cols() + b.cols(), std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

// Sparse representation survives only when both halves are sparse.
inline Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.is_sparse() && b.is_sparse()) return hconcat(*a.as_sparse(), *b.as_sparse());
  return hconcat(a.to_dense(), b.to_dense());
}

inline double frobenius_norm(const Matrix& m) {
  return m.visit([](const auto& mm) {
    double total = 0.0;
    if constexpr (std::is_same_v<std::decay_t<decltype(mm)>, DenseMatrix>) {
      for (Index i = 0; i < mm.rows(); ++i)
        for (double v : mm.row(i)) total += v * v;
    } else {
      for (double v : mm.values()) total += v * v;
    }
    return std::sqrt(total);
  });
}

namespace detail {

inline double sq_dist_rows(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    total += d * d;
  }
  return total;
}

inline double sq_dist_row_sparse_dense(const SparseMatrix& s, Index i,
                                       std::span<const double> dense_row) {
  double total = 0.0;
  for (double v : dense_row) total += v * v;
  for (Index p = s.row_ptr()[i]; p < s.row_ptr()[i + 1]; ++p) {
    const double d = dense_row[static_cast<std::size_t>(s.col_idx()[p])];
    const double v = s.values()[p];
    total += (v - d) * (v - d) - d * d;
  }
  return total;
}

inline double sq_dist_rows_sparse(const SparseMatrix& a, const SparseMatrix& b, Index i) {
  double total = 0.0;
  Index pa = a.row_ptr()[i], ea = a.row_ptr()[i + 1];
  Index pb = b.row_ptr()[i], eb = b.row_ptr()[i + 1];
  while (pa < ea || pb < eb) {
    if (pb >= eb || (pa < ea && a.col_idx()[pa] < b.col_idx()[pb])) {
      total += a.values()[pa] * a.values()[pa];
      ++pa;
    } else if (pa >= ea || b.col_idx()[pb] < a.col_idx()[pa]) {
      total += b.values()[pb] * b.values()[pb];
      ++pb;
    } else {
      const double d = a.values()[pa] - b.values()[pb];
      total += d * d;
      ++pa;
      ++pb;
    }
  }
  return total;
}

}  // namespace detail

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_distance");
  double total = 0.0;
  const auto* da = a.as_dense();
  const auto* db = b.as_dense();
  if (da && db) {
    for (Index i = 0; i < a.rows(); ++i) total += detail::sq_dist_rows(da->row(i), db->row(i));
  } else if (!da && !db) {
    for (Index i = 0; i < a.rows(); ++i)
      total += detail::sq_dist_rows_sparse(*a.as_sparse(), *b.as_sparse(), i);
  } else {
    const SparseMatrix& s = da ? *b.as_sparse() : *a.as_sparse();
    const DenseMatrix& d = da ? *da : *db;
    for (Index i = 0; i < a.rows(); ++i)
      total += detail::sq_dist_row_sparse_dense(s, i, d.row(i));
  }
  return std::sqrt(total);
}

// Rows [r0, r1) as a dense block.
inline DenseMatrix row_block(const Matrix& m, Index r0, Index r1) {
  if (r0 < 0 || r1 < r0 || r1 > m.rows()) throw DimensionError("row_block: range out of bounds");
  DenseMatrix out(r1 - r0, m.cols());
  if (const auto* d = m.as_dense()) {
    for (Index i = r0; i < r1; ++i)
      std::copy(d->row(i).begin(), d->row(i).end(), out.row(i - r0).begin());
  } else {
    const SparseMatrix& s = *m.as_sparse();
    for (Index i = r0; i < r1; ++i)
      for (Index p = s.row_ptr()[i]; p < s.row_ptr()[i + 1]; ++p)
        out(i - r0, s.col_idx()[p]) = s.values()[p];
  }
  return out;
}

inline double column_norm(const DenseMatrix& m, Index j) {
  double total = 0.0;
  for (Index i = 0; i < m.rows(); ++i) total += m(i, j) * m(i, j);
  return std::sqrt(total);
}

}  // namespace fasttls
