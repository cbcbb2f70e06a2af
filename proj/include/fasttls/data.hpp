#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fasttls/matrix.hpp"
#include "fasttls/random.hpp"

namespace fasttls {

// A regression instance: predictors A and responses B with matching heights.
struct Instance {
  Matrix a;
  Matrix b;
  std::string label;
  std::vector<std::pair<std::string, double>> params;

  Index rows() const { return a.rows(); }
};

// 3x2 sparse system whose ordinary and total solutions differ by design:
// correcting only B costs 9, correcting both sides costs 1.
inline Instance gen_toy() {
  using T = SparseMatrix::Triplet;
  Instance out;
  out.a = SparseMatrix::from_triplets(3, 2, {T{0, 0, 1.0}, T{1, 1, 1.0}});
  out.b = SparseMatrix::from_triplets(3, 1, {T{2, 0, 3.0}});
  out.label = "toy";
  return out;
}

// 20k x 2k unit-diagonal predictor block with a single off-span response
// spike; exact costs are 1 (total) and 9 (ordinary) for every k.
inline Instance gen_identity_family(Index k) {
  if (k < 1) throw DegenerateInputError("gen_identity_family: k must be >= 1");
  using T = SparseMatrix::Triplet;
  std::vector<T> a_trip;
  for (Index i = 0; i < 2 * k; ++i) a_trip.push_back(T{i, i, 1.0});
  Instance out;
  out.a = SparseMatrix::from_triplets(20 * k, 2 * k, std::move(a_trip));
  out.b = SparseMatrix::from_triplets(20 * k, 1, {T{2 * k, 0, 3.0}});
  out.label = "identity";
  out.params.emplace_back("k", static_cast<double>(k));
  return out;
}

// Dense 20k x 2k standard-normal predictors with responses of standard
// deviation 3.
inline Instance gen_gaussian_family(Index k, std::uint64_t seed) {
  if (k < 1) throw DegenerateInputError("gen_gaussian_family: k must be >= 1");
  Rng rng(derive_seed(seed, "gaussian-family"));
  DenseMatrix a(20 * k, 2 * k);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  DenseMatrix b(20 * k, 1);
  for (Index i = 0; i < b.rows(); ++i) b(i, 0) = 3.0 * rng.normal();
  Instance out;
  out.a = std::move(a);
  out.b = std::move(b);
  out.label = "gaussian";
  out.params.emplace_back("k", static_cast<double>(k));
  out.params.emplace_back("seed", static_cast<double>(seed));
  return out;
}

// 10x5 unit-diagonal block with the response spike at row 6.
inline Instance gen_toy_appendix() {
  using T = SparseMatrix::Triplet;
  std::vector<T> a_trip;
  for (Index i = 0; i < 5; ++i) a_trip.push_back(T{i, i, 1.0});
  Instance out;
  out.a = SparseMatrix::from_triplets(10, 5, std::move(a_trip));
  out.b = SparseMatrix::from_triplets(10, 1, {T{5, 0, 3.0}});
  out.label = "toy-appendix";
  return out;
}

// 10x5 standard-normal predictors, 10x1 responses with standard deviation 3.
inline Instance gen_small_gaussian(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "small-gaussian"));
  DenseMatrix a(10, 5);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  DenseMatrix b(10, 1);
  for (Index i = 0; i < b.rows(); ++i) b(i, 0) = 3.0 * rng.normal();
  Instance out;
  out.a = std::move(a);
  out.b = std::move(b);
  out.label = "small-gaussian";
  out.params.emplace_back("seed", static_cast<double>(seed));
  return out;
}

// Appends zero rows until the instance has target_m rows; shapes the timing
// experiments without changing any solution cost.
inline Instance pad_rows(const Instance& in, Index target_m) {
  if (target_m < in.rows()) throw DegenerateInputError("pad_rows: target is below current height");
  if (target_m == in.rows()) return in;
  auto pad = [&](const Matrix& m) -> Matrix {
    if (const auto* s = m.as_sparse()) {
      std::vector<Index> row_ptr(s->row_ptr().begin(), s->row_ptr().end());
      row_ptr.resize(static_cast<std::size_t>(target_m) + 1, s->row_ptr().back());
      return SparseMatrix(target_m, s->cols(), std::move(row_ptr),
                          {s->col_idx().begin(), s->col_idx().end()},
                          {s->values().begin(), s->values().end()});
    }
    const DenseMatrix& dm = *m.as_dense();
    DenseMatrix out(target_m, dm.cols());
    for (Index i = 0; i < dm.rows(); ++i)
      std::copy(dm.row(i).begin(), dm.row(i).end(), out.row(i).begin());
    return out;
  };
  Instance out;
  out.a = pad(in.a);
  out.b = pad(in.b);
  out.label = in.label;
  out.params = in.params;
  out.params.emplace_back("pad_rows", static_cast<double>(target_m));
  return out;
}

struct CsvOptions {
  char delimiter = ',';
  bool header = false;
  std::vector<Index> response_cols;  // when nonempty, overrides n_predictors
};

namespace detail {

inline double parse_cell(const std::string& cell, Index row, Index col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  if (begin == end) throw IngestionError("empty cell", row, col);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw IngestionError("cell is not numeric: '" + std::string(begin, end) + "'", row, col);
  return value;
}

inline std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string current;
  for (char ch : line) {
    if (ch == delimiter) {
      cells.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  cells.push_back(std::move(current));
  return cells;
}

}  // namespace detail

// Reads a rectangular numeric table. The first n_predictors columns become A
// and the rest become B, unless response_cols names the response columns
// explicitly.
inline Instance load_csv(const std::string& path, Index n_predictors,
                         const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  std::vector<std::vector<double>> table;
  std::string line;
  Index line_no = 0;
  bool skipped_header = !options.header;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto cells = detail::split_line(line, options.delimiter);
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw IngestionError("ragged row: expected " + std::to_string(width) + " cells, found " +
                               std::to_string(cells.size()),
                           line_no, static_cast<Index>(cells.size()));
    std::vector<double> row;
    row.reserve(width);
    for (std::size_t jc = 0; jc < cells.size(); ++jc)
      row.push_back(detail::parse_cell(cells[jc], line_no, static_cast<Index>(jc) + 1));
    table.push_back(std::move(row));
  }
  if (table.empty()) throw IngestionError("no data rows in '" + path + "'");

  const Index cols = static_cast<Index>(width);
  std::vector<bool> is_response(width, false);
  if (!options.response_cols.empty()) {
    for (Index j : options.response_cols) {
      if (j < 0 || j >= cols)
        throw IngestionError("response column out of range", 0, j);
      is_response[static_cast<std::size_t>(j)] = true;
    }
  } else {
    if (n_predictors < 1 || n_predictors >= cols)
      throw IngestionError("n_predictors must be in [1, columns-1], got " +
                               std::to_string(n_predictors),
                           0, cols);
    for (Index j = n_predictors; j < cols; ++j) is_response[static_cast<std::size_t>(j)] = true;
  }

  Index n = 0, d = 0;
  for (bool r : is_response) (r ? d : n) += 1;
  if (n == 0 || d == 0) throw IngestionError("predictor/response split leaves one side empty");

  const Index m = static_cast<Index>(table.size());
  DenseMatrix a(m, n), b(m, d);
  for (Index i = 0; i < m; ++i) {
    Index ja = 0, jb = 0;
    for (Index j = 0; j < cols; ++j) {
      const double v = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (is_response[static_cast<std::size_t>(j)])
        b(i, jb++) = v;
      else
        a(i, ja++) = v;
    }
  }
  Instance out;
  out.a = std::move(a);
  out.b = std::move(b);
  out.label = path;
  return out;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// On-disk form: a shape header line "m n d", then m space-separated rows of
// A followed by B.
inline void save_instance(const Instance& inst, std::ostream& out) {
  const Index m = inst.rows();
  const Index n = inst.a.cols();
  const Index d = inst.b.cols();
  out << m << ' ' << n << ' ' << d << '\n';
  const DenseMatrix a = inst.a.to_dense();
  const DenseMatrix b = inst.b.to_dense();
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (j) out << ' ';
      out << detail::format_double(a(i, j));
    }
    for (Index j = 0; j < d; ++j) out << ' ' << detail::format_double(b(i, j));
    out << '\n';
  }
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  save_instance(inst, out);
}

inline Instance load_instance(std::istream& in, const std::string& name = "<stream>") {
  Index m = 0, n = 0, d = 0;
  if (!(in >> m >> n >> d) || m < 1 || n < 1 || d < 1)
    throw IngestionError("bad shape header in '" + name + "'", 1, 1);
  DenseMatrix a(m, n), b(m, d);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j)
      if (!(in >> a(i, j))) throw IngestionError("truncated row", i + 2, j + 1);
    for (Index j = 0; j < d; ++j)
      if (!(in >> b(i, j))) throw IngestionError("truncated row", i + 2, n + j + 1);
  }
  Instance out;
  out.a = std::move(a);
  out.b = std::move(b);
  out.label = name;
  return out;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  return load_instance(in, path);
}

inline void write_csv(const Instance& inst, std::ostream& out, char delimiter = ',') {
  const DenseMatrix a = inst.a.to_dense();
  const DenseMatrix b = inst.b.to_dense();
  for (Index i = 0; i < inst.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << delimiter;
      out << detail::format_double(a(i, j));
    }
    for (Index j = 0; j < b.cols(); ++j) out << delimiter << detail::format_double(b(i, j));
    out << '\n';
  }
}

}  // namespace fasttls
