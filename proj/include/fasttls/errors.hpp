#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fasttls {

// Shapes of two operands do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An input is unusable for the requested operation (zero matrix, empty
// system, non-finite entry).
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A matrix factorization did not converge; carries the operand shape.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, std::int64_t rows, std::int64_t cols)
      : std::runtime_error(what + " (operand " + std::to_string(rows) + "x" +
                           std::to_string(cols) + ")"),
        rows_(rows),
        cols_(cols) {}

  std::int64_t rows() const noexcept { return rows_; }
  std::int64_t cols() const noexcept { return cols_; }

 private:
  std::int64_t rows_;
  std::int64_t cols_;
};

// The column-repair loop could not restore full rank in a sketched system.
class RankRepairError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal bookkeeping (e.g. a repair map) is inconsistent with the data it
// is applied to.
class CorruptedStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A data file could not be parsed; carries the 1-based location.
class IngestionError : public std::runtime_error {
 public:
  IngestionError(const std::string& what, std::int64_t row, std::int64_t col)
      : std::runtime_error(what + " (row " + std::to_string(row) + ", column " +
                           std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  explicit IngestionError(const std::string& what) : std::runtime_error(what), row_(0), col_(0) {}

  std::int64_t row() const noexcept { return row_; }
  std::int64_t col() const noexcept { return col_; }

 private:
  std::int64_t row_;
  std::int64_t col_;
};

}  // namespace fasttls
