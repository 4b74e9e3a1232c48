#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace tipcast {

/// Invalid caller input: wrong dimensions, non-finite values, bad configuration.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite or otherwise unusable number.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data cannot support the requested operation (too short, degenerate).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required feature (crossing, root, equilibrium) does not exist in the data.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by otherwise well-formed input.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when the file-based bridge to the sequence-model component cannot run.
class ExternalToolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ingest failure naming the offending row/column.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& what, std::size_t row, std::string column)
      : std::runtime_error(compose(what, row, column)), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  static std::string compose(const std::string& what, std::size_t row, const std::string& column) {
    std::string where;
    if (row > 0) where += "row " + std::to_string(row);
    if (!column.empty()) where += (where.empty() ? "column '" : ", column '") + column + "'";
    return where.empty() ? what : where + ": " + what;
  }

  std::size_t row_;
  std::string column_;
};

}  // namespace tipcast
