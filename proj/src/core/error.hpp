#pragma once

#include <stdexcept>
#include <cstddef>
#include <string>
#include <utility>

namespace lfa {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MissingColumn,
  UnparseableField,
  EmptyFile,
  AllRemoved,
  DegenerateColumn,
  DimensionMismatch,
  NonfiniteLoss,
  SchemaMismatch,
  CorruptFile,
  InvalidBounds,
  BadBudget,
  CycleLimit,
  VerificationFailed,
  ZeroDenominator,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  // Location-carrying form used by the CSV reader. `row` is 1-based over data
  // rows (the header is row 0).
  Error(ErrorCode code, const std::string& message, std::size_t row,
        std::string column)
      : std::runtime_error(message),
        code_(code),
        row_(row),
        column_(std::move(column)) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  ErrorCode code_;
  std::size_t row_ = 0;
  std::string column_;
};

}  // namespace lfa
