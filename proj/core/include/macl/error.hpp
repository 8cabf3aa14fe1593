#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace macl {

// Precondition or contract violation on library inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss, degenerate embedding and similar numerical failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t row, std::size_t column, const std::string& what)
      : Error(format(file, row, column, what)),
        file_(std::move(file)),
        row_(row),
        column_(column) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& file, std::size_t row, std::size_t column,
                            const std::string& what) {
    std::string out = file;
    if (row != 0) out += ":row " + std::to_string(row);
    if (column != 0) out += ":column " + std::to_string(column);
    return out + ": " + what;
  }

  std::string file_;
  std::size_t row_;
  std::size_t column_;
};

}  // namespace macl
