#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridot {

/// Malformed input data. `row()` is 1-based; 0 when the error is not tied to a row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, const std::string& what);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One or more points fall outside the modelled support (outside the grid,
/// or inside a cell that carries no mass).
class OutOfSupportError : public std::runtime_error {
 public:
  OutOfSupportError(std::vector<std::size_t> indices, const std::string& what);
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

/// A restricted transportation problem admitted no feasible coupling.
/// Raised by the refinement driver, where this can only indicate a bug.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gridot
