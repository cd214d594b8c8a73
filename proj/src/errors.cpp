#include "gridot/errors.hpp"

#include <utility>

namespace gridot {

ParseError::ParseError(std::size_t row, const std::string& what)
    : std::runtime_error(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
      row_(row) {}

OutOfSupportError::OutOfSupportError(std::vector<std::size_t> indices, const std::string& what)
    : std::runtime_error(what), indices_(std::move(indices)) {}

}  // namespace gridot
