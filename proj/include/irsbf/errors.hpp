#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irsbf {

/// Argument violates a documented precondition (K < 2, eps outside its sector, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mismatched lengths between a configuration and a channel.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every bucket of some element is empty, so no conditional mean exists.
class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A statistic the caller asked for was not recorded (e.g. complex means).
class MissingData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive search would exceed its enumeration budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration text could not be parsed; carries the 1-based line number (0 = whole document).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace irsbf
