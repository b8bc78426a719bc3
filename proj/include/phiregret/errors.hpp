#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phiregret {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NegativeEntryError : public Error {
 public:
  NegativeEntryError(std::size_t row, std::size_t col, double value)
      : Error("negative entry at (" + std::to_string(row) + "," +
              std::to_string(col) + "): " + std::to_string(value)),
        row(row),
        col(col) {}
  std::size_t row;
  std::size_t col;
};

class RowSumMismatchError : public Error {
 public:
  RowSumMismatchError(std::size_t row, double sum)
      : Error("row " + std::to_string(row) + " sums to " +
              std::to_string(sum) + ", expected 1"),
        row(row) {}
  std::size_t row;
};

class GradientOutOfRangeError : public Error {
 public:
  GradientOutOfRangeError(double value, double limit)
      : Error("gradient " + std::to_string(value) + " exceeds Lipschitz bound " +
              std::to_string(limit)) {}
};

class NoConvergenceError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class EpsOutOfRangeError : public Error {
 public:
  using Error::Error;
};

class NotPowerOfTwoError : public Error {
 public:
  using Error::Error;
};

class IdentityHasNoRowSupportError : public Error {
 public:
  IdentityHasNoRowSupportError()
      : Error("identity feature has no row support interval") {}
};

class OutOfOrderCallError : public Error {
 public:
  using Error::Error;
};

class InvariantViolationError : public Error {
 public:
  using Error::Error;
};

// Configuration errors carry the path of the offending field, e.g.
// "adversary.segments".
class ConfigError : public Error {
 public:
  ConfigError(std::string field_path, const std::string& what)
      : Error(field_path.empty() ? what : field_path + ": " + what),
        field_path(std::move(field_path)) {}
  std::string field_path;
};

}  // namespace phiregret
