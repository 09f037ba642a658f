#pragma once

#include <stdexcept>
#include <string>

namespace msftgcn {

// Root of every error thrown by the library. The CLI maps any Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor or matrix dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A scalar argument outside its admissible interval.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Singular systems, NaN/Inf in values or gradients, diverging losses.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Invalid input data: negative weights, non-finite values, bad node ids.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed text input (CSV, JSON, range lists).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Malformed binary container.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Inconsistent or unsatisfiable configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An index outside the admissible range (e.g. not enough history for an anchor).
class RangeError : public Error {
 public:
  using Error::Error;
};

// A call that violates an API contract (non-normalized adjacency, double backward, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace msftgcn
