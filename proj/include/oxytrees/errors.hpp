#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oxytrees {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of operands do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Iterative numerics failed or a denominator vanished.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A metric is undefined for the given labels (single class, no positives).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace oxytrees
