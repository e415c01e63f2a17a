#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid numeric parameter (filter band, step size, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input carries no usable information (all-zero epoch, constant data).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Sequence or timestamp went backwards.
class OrderingError : public Error {
 public:
  using Error::Error;
};

/// Operation not valid in the current lifecycle phase.
class StateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace oow
