#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geofreq {

/// Base of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required column is absent or a header is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A data row failed to parse or violated a record invariant.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Inputs are individually valid but inconsistent with each other.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a mathematical operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge or produced non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Text that does not follow an expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace geofreq
