#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace detkit {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text that does not match the expected grammar. Carries the 1-based line
/// number when the failure can be pinned to one line (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A syntactically valid value outside its allowed range.
class RangeError : public Error {
 public:
  RangeError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Binary or structural format violation (tensor files, mismatched dimensions).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Geometry that collapsed to zero area where a real box was required.
class DegenerateBoxError : public Error {
 public:
  using Error::Error;
};

}  // namespace detkit
