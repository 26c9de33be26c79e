#pragma once

#include <stdexcept>
#include <string>

namespace mdm {

/// Base class for every error raised by the library. The CLI maps each
/// subclass to its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line (and column when known).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    std::string s = "line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ": " + what;
  }

  int line_;
  int column_;
};

/// A configured size, iteration, or time limit was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (non-positive forecast variance, singular basis, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdm
