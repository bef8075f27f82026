#ifndef PPD_ERROR_HPP
#define PPD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ppd {

/// Base class for every error raised by the library. `kind()` is a short
/// stable tag used by the command-line front end for machine-parsable output.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid input"; }
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension mismatch"; }
};

/// The rotational bootstrap needs r1 + r2 <= n to embed both bases orthogonally.
class BootstrapInfeasible : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "bootstrap infeasible"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), message_(what), line_(line), column_(column) {}
  const char* kind() const noexcept override { return "parse error"; }
  /// Description without the location suffix.
  const std::string& message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    std::string s = what + " at line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s;
  }
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace ppd

#endif  // PPD_ERROR_HPP
