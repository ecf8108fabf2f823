#pragma once

#include <stdexcept>
#include <string>

namespace softarm {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad sizes, ranges, option combinations).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Geometrically impossible request (e.g. tendon channel radius times
// curvature reaching unity).
class GeometryViolation : public Error {
 public:
  using Error::Error;
};

// A well-posed inverse problem has no solution for the given data.
class NoSolution : public Error {
 public:
  using Error::Error;
};

// Iterative solver did not converge; carries the last gradient norm.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double gradient_norm)
      : Error(what), gradient_norm_(gradient_norm) {}
  double gradient_norm() const { return gradient_norm_; }

 private:
  double gradient_norm_ = 0.0;
};

// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// Invalid project configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace softarm
