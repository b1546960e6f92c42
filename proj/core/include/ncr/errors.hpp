#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ncr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter set or state violates its invariants.
class InvalidConfiguration : public Error {
 public:
  InvalidConfiguration(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Argument outside the domain of an operation (e.g. arc length off the backbone).
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// The beam-constraint-model system is singular or past the first buckling load.
class NonPhysicalLoad : public Error {
 public:
  NonPhysicalLoad(const std::string& what, double normalized_axial_load)
      : Error(what), axial_(normalized_axial_load) {}
  double normalized_axial_load() const noexcept { return axial_; }

 private:
  double axial_;
};

/// An iterative solver ran out of iterations.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual, std::size_t iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

/// No set of non-negative tensions reproduces the commanded cable lengths.
class InfeasibleDisplacement : public Error {
 public:
  using Error::Error;
};

/// Every contact-location candidate failed to produce an equilibrium.
class EstimationFailed : public Error {
 public:
  using Error::Error;
};

/// The load drifted during a reciprocation maneuver.
class RecalibrationAborted : public Error {
 public:
  using Error::Error;
};

/// The shooting oracle itself failed; a test-infrastructure error.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Line and column are 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }
  std::size_t line_;
  std::size_t column_;
};

}  // namespace ncr
