#pragma once

#include <stdexcept>
#include <string>

namespace bridgekit {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Cholesky factorization hit a pivot <= 0.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

// A linear system required by an estimator or criterion is numerically singular.
struct SingularSystem : Error {
  using Error::Error;
};

// lqa_weight was asked for a coefficient that should have been pruned.
struct DegenerateCoefficient : Error {
  using Error::Error;
};

// A covariate column has zero sample variance and cannot be scaled.
struct ConstantColumn : Error {
  using Error::Error;
};

// A data file does not have the expected row/column layout.
struct WrongShape : Error {
  using Error::Error;
};

// A cell in a data file failed to parse; carries its 1-based location.
struct ParseError : Error {
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct IoError : Error {
  using Error::Error;
};

struct UnknownSetting : Error {
  using Error::Error;
};

// Iterative baseline solver exhausted its sweep budget.
struct NonConvergence : Error {
  using Error::Error;
};

// Every grid point in a selection scan came back invalid.
struct NoValidCandidate : Error {
  using Error::Error;
};

}  // namespace bridgekit
