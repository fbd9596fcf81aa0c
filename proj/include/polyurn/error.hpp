#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polyurn {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StructuralError : public Error {
 public:
  using Error::Error;
};

// Negative replacement entries: the urn can run out of balls.
class NotTenable : public StructuralError {
 public:
  NotTenable() : StructuralError("tensor has negative entries (not tenable)") {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotBalanced : public Error {
 public:
  NotBalanced() : Error("tensor is not balanced: column sums differ") {}
  explicit NotBalanced(const std::string& what) : Error(what) {}
};

class NotTwoColour : public Error {
 public:
  NotTwoColour() : Error("operation requires exactly two colours") {}
};

// Every point of the simplex is a fixed point, so there is no finite list.
class DegenerateFixedPoints : public Error {
 public:
  DegenerateFixedPoints() : Error("fixed-point equation vanishes identically on the simplex") {}
};

class EmptyUrn : public Error {
 public:
  EmptyUrn() : Error("urn has zero total mass") {}
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class NodeOutOfRange : public Error {
 public:
  using Error::Error;
};

class DepthMismatch : public Error {
 public:
  using Error::Error;
};

class CertificateViolated : public Error {
 public:
  using Error::Error;
};

class NotContractive : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Raised when a fixed-point iteration exhausts its budget. Carries the
/// last iterate and its residual so callers can still report them.
class MaxIterExceeded : public Error {
 public:
  MaxIterExceeded(std::vector<double> last_iterate, double residual, long iterations)
      : Error("fixed-point iteration did not converge after " + std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        iterations_(iterations) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  double residual_;
  long iterations_;
};

}  // namespace polyurn
