// Error types thrown by the library. Each maps to one failure class of the
// public contracts; catching ggsp::Error catches all of them.
#pragma once

#include <stdexcept>
#include <string>

namespace ggsp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input data is degenerate (duplicate points, T=0, ...).
struct DegenerateInput : Error {
  using Error::Error;
};

// A matrix handed to a spectral routine is not a valid shift operator.
struct InvalidOperator : Error {
  using Error::Error;
};

// Argument outside the function's domain (t outside [-pi,pi], p <= 0, ...).
struct DomainError : Error {
  using Error::Error;
};

// Requested model order exceeds what the basis supports (K1 > N).
struct ModelOrderError : Error {
  using Error::Error;
};

// The mixture family violates a model assumption (pi0 outside (0,1),
// negative f1 beyond tolerance).
struct ModelViolation : Error {
  using Error::Error;
};

// Non-finite value produced where a finite one is required.
struct NumericalError : Error {
  using Error::Error;
};

struct EmptySample : Error {
  using Error::Error;
};

// Mismatched lengths between paired sequences.
struct ShapeError : Error {
  using Error::Error;
};

struct IOError : Error {
  using Error::Error;
};

// Run configuration failed schema or invariant validation.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace ggsp
