#pragma once

#include <stdexcept>
#include <string>

namespace pulseforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operator handed to decompose() does not lie in the span of the basis.
struct NotInSpan : Error {
  using Error::Error;
};

// Basis Gram matrix is too ill-conditioned to invert reliably.
struct SingularGram : Error {
  using Error::Error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

struct OutOfDomain : Error {
  using Error::Error;
};

// Adaptive step size underflowed; usually pathological field amplitudes.
struct IntegratorFailure : Error {
  using Error::Error;
};

// Frame-coefficient validation against direct conjugation failed; wrong
// structure constants or a basis that does not close.
struct ClosureViolation : Error {
  using Error::Error;
};

struct UnsupportedOrder : Error {
  using Error::Error;
};

struct QuadratureFailure : Error {
  using Error::Error;
};

// A system declared exactly solvable has a residual above tolerance: the
// declared control constraints cannot cancel the error at this order.
struct NoSolution : Error {
  using Error::Error;
};

// Correction coefficients grew by more than the divergence factor between
// consecutive orders; the correction series is not converging.
struct DivergingCorrection : Error {
  using Error::Error;
};

struct NoRootFound : Error {
  using Error::Error;
};

// A dropped equation row corresponds to an operator with support inside the
// computational subspace.
struct InvalidDrop : Error {
  using Error::Error;
};

struct TruncationError : Error {
  using Error::Error;
};

struct FitFailure : Error {
  using Error::Error;
};

struct InsufficientBandwidth : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace pulseforge
