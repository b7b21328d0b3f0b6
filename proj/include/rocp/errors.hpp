// SPDX-License-Identifier: Apache-2.0
//
// Exception types thrown by the library. Every failure mode that callers are
// expected to handle has its own type; all derive from rocp::Error.

#pragma once

#include <stdexcept>
#include <string>

namespace rocp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A vector or matrix dimension does not match the operator it is fed to.
struct DimensionMismatch : Error {
  using Error::Error;
};

// The diffusion coefficient is not strictly positive at a quadrature point.
struct NonPositiveCoefficient : Error {
  using Error::Error;
};

// A realized random field takes a non-positive value.
struct NonPositiveField : Error {
  using Error::Error;
};

// More expansion modes requested than the discretization can provide.
struct TruncationTooLarge : Error {
  using Error::Error;
};

// A tensor rule or sample budget exceeds the configured node cap.
struct BudgetExceeded : Error {
  using Error::Error;
};

// A dense or exact-core computation was requested above its size cap.
struct SizeCapExceeded : Error {
  using Error::Error;
};

// An inner (per-sample) solve missed its tolerance.
struct InnerSolveFailure : Error {
  using Error::Error;
};

// The dense core solve inside a matched preconditioner failed.
struct CoreSolveFailure : Error {
  using Error::Error;
};

// Configuration rejected; carries human-readable diagnostics.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rocp
