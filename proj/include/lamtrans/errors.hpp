#pragma once

#include <stdexcept>
#include <string>

namespace lamtrans {

// Base class for all failures raised by the library. Every condition that a
// caller may want to branch on gets its own type below; the what() string
// carries the numeric context (offending index, magnitude, threshold).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NonFiniteEntry : Error {
  using Error::Error;
};

// Eigen-solver failure or eigenvector matrix too ill-conditioned to trust.
struct NonDiagonalizable : Error {
  using Error::Error;
};

// Matrix square root requested for a spectrum touching the closed negative
// real axis, where the principal branch is undefined.
struct NegativeRealEigenvalue : Error {
  using Error::Error;
};

// Pivot breakdown in a dense solve.
struct SingularSystem : Error {
  using Error::Error;
};

// Base for breakdowns pinned to an isolated spectral node; the quadrature
// engine recovers from these by nudging the abscissa.
struct SingularNode : Error {
  using Error::Error;
};

// q_m numerically singular; the value/derivative to exponential-coefficient
// conversion needs q_m^{-1}.
struct SingularWavenumber : SingularNode {
  using SingularNode::SingularNode;
};

// Boundary image of the fundamental pair not invertible at this spectral
// parameter (isolated lambda; callers drop the node and re-panel).
struct SingularBoundaryImage : SingularNode {
  using SingularNode::SingularNode;
};

// Fundamental block Omega_j singular where the dual kernel was requested.
struct SingularWronskian : SingularNode {
  using SingularNode::SingularNode;
};

// The boundary-symbol matrix of the closed-form half-space kernel is not
// invertible at this node.
struct SingularSymbol : SingularNode {
  using SingularNode::SingularNode;
};

// Interface abscissas not strictly increasing.
struct NonIncreasingInterfaces : Error {
  using Error::Error;
};

// A layer coefficient matrix failed its (semi-)definiteness requirement.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

// An interface block system M_mk failed its invertibility certificate.
struct InvertibilityViolation : Error {
  using Error::Error;
};

// A field's decay witness is too weak to truncate the half-line integral
// within the requested budget.
struct TailNotResolved : Error {
  using Error::Error;
};

// Adaptive panel refinement hit its panel budget before meeting either the
// oscillation-resolution rule or the panel tolerance.
struct OscillationBudgetExceeded : Error {
  using Error::Error;
};

// The supplied field does not meet the hypotheses an identity requires
// (e.g. its conjugation-condition residual is too large), so applying the
// identity would silently produce garbage.
struct HypothesisViolated : Error {
  using Error::Error;
};

// Oracle time step exceeds the accuracy precondition.
struct StepTooLarge : Error {
  using Error::Error;
};

// Finite-difference stencil would straddle a material discontinuity.
struct PointTooCloseToInterface : Error {
  using Error::Error;
};

// A load's support in y is unbounded or otherwise unusable for the classical
// Fourier image quadrature.
struct UnresolvedSupport : Error {
  using Error::Error;
};

// Too few grid nodes for the finite-difference stencils in use.
struct GridTooCoarse : Error {
  using Error::Error;
};

// Malformed or inconsistent configuration input.
struct BadConfig : Error {
  using Error::Error;
};

}  // namespace lamtrans
