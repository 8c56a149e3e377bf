#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "adrc/poly.hpp"

namespace adrc {

/// z' = A z + B u + delta,  y = C z.
struct StateSpacePlant {
  Matrix A;
  Vector B;
  Eigen::RowVectorXd C;

  std::size_t order() const { return static_cast<std::size_t>(A.rows()); }
  void Validate() const;
};

/// Chain of rho integrators with all plant feedback in the last row:
/// x_rho' = a . x + d + b u,  y = x_1.
struct CanonicalPlant {
  Vector a;
  double b = 1.0;

  std::size_t rho() const { return static_cast<std::size_t>(a.size()); }
  void Validate() const;

  /// The (A, B, C) triple of the canonical form, with B = [0 ... 0 b]^T.
  StateSpacePlant AsStateSpace() const;
};

/// d(t) = sum_j weights[j] . delta^(j)(t). weights.back() is always C.
struct DisturbanceComposition {
  std::vector<Eigen::RowVectorXd> weights;
};

struct CanonicalizeOptions {
  /// |C A^(k-1) B| must exceed this times ||C|| ||B|| max(1,||A||)^(k-1).
  double markov_tol = 1e-10;
  /// Observability matrices at or above this condition number are rejected.
  double max_condition = 1e12;
};

std::size_t RelativeDegree(const StateSpacePlant& p, const CanonicalizeOptions& opts = {});

/// [C; CA; ...; CA^(N-1)].
Matrix ObservabilityMatrix(const StateSpacePlant& p);

struct CanonicalForm {
  CanonicalPlant plant;
  DisturbanceComposition disturbance;
};

/// Requires relative degree equal to the state dimension.
CanonicalForm ToCanonical(const StateSpacePlant& p, const CanonicalizeOptions& opts = {});

/// Numerator and denominator of C (sI - A)^{-1} B for a SISO triple, with the
/// denominator monic. Uses det(sI - A + B C) - det(sI - A) for the numerator.
std::pair<RealPoly, RealPoly> TransferFunction(const StateSpacePlant& p);

}  // namespace adrc
