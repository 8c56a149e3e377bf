#pragma once

#include "adrc/plant.hpp"
#include "adrc/poly.hpp"
#include "adrc/synthesis.hpp"

namespace adrc {

/// Error-coordinate closed loop over [x; x_tilde; d_tilde] where
/// x_tilde = xhat - x and d_tilde = (b / b_hat) dhat - d_ss.
struct ClosedLoopSystem {
  Matrix A;  // (2rho+1) x (2rho+1)
  Vector B;  // injection of the time-varying disturbance part
  Matrix C;  // rho x (2rho+1) selector of x
};

ClosedLoopSystem BuildClosedLoop(const CanonicalPlant& plant, const AdrcGains& gains);
/// The A matrix of BuildClosedLoop assembled in long double.
ExtMatrix ClosedLoopMatrixExtended(const CanonicalPlant& plant, const AdrcGains& gains);

/// Closed-form closed-loop coefficients q_0 .. q_6 (rho = 3 only).
RealPoly CoeffMatch(const AdrcGains& gains, const CanonicalPlant& plant);

struct RationalTF {
  RealPoly num;
  RealPoly den;

  Complex operator()(Complex s) const { return num(s) / den(s); }
};

/// U(s) = -H(s) Y(s) for the ESO-based controller:
/// (q_rho s^rho + ... + q_0) / (b_hat s (s^rho + q_2rho s^(rho-1) + ... + q_(rho+1))).
RationalTF AdrcTransfer(const AdrcGains& gains);

/// Transfer function of the controller whose observer carries the plant model
/// (rho = 3).
RationalTF ModelBasedTransfer(const Vector& k_star, const Vector& g_star, const CanonicalPlant& plant);

/// ADRC gains whose transfer function equals ModelBasedTransfer(k_star, g_star, plant).
AdrcGains MatchModelBased(const Vector& k_star, const Vector& g_star, const CanonicalPlant& plant,
                          double b_hat, const SplitPolicy& policy = {});

/// State [integral of y; x] under u = -kP x1 - kD x2 - kI int(x1), rho = 3.
Matrix PidClosedLoop(const CanonicalPlant& plant, double kp, double ki, double kd);

/// a_3 < 0. The trace of PidClosedLoop is a_3 for every choice of gains.
bool PidNecessaryCondition(const CanonicalPlant& plant);

}  // namespace adrc
