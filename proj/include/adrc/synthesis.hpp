#pragma once

// Gain synthesis for linear ADRC with an extended state observer of order
// rho+1. The closed-loop characteristic polynomial is mapped back onto the
// nominal (a = 0) problem, whose polynomial factors into the controller and
// observer companion polynomials.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adrc/plant.hpp"
#include "adrc/poly.hpp"

namespace adrc {

/// u = -(K xhat + dhat) / b_hat, observer gain G on the output error.
struct AdrcGains {
  Vector K;  // k_1 .. k_rho
  Vector G;  // g_1 .. g_{rho+1}
  double b_hat = 1.0;

  std::size_t rho() const { return static_cast<std::size_t>(K.size()); }
  void Validate() const;
};

/// Either a conjugate-closed pole set or a monic real polynomial.
class DesiredSpectrum {
 public:
  static DesiredSpectrum FromPoles(RootSet poles);
  static DesiredSpectrum FromPoly(RealPoly poly);

  RealPoly poly() const;
  std::size_t degree() const;
  /// Null when the spectrum was given by coefficients.
  const RootSet* poles() const { return std::get_if<RootSet>(&value_); }
  /// Roots of the polynomial when only coefficients are known.
  RootSet roots() const;

 private:
  explicit DesiredSpectrum(std::variant<RootSet, RealPoly> v) : value_(std::move(v)) {}
  std::variant<RootSet, RealPoly> value_;
};

struct SynthesisReport {
  AdrcGains gains;
  RealPoly desired_poly;      // q*
  RealPoly nominal_poly;      // q-hat*, to be matched by the nominal loop
  RealPoly controller_factor; // s^rho + k_rho s^(rho-1) + ... + k_1
  RealPoly observer_factor;   // s^(rho+1) + g_1 s^rho + ... + g_{rho+1}
  RootSet controller_roots;
  RootSet observer_roots;
  SplitPolicy split_policy_used;
  RootSet closed_loop_eig;
  double max_pole_residual = 0.0;
};

/// Product of controller and observer companion polynomials. At rho = 3 the
/// seven coefficients are evaluated term by term.
RealPoly NominalCoeffs(const AdrcGains& gains);
/// The rho = 3 closed forms for q-hat_0 .. q-hat_6 (plus the leading 1).
RealPoly NominalCoeffsRho3(const Vector& K, const Vector& G);

/// Gains read off companion-form factors.
Vector GainsFromControllerFactor(const RealPoly& factor);
Vector GainsFromObserverFactor(const RealPoly& factor);
RealPoly ControllerFactor(const Vector& K);
RealPoly ObserverFactor(const Vector& G);

/// Affine map between nominal and actual closed-loop coefficients,
/// q[0..2rho] = L * q_hat[0..2rho] + c.
struct AffineCoeffMap {
  Matrix L;
  Vector c;
};

/// Identifies the map by evaluating the closed-loop characteristic polynomial
/// at 2rho+2 gain settings whose nominal images form an affine basis.
AffineCoeffMap IdentifyCoeffMap(const CanonicalPlant& plant, double b_hat);

/// q-hat* such that any gains with NominalCoeffs = q-hat* give the desired
/// closed-loop polynomial. Closed-form recursion at rho = 3, probed affine map
/// otherwise.
RealPoly TransformDesired(const DesiredSpectrum& desired, const CanonicalPlant& plant, double b_hat);
/// Always uses the probed map; the rho = 3 recursion is cross-checked against it.
RealPoly TransformDesiredByProbing(const DesiredSpectrum& desired, const CanonicalPlant& plant,
                                   double b_hat);

/// Splits the roots of q-hat* (rho to K, rho+1 to G). `known_roots`, when
/// given, are used instead of a numerical root solve.
SynthesisReport GainsFromNominal(const RealPoly& q_hat_star, std::size_t rho, double b_hat,
                                 const SplitPolicy& policy, const RootSet* known_roots = nullptr);

SynthesisReport Synthesize(const CanonicalPlant& plant, double b_hat, const DesiredSpectrum& desired,
                           const SplitPolicy& policy = {});

/// sgn(b).
double DefaultBHat(double b);

struct BandwidthGains {
  Vector K;
  Vector G;
};

/// All controller poles at -omega_c and all observer poles at -omega_o.
BandwidthGains BandwidthGainsFor(double omega_c, double omega_o, std::size_t rho);

/// g_i = alpha_i / epsilon^i. Throws NotHurwitz when the alpha companion is not.
Vector HighGainObserver(const Vector& alpha, double epsilon);

struct ConjectureTrial {
  std::size_t index = 0;
  double residual = 0.0;
  bool ok = false;
  std::string error;  // non-empty when synthesis threw
};

struct ConjectureReport {
  std::size_t rho = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<ConjectureTrial> results;
  double max_residual = 0.0;
  bool pass = false;
};

inline constexpr double kConjectureTol = 1e-5;

/// Random plants, b, b_hat and stable pole sets; each trial is synthesized and
/// its closed-loop spectrum compared against the request.
ConjectureReport VerifyConjecture(std::size_t rho, std::size_t trials, std::uint64_t seed,
                                  unsigned jobs = 1);

}  // namespace adrc
