#include "adrc/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "adrc/closed_loop.hpp"
#include "adrc/errors.hpp"
#include "adrc/random.hpp"

namespace adrc {

void AdrcGains::Validate() const {
  if (K.size() < 1 || G.size() != K.size() + 1)
    throw Error(ErrorCode::kInvalidArgument, "gains need K of size rho and G of size rho+1");
  if (b_hat == 0.0) throw Error(ErrorCode::kInvalidArgument, "b_hat must be nonzero");
}

DesiredSpectrum DesiredSpectrum::FromPoles(RootSet poles) {
  if (!IsConjugateClosed(poles))
    throw Error(ErrorCode::kConjugateViolation, "desired poles are not closed under conjugation");
  return DesiredSpectrum(std::move(poles));
}

DesiredSpectrum DesiredSpectrum::FromPoly(RealPoly poly) {
  if (!poly.is_monic()) throw Error(ErrorCode::kInvalidArgument, "desired polynomial must be monic");
  return DesiredSpectrum(std::move(poly));
}

RealPoly DesiredSpectrum::poly() const {
  if (const RootSet* p = poles()) {
    const std::vector<long double> e = PolyFromRootsExtended(*p);
    return RealPoly(std::vector<double>(e.begin(), e.end()));
  }
  return std::get<RealPoly>(value_);
}

std::size_t DesiredSpectrum::degree() const {
  if (const RootSet* p = poles()) return p->size();
  return std::get<RealPoly>(value_).degree();
}

RootSet DesiredSpectrum::roots() const {
  if (const RootSet* p = poles()) return *p;
  return RootsOf(std::get<RealPoly>(value_));
}

RealPoly ControllerFactor(const Vector& K) {
  std::vector<double> lower(K.data(), K.data() + K.size());
  return RealPoly::Monic(lower);
}

RealPoly ObserverFactor(const Vector& G) {
  std::vector<double> lower(G.data(), G.data() + G.size());
  std::reverse(lower.begin(), lower.end());
  return RealPoly::Monic(lower);
}

Vector GainsFromControllerFactor(const RealPoly& factor) {
  const std::vector<double> lower = factor.normalized().lower();
  return Eigen::Map<const Vector>(lower.data(), static_cast<Eigen::Index>(lower.size()));
}

Vector GainsFromObserverFactor(const RealPoly& factor) {
  std::vector<double> lower = factor.normalized().lower();
  std::reverse(lower.begin(), lower.end());
  return Eigen::Map<const Vector>(lower.data(), static_cast<Eigen::Index>(lower.size()));
}

RealPoly NominalCoeffsRho3(const Vector& K, const Vector& G) {
  if (K.size() != 3 || G.size() != 4) throw Error(ErrorCode::kUnsupportedOrder, "closed forms are for rho = 3");
  const double k1 = K(0), k2 = K(1), k3 = K(2);
  const double g1 = G(0), g2 = G(1), g3 = G(2), g4 = G(3);
  return RealPoly({
      g4 * k1,
      g3 * k1 + g4 * k2,
      g2 * k1 + g3 * k2 + g4 * k3,
      g4 + g1 * k1 + g2 * k2 + g3 * k3,
      g3 + k1 + g1 * k2 + g2 * k3,
      g2 + k2 + g1 * k3,
      g1 + k3,
      1.0,
  });
}

RealPoly NominalCoeffs(const AdrcGains& gains) {
  gains.Validate();
  if (gains.rho() == 3) return NominalCoeffsRho3(gains.K, gains.G);
  return ControllerFactor(gains.K) * ObserverFactor(gains.G);
}

namespace {

using ExtPoly = std::vector<long double>;  // ascending, monic

ExtPoly DesiredExtended(const DesiredSpectrum& desired, std::size_t rho) {
  ExtPoly q;
  if (const RootSet* poles = desired.poles()) {
    q = PolyFromRootsExtended(*poles);
  } else {
    const std::vector<double>& c = desired.poly().coeffs();
    q.assign(c.begin(), c.end());
  }
  if (q.size() != 2 * rho + 2)
    throw Error(ErrorCode::kInvalidArgument, "desired spectrum must have degree 2*rho+1 = " +
                                                 std::to_string(2 * rho + 1));
  return q;
}

RealPoly Rounded(const ExtPoly& p) { return RealPoly(std::vector<double>(p.begin(), p.end())); }

// Binomial expansion of (s + r)^n.
RealPoly Binomial(double r, std::size_t n) {
  RealPoly p({1.0});
  for (std::size_t i = 0; i < n; ++i) p = p * RealPoly({r, 1.0});
  return p;
}

// Newton refinement of the factorization C(s) O(s) = q-hat* in long double.
// The Jacobian is the Sylvester matrix of the two factors, so this only runs
// when they share no root.
void PolishFactorization(const ExtPoly& q_hat_star, Vector& K, Vector& G) {
  const Eigen::Index rho = K.size();
  const Eigen::Index dim = 2 * rho + 1;

  struct State {
    ExtVector x, c, o, f;
    long double size = 0.0L;
  };
  auto evaluate = [&](const ExtVector& x) {
    State st{x, ExtVector::Zero(rho + 1), ExtVector::Zero(rho + 2), ExtVector::Zero(dim)};
    st.c.head(rho) = x.head(rho);
    st.c(rho) = 1.0L;
    for (Eigen::Index j = 0; j <= rho; ++j) st.o(rho - j) = x(rho + j);
    st.o(rho + 1) = 1.0L;
    for (Eigen::Index i = 0; i <= rho; ++i)
      for (Eigen::Index j = 0; j <= rho + 1; ++j)
        if (i + j < dim) st.f(i + j) += st.c(i) * st.o(j);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const long double target = q_hat_star[static_cast<std::size_t>(k)];
      st.f(k) -= target;
      st.size = std::max(st.size, std::abs(st.f(k)) / std::max(1.0L, std::abs(target)));
    }
    return st;
  };

  ExtVector x0(dim);
  x0.head(rho) = K.cast<long double>();
  x0.tail(rho + 1) = G.cast<long double>();
  State best = evaluate(x0);
  for (int iter = 0; iter < 4 && best.size > 0.0L; ++iter) {
    ExtMatrix jac = ExtMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < rho; ++i)
      for (Eigen::Index j = 0; j <= rho + 1; ++j)
        if (i + j < dim) jac(i + j, i) = best.o(j);
    for (Eigen::Index j = 0; j <= rho; ++j)
      for (Eigen::Index i = 0; i <= rho; ++i)
        if (rho - j + i < dim) jac(rho - j + i, rho + j) = best.c(i);
    Eigen::FullPivLU<ExtMatrix> lu(jac);
    if (lu.rank() < dim) break;
    State next = evaluate(best.x - lu.solve(best.f));
    if (!(next.size < best.size)) break;
    best = std::move(next);
  }
  K = best.x.head(rho).cast<double>();
  G = best.x.tail(rho + 1).cast<double>();
}

struct ExtendedCoeffMap {
  ExtMatrix L;
  ExtVector c;
};

// `scale` sets the probe step in each nominal coefficient. Steps near the size
// of the coefficients being solved for keep the identification noise relative.
ExtendedCoeffMap ProbeCoeffMap(const CanonicalPlant& plant, double b_hat, const std::vector<double>& scale) {
  plant.Validate();
  if (b_hat == 0.0) throw Error(ErrorCode::kInvalidArgument, "b_hat must be nonzero");
  const std::size_t rho = plant.rho();
  const auto n = static_cast<Eigen::Index>(2 * rho + 1);

  // Coprime base factors make {c * s^j} and {s^i * o} span all of degree <= 2rho.
  // s^rho and s^(rho+1) + 1 keep every probe's gains at 0 or 1.
  std::vector<double> c_lower(rho, 0.0), o_lower(rho + 1, 0.0);
  o_lower[0] = 1.0;
  const RealPoly c_base = RealPoly::Monic(c_lower);
  const RealPoly o_base = RealPoly::Monic(o_lower);

  std::vector<std::pair<RealPoly, RealPoly>> probes;
  probes.emplace_back(c_base, o_base);
  for (std::size_t j = 0; j <= rho; ++j) {
    std::vector<double> e(j + 1, 0.0);
    e[j] = scale[rho + j];
    probes.emplace_back(c_base, o_base + RealPoly(e));
  }
  for (std::size_t i = 0; i < rho; ++i) {
    std::vector<double> e(i + 1, 0.0);
    e[i] = scale[i];
    probes.emplace_back(c_base + RealPoly(e), o_base);
  }

  ExtMatrix q_hat(n, n + 1), q(n, n + 1);
  for (std::size_t k = 0; k < probes.size(); ++k) {
    AdrcGains g{GainsFromControllerFactor(probes[k].first), GainsFromObserverFactor(probes[k].second), b_hat};
    const RealPoly nominal = probes[k].first * probes[k].second;
    const ExtPoly actual = CharPolyExtended(ClosedLoopMatrixExtended(plant, g));
    const auto col = static_cast<Eigen::Index>(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      q_hat(i, col) = nominal[static_cast<std::size_t>(i)];
      q(i, col) = actual[static_cast<std::size_t>(i)];
    }
  }

  const ExtMatrix dq_hat = q_hat.rightCols(n).colwise() - q_hat.col(0);
  const ExtMatrix dq = q.rightCols(n).colwise() - q.col(0);
  ExtendedCoeffMap map;
  map.L = dq_hat.transpose().partialPivLu().solve(dq.transpose()).transpose();
  map.c = q.col(0) - map.L * q_hat.col(0);
  return map;
}

std::vector<double> UnitScale(std::size_t rho) { return std::vector<double>(2 * rho + 1, 1.0); }

ExtVector SolveCoeffMap(const ExtendedCoeffMap& map, const ExtVector& rhs) { return map.L.partialPivLu().solve(rhs); }

void CheckConditioned(const ExtendedCoeffMap& map, std::size_t rho) {
  Eigen::JacobiSVD<Matrix> svd(map.L.cast<double>());
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) == 0.0 ? INFINITY : sv(0) / sv(sv.size() - 1);
  if (!(cond < 1e12))
    throw Error(ErrorCode::kSingularMap, "coefficient map at rho = " + std::to_string(rho) +
                                             " has condition number " + std::to_string(cond));
}

ExtPoly TransformWithMap(const ExtendedCoeffMap& map, const ExtPoly& q_star) {
  const auto n = map.L.rows();
  ExtVector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = q_star[static_cast<std::size_t>(i)] - map.c(i);
  const ExtVector q_hat = SolveCoeffMap(map, rhs);
  ExtPoly out(q_hat.data(), q_hat.data() + n);
  out.push_back(1.0L);
  return out;
}

ExtPoly TransformByProbing(const ExtPoly& q_star, const CanonicalPlant& plant, double b_hat) {
  const ExtendedCoeffMap map = ProbeCoeffMap(plant, b_hat, UnitScale(plant.rho()));
  CheckConditioned(map, plant.rho());
  return TransformWithMap(map, q_star);
}

ExtPoly TransformRho3(const ExtPoly& q, const CanonicalPlant& plant, double b_hat) {
  const long double a1 = plant.a(0), a2 = plant.a(1), a3 = plant.a(2);
  const long double r = static_cast<long double>(b_hat) / plant.b;
  const long double h6 = q[6] + a3;
  const long double h5 = q[5] + a2 + a3 * h6;
  const long double h4 = q[4] + a1 + a2 * h6 + a3 * h5;
  const long double h3 = r * (q[3] + a1 * h6 + a2 * h5 + a3 * h4);
  const long double h2 = r * (q[2] + a1 * h5 + a2 * h4);
  const long double h1 = r * (q[1] + a1 * h4);
  const long double h0 = r * q[0];
  return {h0, h1, h2, h3, h4, h5, h6, 1.0L};
}

ExtPoly TransformExtended(const ExtPoly& q_star, const CanonicalPlant& plant, double b_hat) {
  plant.Validate();
  if (b_hat == 0.0) throw Error(ErrorCode::kInvalidArgument, "b_hat must be nonzero");
  return plant.rho() == 3 ? TransformRho3(q_star, plant, b_hat) : TransformByProbing(q_star, plant, b_hat);
}

SynthesisReport ExtractGains(const ExtPoly& q_hat_star, std::size_t rho, double b_hat, const SplitPolicy& policy,
                             const RootSet* known_roots) {
  if (b_hat == 0.0) throw Error(ErrorCode::kInvalidArgument, "b_hat must be nonzero");
  const RealPoly rounded = Rounded(q_hat_star);
  if (!rounded.is_monic() || rounded.degree() != 2 * rho + 1)
    throw Error(ErrorCode::kInvalidArgument, "nominal polynomial must be monic of degree 2*rho+1");

  RootSet roots = known_roots ? *known_roots : RootsOf(rounded);
  SortByModulus(roots);
  auto [ctrl, obs] = RealSplit(roots, rho, rho + 1, policy);

  SynthesisReport report;
  report.nominal_poly = rounded;
  report.controller_roots = ctrl;
  report.observer_roots = obs;
  report.gains = {GainsFromControllerFactor(PolyFromRoots(ctrl)), GainsFromObserverFactor(PolyFromRoots(obs)),
                  b_hat};
  PolishFactorization(q_hat_star, report.gains.K, report.gains.G);
  report.controller_factor = ControllerFactor(report.gains.K);
  report.observer_factor = ObserverFactor(report.gains.G);
  report.split_policy_used = policy;
  return report;
}

}  // namespace

AffineCoeffMap IdentifyCoeffMap(const CanonicalPlant& plant, double b_hat) {
  const ExtendedCoeffMap m = ProbeCoeffMap(plant, b_hat, UnitScale(plant.rho()));
  return {m.L.cast<double>(), m.c.cast<double>()};
}

RealPoly TransformDesiredByProbing(const DesiredSpectrum& desired, const CanonicalPlant& plant,
                                   double b_hat) {
  plant.Validate();
  if (b_hat == 0.0) throw Error(ErrorCode::kInvalidArgument, "b_hat must be nonzero");
  return Rounded(TransformByProbing(DesiredExtended(desired, plant.rho()), plant, b_hat));
}

RealPoly TransformDesired(const DesiredSpectrum& desired, const CanonicalPlant& plant, double b_hat) {
  plant.Validate();
  return Rounded(TransformExtended(DesiredExtended(desired, plant.rho()), plant, b_hat));
}

SynthesisReport GainsFromNominal(const RealPoly& q_hat_star, std::size_t rho, double b_hat,
                                 const SplitPolicy& policy, const RootSet* known_roots) {
  const ExtPoly ext(q_hat_star.coeffs().begin(), q_hat_star.coeffs().end());
  return ExtractGains(ext, rho, b_hat, policy, known_roots);
}

SynthesisReport Synthesize(const CanonicalPlant& plant, double b_hat, const DesiredSpectrum& desired,
                           const SplitPolicy& policy) {
  plant.Validate();
  const std::size_t rho = plant.rho();
  const ExtPoly q_star = DesiredExtended(desired, rho);
  ExtPoly q_hat_star = TransformExtended(q_star, plant, b_hat);

  // With a = 0 and b_hat = b the transform is the identity, so the requested
  // poles are already the roots of q-hat*; this keeps repeated poles exact.
  const bool identity = plant.a.isZero(0.0) && b_hat == plant.b;
  const RootSet* known = identity ? desired.poles() : nullptr;

  SynthesisReport report = ExtractGains(q_hat_star, rho, b_hat, policy, known);

  // A probed map carries absolute noise that large coefficients amplify.
  // Refine against the closed loop actually produced by the gains.
  if (rho != 3 && !identity) {
    const ExtendedCoeffMap map = ProbeCoeffMap(plant, b_hat, UnitScale(rho));
    const auto n = static_cast<Eigen::Index>(2 * rho + 1);
    auto mismatch = [&](const AdrcGains& g) {
      const ExtPoly actual = CharPolyExtended(ClosedLoopMatrixExtended(plant, g));
      ExtVector r(n);
      for (Eigen::Index i = 0; i < n; ++i) r(i) = q_star[static_cast<std::size_t>(i)] - actual[static_cast<std::size_t>(i)];
      return r;
    };
    for (int iter = 0; iter < 3; ++iter) {
      const ExtVector delta = SolveCoeffMap(map, mismatch(report.gains));
      for (Eigen::Index i = 0; i < n; ++i) q_hat_star[static_cast<std::size_t>(i)] += delta(i);
      PolishFactorization(q_hat_star, report.gains.K, report.gains.G);
    }
    report.nominal_poly = Rounded(q_hat_star);
    report.controller_factor = ControllerFactor(report.gains.K);
    report.observer_factor = ObserverFactor(report.gains.G);
  }

  report.desired_poly = desired.poly();
  report.closed_loop_eig = Eig(BuildClosedLoop(plant, report.gains).A);
  SortByModulus(report.closed_loop_eig);
  report.max_pole_residual = SpectrumDistance(desired.roots(), report.closed_loop_eig);
  return report;
}

double DefaultBHat(double b) { return b < 0.0 ? -1.0 : 1.0; }

BandwidthGains BandwidthGainsFor(double omega_c, double omega_o, std::size_t rho) {
  if (!(omega_c > 0.0) || !(omega_o > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "bandwidths must be positive");
  if (rho < 1) throw Error(ErrorCode::kInvalidArgument, "rho must be >= 1");
  return {GainsFromControllerFactor(Binomial(omega_c, rho)),
          GainsFromObserverFactor(Binomial(omega_o, rho + 1))};
}

Vector HighGainObserver(const Vector& alpha, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  const auto n = alpha.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "alpha needs at least two entries");
  Matrix companion = Matrix::Zero(n, n);
  companion.col(0) = -alpha;
  for (Eigen::Index i = 0; i + 1 < n; ++i) companion(i, i + 1) = 1.0;
  RootSet ev = Eig(companion);
  if (std::any_of(ev.roots.begin(), ev.roots.end(), [](Complex r) { return r.real() >= 0.0; })) {
    std::string list;
    for (Complex r : ev.roots)
      if (r.real() >= 0.0) list += " " + std::to_string(r.real()) + (r.imag() >= 0 ? "+" : "") +
                                   std::to_string(r.imag()) + "i";
    throw Error(ErrorCode::kNotHurwitz, "alpha companion has eigenvalues" + list);
  }
  Vector g(n);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    scale *= epsilon;
    g(i) = alpha(i) / scale;
  }
  return g;
}

namespace {

constexpr double kMinPoleSeparation = 0.25;

RootSet RandomStablePoles(Rng& rng, std::size_t count) {
  RootSet poles;
  auto far_enough = [&](Complex p) {
    for (Complex q : poles.roots)
      if (std::abs(p - q) < kMinPoleSeparation) return false;
    return true;
  };
  while (poles.size() < count) {
    const bool pair = count - poles.size() >= 2 && rng.Coin();
    Complex p(rng.Uniform(-6.0, -0.5), pair ? rng.Uniform(0.25, 3.0) : 0.0);
    if (!far_enough(p) || (pair && !far_enough(std::conj(p)))) continue;
    poles.roots.push_back(p);
    if (pair) poles.roots.push_back(std::conj(p));
  }
  return poles;
}

double SignedMagnitude(Rng& rng) {
  const double m = rng.Uniform(0.5, 5.0);
  return rng.Coin() ? m : -m;
}

ConjectureTrial RunTrial(std::size_t rho, std::uint64_t seed, std::size_t index) {
  Rng rng(DeriveSeed(seed, index));
  CanonicalPlant plant;
  plant.a.resize(static_cast<Eigen::Index>(rho));
  for (Eigen::Index i = 0; i < plant.a.size(); ++i) plant.a(i) = rng.Uniform(-5.0, 5.0);
  plant.b = SignedMagnitude(rng);
  const double b_hat = SignedMagnitude(rng);
  const RootSet poles = RandomStablePoles(rng, 2 * rho + 1);

  ConjectureTrial trial;
  trial.index = index;
  try {
    const SynthesisReport r = Synthesize(plant, b_hat, DesiredSpectrum::FromPoles(poles));
    trial.residual = r.max_pole_residual;
    trial.ok = trial.residual < kConjectureTol;
  } catch (const Error& e) {
    trial.residual = INFINITY;
    trial.error = e.what();
  }
  return trial;
}

}  // namespace

ConjectureReport VerifyConjecture(std::size_t rho, std::size_t trials, std::uint64_t seed, unsigned jobs) {
  if (rho < 1 || rho > 8) throw Error(ErrorCode::kInvalidArgument, "rho must be in [1, 8]");
  ConjectureReport report;
  report.rho = rho;
  report.trials = trials;
  report.seed = seed;
  report.results.resize(trials);

  jobs = std::max(1u, jobs);
  std::vector<std::future<void>> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, [&, w] {
      for (std::size_t i = w; i < trials; i += jobs) report.results[i] = RunTrial(rho, seed, i);
    }));
  }
  for (auto& f : workers) f.get();

  report.pass = true;
  for (const ConjectureTrial& t : report.results) {
    report.max_residual = std::max(report.max_residual, t.residual);
    report.pass = report.pass && t.ok;
  }
  return report;
}

}  // namespace adrc
