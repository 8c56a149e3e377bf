// One PASS/FAIL line per acceptance check. Runs from the repository root so
// the bundled scenarios are reachable. Exits nonzero only when a check fails
// that is not listed as a known, analysed failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "adrc/closed_loop.hpp"
#include "adrc/errors.hpp"
#include "adrc/random.hpp"
#include "adrc/scenario.hpp"
#include "adrc/sim.hpp"
#include "adrc/synthesis.hpp"
#include "oracles.hpp"

using namespace adrc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  int id;
  const char* name;
  std::function<Outcome()> run;
  const char* known_failure = nullptr;  // reason, when the check cannot pass as stated
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string Fmt(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

CanonicalPlant TablePlant() {
  CanonicalPlant p;
  p.a = Eigen::Vector3d(4, 1, 2);
  p.b = -1.0;
  return p;
}

RootSet Reals(std::initializer_list<double> xs) {
  RootSet r;
  for (double x : xs) r.roots.emplace_back(x, 0.0);
  return r;
}

RootSet SlowPoles() { return Reals({-2, -2.2, -2.4, -2.6, -2.8, -3, -3.2}); }
RootSet FastPoles() { return Reals({-3, -3.2, -3.4, -3.6, -3.8, -4, -4.2}); }

Vector Vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vector RandomVector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.Uniform(lo, hi);
  return v;
}

double NonZero(Rng& rng, double lo, double hi) {
  double v = 0.0;
  while (std::abs(v) < 0.1) v = rng.Uniform(lo, hi);
  return v;
}

// Largest distance from a target to its nearest unused eigenvalue.
double MatchedResidual(const Matrix& a, const RootSet& targets) {
  RootSet eig = Eig(a);
  std::vector<bool> used(eig.size(), false);
  double worst = 0.0;
  for (Complex t : targets.roots) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t j = 0; j < eig.size(); ++j)
      if (!used[j] && std::abs(eig.roots[j] - t) < best_d) best_d = std::abs(eig.roots[j] - t), best = j;
    used[best] = true;
    worst = std::max(worst, best_d);
  }
  return worst;
}

// Like MatchedResidual, but per real and imaginary component.
double MatchedComponentResidual(const Matrix& a, const RootSet& targets) {
  RootSet eig = Eig(a);
  std::vector<bool> used(eig.size(), false);
  double worst = 0.0;
  for (Complex t : targets.roots) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t j = 0; j < eig.size(); ++j)
      if (!used[j] && std::abs(eig.roots[j] - t) < best_d) best_d = std::abs(eig.roots[j] - t), best = j;
    used[best] = true;
    const Complex e = eig.roots[best] - t;
    worst = std::max({worst, std::abs(e.real()), std::abs(e.imag())});
  }
  return worst;
}

struct Loaded {
  CanonicalPlant plant;
  AdrcGains gains;
  DisturbanceModel dist;
  SimConfig cfg;
};

Loaded Load(const std::string& name) {
  const Scenario s = LoadScenario("scenarios/" + name + ".scenario");
  Loaded l;
  l.plant = ResolvePlant(s.plant).plant;
  l.gains = ResolveController(*s.controller, l.plant).gains;
  l.dist = ResolveDisturbance(s.disturbance);
  l.cfg = ResolveSim(s.sim, l.plant.rho());
  return l;
}

Trajectory Run(const Loaded& l) { return Simulate(l.plant, l.gains, l.dist, l.cfg); }

Outcome SlowRowAssignment() {
  const auto start = Clock::now();
  const SynthesisReport r = Synthesize(TablePlant(), 1.0, DesiredSpectrum::FromPoles(SlowPoles()));
  const double residual = MatchedResidual(BuildClosedLoop(TablePlant(), r.gains).A, SlowPoles());
  const double t = Seconds(start);
  return {residual < 1e-6 && t < 1.0, Fmt("max |eig - pole| = %.3g (< 1e-6), %.3f s (< 1 s)", residual, t)};
}

Outcome FastRowAssignment() {
  const auto start = Clock::now();
  const SynthesisReport r = Synthesize(TablePlant(), 1.0, DesiredSpectrum::FromPoles(FastPoles()));
  const double residual = MatchedResidual(BuildClosedLoop(TablePlant(), r.gains).A, FastPoles());
  const double t = Seconds(start);
  const double product = r.gains.G(3) * r.gains.K(0);
  const double rel = std::abs(product / -7501.0 - 1.0);
  return {residual < 1e-6 && rel < 5e-3 && t < 1.0,
          Fmt("residual %.3g (< 1e-6), g4*k1 = %.2f, off %.3f%% (< 0.5%%), %.3f s", residual, product, 100 * rel, t)};
}

Outcome PrintedGains() {
  const AdrcGains slow{Vec({0.1513, 1.2608, 1.0586}), Vec({19.1414, 161.2754, 802.6627, -4876.5604}), 1.0};
  const AdrcGains alt{Vec({1538.2, 232.01, 22.312}), Vec({-2.1117, -2.0954, -3.8457, -0.4798}), 1.0};
  const double e_slow = MatchedResidual(BuildClosedLoop(TablePlant(), slow).A, SlowPoles());
  const double e_alt = MatchedResidual(BuildClosedLoop(TablePlant(), alt).A, SlowPoles());
  // The exact gains rounded to the printed significant digits show how much of the shift is rounding.
  AdrcGains rounded = Synthesize(TablePlant(), 1.0, DesiredSpectrum::FromPoles(SlowPoles())).gains;
  auto round_sig = [](double v, int digits) {
    const double scale = std::pow(10.0, digits - 1 - std::floor(std::log10(std::abs(v))));
    return std::round(v * scale) / scale;
  };
  for (Eigen::Index i = 0; i < 3; ++i) rounded.K(i) = round_sig(rounded.K(i), 5);
  for (Eigen::Index i = 0; i < 4; ++i) rounded.G(i) = round_sig(rounded.G(i), 6);
  const double e_rounded = MatchedResidual(BuildClosedLoop(TablePlant(), rounded).A, SlowPoles());
  return {e_slow < 5e-3 && e_alt < 5e-3,
          Fmt("printed slow gains off by %.3g, alternate gains off by %.3g (< 5e-3); exact gains rounded to "
              "the same digits off by %.3g",
              e_slow, e_alt, e_rounded)};
}

const RootSet& BandwidthSpectrum() {
  static const RootSet r{{{-14.3737, 0}, {-9.0600, 6.6661}, {-9.0600, -6.6661}, {-0.3253, 2.8065},
                          {-0.3253, -2.8065}, {-0.0778, 0.6079}, {-0.0778, -0.6079}}};
  return r;
}

Outcome BandwidthRow() {
  const BandwidthGains bw = BandwidthGainsFor(1.1, 8.0, 3);
  const bool gains_exact = (bw.K - Vec({1.331, 3.63, 3.3})).lpNorm<Eigen::Infinity>() < 1e-12 &&
                           bw.G == Vec({32, 384, 2048, 4096});
  const double e = MatchedComponentResidual(BuildClosedLoop(TablePlant(), {bw.K, bw.G, 1.0}).A, BandwidthSpectrum());
  const bool hurwitz = IsHurwitz(BuildClosedLoop(TablePlant(), {bw.K, bw.G, 1.0}).A);
  return {gains_exact && e < 5e-3, Fmt("K, G exact: %s; at b_hat = 1 eig off by %.3g (< 5e-3), loop %s",
                                       gains_exact ? "yes" : "no", e, hurwitz ? "stable" : "unstable")};
}

Outcome BandwidthRowOppositeSign() {
  const BandwidthGains bw = BandwidthGainsFor(1.1, 8.0, 3);
  const double e = MatchedComponentResidual(BuildClosedLoop(TablePlant(), {bw.K, bw.G, -1.0}).A, BandwidthSpectrum());
  return {e < 5e-3, Fmt("same gains at b_hat = -1: eig off by %.3g (< 5e-3)", e)};
}

Outcome DualPath() {
  const auto start = Clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    CanonicalPlant p;
    p.a = RandomVector(rng, 3, -10, 10);
    p.b = NonZero(rng, -10, 10);
    const AdrcGains g{RandomVector(rng, 3, -10, 10), RandomVector(rng, 4, -10, 10), NonZero(rng, -10, 10)};
    worst = std::max(worst, MaxRelativeCoeffError(CharPoly(BuildClosedLoop(p, g).A), CoeffMatch(g, p)));
  }
  const double t = Seconds(start);
  return {worst < 1e-9 && t < 5.0, Fmt("1000 trials, max relative coefficient error %.3g (< 1e-9), %.2f s", worst, t)};
}

Outcome NominalIdentity() {
  Rng rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector k = RandomVector(rng, 3, -10, 10), g = RandomVector(rng, 4, -10, 10);
    const std::vector<double> product = oracle::Multiply({k(0), k(1), k(2), 1.0}, {g(3), g(2), g(1), g(0), 1.0});
    const RealPoly closed = NominalCoeffsRho3(k, g);
    for (std::size_t i = 0; i < product.size(); ++i) worst = std::max(worst, std::abs(closed[i] - product[i]));
  }
  return {worst < 1e-12, Fmt("1000 trials, max coefficient error %.3g (< 1e-12)", worst)};
}

RationalTF Normalized(const RationalTF& h) {
  const double lead = h.den.leading();
  return {(1.0 / lead) * h.num, (1.0 / lead) * h.den};
}

Outcome TransferRecovery() {
  Rng rng(1003);
  double match = 0.0, oracle_err = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    CanonicalPlant p;
    p.a = RandomVector(rng, 3, -5, 5);
    p.b = NonZero(rng, -5, 5);
    const Vector k = RandomVector(rng, 3, -5, 5), g = RandomVector(rng, 4, -5, 5);
    const double b_hat = NonZero(rng, -5, 5);
    const RationalTF target = Normalized(ModelBasedTransfer(k, g, p));
    try {
      const RationalTF got = Normalized(AdrcTransfer(MatchModelBased(k, g, p, b_hat)));
      match = std::max({match, MaxRelativeCoeffError(got.num, target.num, 1e-6),
                        MaxRelativeCoeffError(got.den, target.den, 1e-6)});
    } catch (const Error&) {
      ++failures;
    }
    const oracle::Controller c = oracle::EsoController(k, g, p.a, p.b);
    oracle_err = std::max(oracle_err, MaxRelativeCoeffError(target.den, RealPoly(oracle::FaddeevLeVerrier(c.A))));
    for (int i = 0; i < 5; ++i) {
      const Complex s(rng.Uniform(-1, 1), rng.Uniform(0.2, 5));
      const Complex expected = oracle::FrequencyResponse(c.A, c.B, c.C, s);
      oracle_err = std::max(oracle_err, std::abs(target(s) - expected) / std::abs(expected));
    }
  }
  return {failures == 0 && match < 1e-7 && oracle_err < 1e-8,
          Fmt("100 trials: matched TF error %.3g (< 1e-7), model-based TF vs state-space oracle %.3g (< 1e-8), "
              "%d synthesis errors",
              match, oracle_err, failures)};
}

Outcome SimulationOracle() {
  const CanonicalPlant p = TablePlant();
  const AdrcGains g = Synthesize(p, 1.0, DesiredSpectrum::FromPoles(SlowPoles())).gains;
  SimConfig cfg;
  cfg.x0 = Vec({1, 0, 0});
  const Trajectory tr = Simulate(p, g, {1.0, std::nullopt}, cfg);
  const Matrix a = BuildClosedLoop(p, g).A;
  const double ratio = p.b / g.b_hat;
  auto z = [&](Eigen::Index i) {
    Vector out(7);
    out.head(3) = tr.x.row(i).transpose();
    out.segment(3, 3) = (tr.xhat.row(i) - tr.x.row(i)).transpose();
    out(6) = ratio * tr.dhat(i) - 1.0;
    return out;
  };
  double worst = 0.0;
  for (double t : {1.0, 5.0, 10.0}) {
    const auto i = static_cast<Eigen::Index>(std::llround(t / cfg.dt));
    worst = std::max(worst, (z(i) - oracle::Expm(a * t) * z(0)).lpNorm<Eigen::Infinity>());
  }
  const double u_end = tr.u(tr.u.size() - 1);
  return {worst < 1e-6 && std::abs(u_end - 1.0) < 1e-2,
          Fmt("vs matrix exponential %.3g (< 1e-6), u(30) = %.5f (within 1e-2 of 1)", worst, u_end)};
}

Outcome CostValues() {
  const auto start = Clock::now();
  const double slow = Cost(Run(Load("table1_slow")), 0.1).total;
  const double bw = Cost(Run(Load("table1_bandwidth")), 0.1).total;
  const double fast = Cost(Run(Load("table1_fast")), 0.1).total;
  const double t = Seconds(start);
  auto rel = [](double v, double ref) { return std::abs(v / ref - 1.0); };
  const bool close = rel(slow, 987.2546) < 0.1 && rel(bw, 1294.9) < 0.1 && rel(fast, 2801.5) < 0.1;
  const bool ordered = slow < bw && bw < fast;
  return {close && ordered && t < 10.0,
          Fmt("C slow %.4f (%.2f%%), bandwidth %.4f (%.2f%%), fast %.4f (%.2f%%), ordered: %s, %.2f s",
              slow, 100 * rel(slow, 987.2546), bw, 100 * rel(bw, 1294.9), fast, 100 * rel(fast, 2801.5),
              ordered ? "yes" : "no", t)};
}

// Random Hurwitz matrix: a random matrix shifted left past its spectral abscissa.
Matrix RandomHurwitz(Rng& rng, Eigen::Index m) {
  Matrix a = RandomVector(rng, m * m, -2, 2).reshaped(m, m);
  double abscissa = -INFINITY;
  for (Complex e : Eig(a).roots) abscissa = std::max(abscissa, e.real());
  return a - (abscissa + rng.Uniform(0.3, 2.0)) * Matrix::Identity(m, m);
}

Outcome GeneratorSuite() {
  const CanonicalPlant p = TablePlant();
  const AdrcGains g = Synthesize(p, 1.0, DesiredSpectrum::FromPoles(SlowPoles())).gains;
  Rng rng(1010);
  SimConfig cfg;
  cfg.horizon = 60.0;
  cfg.x0 = Vec({1, 0, 0});
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = static_cast<Eigen::Index>(1 + trial % 4);
    LtiGenerator gen{RandomHurwitz(rng, m), RandomVector(rng, m, -2, 2).transpose(), RandomVector(rng, m, -2, 2)};
    const Trajectory tr = Simulate(p, g, {rng.Uniform(-2, 2), gen}, cfg);
    const double end = tr.x.row(tr.x.rows() - 1).norm();
    worst = std::max(worst, end);
    failures += end >= 1e-4;
  }
  return {failures == 0, Fmt("50 generators, max ||x(60)|| = %.3g (< 1e-4), %d over", worst, failures)};
}

Outcome ConjectureSuite() {
  std::ostringstream detail;
  bool pass = true;
  for (std::size_t rho = 1; rho <= 5; ++rho) {
    const ConjectureReport r = VerifyConjecture(rho, 200, 0, 4);
    std::size_t bad = 0;
    for (const ConjectureTrial& t : r.results) bad += !t.ok;
    pass = pass && r.pass;
    detail << (rho > 1 ? ", " : "") << "rho " << rho << ": " << Fmt("%.2g", r.max_residual);
    if (bad) detail << " (" << bad << " over)";
  }
  detail << " (< 1e-5 each, 200 trials)";
  return {pass, detail.str()};
}

Outcome PidAppendix() {
  Rng rng(1012);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    CanonicalPlant p;
    p.a = RandomVector(rng, 3, -10, 10);
    p.b = NonZero(rng, -10, 10);
    const Matrix m = PidClosedLoop(p, rng.Uniform(-50, 50), rng.Uniform(-50, 50), rng.Uniform(-50, 50));
    mismatches += m.trace() != p.a(2);
  }
  const bool condition = PidNecessaryCondition(TablePlant());
  return {mismatches == 0 && !condition,
          Fmt("trace == a3 in %d/100, necessary condition for a = [4,1,2]: %s", 100 - mismatches,
              condition ? "true" : "false")};
}

Outcome FigureOrderings() {
  const double amp_slow = Summarize(Run(Load("fig4a"))).final_amplitude;
  const double amp_fast = Summarize(Run(Load("fig4b"))).final_amplitude;
  const double peak_slow = Summarize(Run(Load("fig5"))).peak_u;
  const double peak_fast = Summarize(Run(Load("fig6"))).peak_u;
  return {amp_fast < amp_slow && peak_fast > peak_slow,
          Fmt("final |y| fast %.4g < slow %.4g; noisy peak |u| fast %.4g > slow %.4g (seed 7)", amp_fast, amp_slow,
              peak_fast, peak_slow)};
}

}  // namespace

int main() {
  const std::vector<Check> checks = {
      {1, "slow-row eigenvalue assignment", SlowRowAssignment},
      {2, "fast-row assignment and g4*k1", FastRowAssignment},
      {3, "printed gains reproduce the slow spectrum", PrintedGains,
       "the printed gains carry too few digits: the spectrum shifts by far more than 5e-3"},
      {4, "bandwidth row gains and spectrum at b_hat = 1", BandwidthRow,
       "the listed spectrum belongs to b_hat = -1; at b_hat = 1 this loop is unstable"},
      {4, "bandwidth row spectrum at b_hat = -1 (info)", BandwidthRowOppositeSign},
      {5, "closed-form vs computed closed-loop coefficients", DualPath},
      {6, "nominal coefficient closed forms", NominalIdentity},
      {7, "model-based transfer function recovery", TransferRecovery},
      {8, "simulation vs matrix exponential", SimulationOracle},
      {9, "cost values and ordering", CostValues},
      {10, "random stable disturbance generators", GeneratorSuite},
      {11, "pole assignment at rho 1..5", ConjectureSuite},
      {12, "PID trace and necessary condition", PidAppendix},
      {13, "slow/fast qualitative orderings", FigureOrderings},
  };

  int unexpected = 0, known = 0;
  for (const Check& c : checks) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s [%02d] %s: %s", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    if (!o.pass && c.known_failure) std::printf(" (known: %s)", c.known_failure);
    std::printf("\n");
    if (!o.pass) (c.known_failure ? known : unexpected)++;
  }
  std::printf("%d unexpected failure(s), %d known failure(s)\n", unexpected, known);
  return unexpected == 0 ? 0 : 1;
}
