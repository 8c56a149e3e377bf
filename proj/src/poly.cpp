#include "adrc/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <Eigen/Eigenvalues>

#include "adrc/errors.hpp"

namespace adrc {

RealPoly::RealPoly(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

RealPoly RealPoly::Monic(std::span<const double> lower) {
  std::vector<double> c(lower.begin(), lower.end());
  c.push_back(1.0);
  return RealPoly(std::move(c));
}

RealPoly RealPoly::normalized() const {
  const double lead = leading();
  if (lead == 0.0) throw Error(ErrorCode::kDegenerate, "cannot normalize the zero polynomial");
  std::vector<double> c = coeffs_;
  for (double& v : c) v /= lead;
  c.back() = 1.0;
  return RealPoly(std::move(c));
}

Complex RealPoly::operator()(Complex s) const {
  Complex acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double RealPoly::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

RealPoly operator*(const RealPoly& p, const RealPoly& q) {
  std::vector<double> c(p.coeffs_.size() + q.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < q.coeffs_.size(); ++j) c[i + j] += p.coeffs_[i] * q.coeffs_[j];
  return RealPoly(std::move(c));
}

RealPoly operator+(const RealPoly& p, const RealPoly& q) {
  std::vector<double> c(std::max(p.coeffs_.size(), q.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = p[i] + q[i];
  return RealPoly(std::move(c));
}

RealPoly operator-(const RealPoly& p, const RealPoly& q) { return p + (-1.0) * q; }

RealPoly operator*(double k, const RealPoly& p) {
  std::vector<double> c = p.coeffs_;
  for (double& v : c) v *= k;
  return RealPoly(std::move(c));
}

double MaxRelativeCoeffError(const RealPoly& p, const RealPoly& q, double floor) {
  const std::size_t n = std::max(p.coeffs().size(), q.coeffs().size());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = std::max(std::abs(q[i]), floor);
    worst = std::max(worst, std::abs(p[i] - q[i]) / scale);
  }
  return worst;
}

RealPoly RootUnit::factor() const {
  if (!pair) return RealPoly({-root.real(), 1.0});
  return RealPoly({std::norm(root), -2.0 * root.real(), 1.0});
}

namespace {

bool IsNoiseImag(Complex r) { return std::abs(r.imag()) <= kRealSnapTol * (1.0 + std::abs(r)); }

}  // namespace

std::vector<RootUnit> ConjugateUnits(const RootSet& roots) {
  std::vector<RootUnit> units;
  std::vector<Complex> upper, lower;
  for (Complex r : roots.roots) {
    if (IsNoiseImag(r)) {
      units.push_back({Complex(r.real(), 0.0), false});
    } else if (r.imag() > 0) {
      upper.push_back(r);
    } else {
      lower.push_back(r);
    }
  }
  if (upper.size() != lower.size())
    throw Error(ErrorCode::kConjugateViolation, "unpaired complex root");
  std::vector<bool> used(lower.size(), false);
  for (Complex r : upper) {
    std::size_t best = lower.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lower.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(r - std::conj(lower[j]));
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best == lower.size() || best_dist > kConjugatePairTol * (1.0 + std::abs(r)))
      throw Error(ErrorCode::kConjugateViolation, "complex root without conjugate partner");
    used[best] = true;
    units.push_back({0.5 * (r + std::conj(lower[best])), true});
  }
  return units;
}

bool IsConjugateClosed(const RootSet& roots) {
  try {
    ConjugateUnits(roots);
    return true;
  } catch (const Error&) {
    return false;
  }
}

RootSet Flatten(std::span<const RootUnit> units) {
  RootSet out;
  for (const RootUnit& u : units) {
    out.roots.push_back(u.root);
    if (u.pair) out.roots.push_back(std::conj(u.root));
  }
  return out;
}

RealPoly PolyFromRoots(const RootSet& roots) {
  RealPoly p({1.0});
  for (const RootUnit& u : ConjugateUnits(roots)) p = p * u.factor();
  return p;
}

std::vector<long double> PolyFromRootsExtended(const RootSet& roots) {
  std::vector<long double> p{1.0L};
  for (const RootUnit& u : ConjugateUnits(roots)) {
    const std::complex<long double> r(u.root.real(), u.root.imag());
    // (s - r) for a real root, s^2 - 2 Re(r) s + |r|^2 for a pair.
    const std::vector<long double> f = u.pair ? std::vector<long double>{std::norm(r), -2.0L * r.real(), 1.0L}
                                              : std::vector<long double>{-r.real(), 1.0L};
    std::vector<long double> next(p.size() + f.size() - 1, 0.0L);
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j) next[i + j] += p[i] * f[j];
    p = std::move(next);
  }
  return p;
}

namespace {

// Parlett-Reinsch diagonal balancing with power-of-two scalings.
template <typename M>
void Balance(M& m) {
  using T = typename M::Scalar;
  const Eigen::Index n = m.rows();
  constexpr T kRadix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const T c = m.col(i).template lpNorm<1>() - std::abs(m(i, i));
      const T r = m.row(i).template lpNorm<1>() - std::abs(m(i, i));
      if (c == 0.0 || r == 0.0) continue;
      T g = r / kRadix;
      T f = 1.0;
      const T s = c + r;
      T cc = c;
      while (cc < g) {
        f *= kRadix;
        cc *= kRadix * kRadix;
      }
      g = r * kRadix;
      while (cc >= g) {
        f /= kRadix;
        cc /= kRadix * kRadix;
      }
      if ((cc + r / f) < 0.95 * s * f) {
        converged = false;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
}

RootSet SnapReal(const Eigen::VectorXcd& values) {
  RootSet out;
  out.roots.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    Complex r = values[i];
    if (IsNoiseImag(r)) r = Complex(r.real(), 0.0);
    out.roots.push_back(r);
  }
  return out;
}

}  // namespace

RootSet RootsOf(const RealPoly& p) {
  const std::size_t n = p.degree();
  if (n == 0) throw Error(ErrorCode::kDegenerate, "degree-0 polynomial has no roots");
  const RealPoly monic = p.normalized();
  const auto dim = static_cast<Eigen::Index>(n);
  Matrix companion = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 1; i < dim; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < dim; ++i) companion(i, dim - 1) = -monic[static_cast<std::size_t>(i)];
  Balance(companion);
  Eigen::EigenSolver<Matrix> solver(companion, false);
  return SnapReal(solver.eigenvalues());
}

std::vector<long double> CharPolyExtended(const ExtMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::kInvalidArgument, "CharPoly needs a square matrix");
  const Eigen::Index n = m.rows();
  if (n == 0) return {1.0L};

  // Similarity transforms only: power-of-two balancing, then a Householder
  // reduction to upper Hessenberg form.
  ExtMatrix balanced = m;
  Balance(balanced);
  const ExtMatrix h = Eigen::HessenbergDecomposition<ExtMatrix>(balanced).matrixH();

  // La Budde's recurrence on the leading principal submatrices of h.
  const auto size = static_cast<std::size_t>(n);
  std::vector<std::vector<long double>> p(size + 1);
  p[0] = {1.0L};
  for (std::size_t i = 1; i <= size; ++i) {
    const auto ii = static_cast<Eigen::Index>(i - 1);
    std::vector<long double>& cur = p[i];
    cur.assign(i + 1, 0.0L);
    for (std::size_t k = 0; k < i; ++k) {
      cur[k + 1] += p[i - 1][k];
      cur[k] -= h(ii, ii) * p[i - 1][k];
    }
    long double beta = 1.0L;
    for (std::size_t mm = 1; mm < i; ++mm) {
      const auto row = static_cast<Eigen::Index>(i - 1 - mm);
      beta *= h(row + 1, row);
      const long double w = h(row, ii) * beta;
      for (std::size_t k = 0; k < p[i - mm - 1].size(); ++k) cur[k] -= w * p[i - mm - 1][k];
    }
  }
  p[size][size] = 1.0L;
  return p[size];
}

RealPoly CharPoly(const Matrix& m) {
  const std::vector<long double> c = CharPolyExtended(m.cast<long double>());
  return RealPoly(std::vector<double>(c.begin(), c.end()));
}

RootSet Eig(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::kInvalidArgument, "Eig needs a square matrix");
  Matrix balanced = m;
  Balance(balanced);
  Eigen::EigenSolver<ExtMatrix> solver(balanced.cast<long double>(), false);
  return SnapReal(solver.eigenvalues().cast<std::complex<double>>());
}

bool IsHurwitz(const Matrix& m) {
  const RootSet ev = Eig(m);
  return std::all_of(ev.roots.begin(), ev.roots.end(), [](Complex r) { return r.real() < 0.0; });
}

double SpectrumDistance(const RootSet& a, const RootSet& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  struct Candidate {
    double dist;
    std::size_t i, j;
  };
  std::vector<Candidate> all;
  all.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) all.push_back({std::abs(a.roots[i] - b.roots[j]), i, j});
  std::sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) { return x.dist < y.dist; });
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  double worst = 0.0;
  std::size_t matched = 0;
  for (const Candidate& c : all) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    worst = std::max(worst, c.dist);
    if (++matched == a.size()) break;
  }
  return worst;
}

const char* SplitKindName(SplitKind kind) {
  switch (kind) {
    case SplitKind::kSlowestToController: return "slowest";
    case SplitKind::kFastestToController: return "fastest";
    case SplitKind::kExplicit: return "explicit";
  }
  return "?";
}

namespace {

// Strict weak order: slower roots first.
bool Slower(Complex x, Complex y) {
  const double mx = std::abs(x), my = std::abs(y);
  if (mx != my) return mx < my;
  if (x.real() != y.real()) return x.real() > y.real();
  return x.imag() > y.imag();
}

}  // namespace

void SortByModulus(RootSet& roots) { std::stable_sort(roots.roots.begin(), roots.roots.end(), Slower); }

std::pair<RootSet, RootSet> RealSplit(const RootSet& roots, std::size_t m, std::size_t n,
                                      const SplitPolicy& policy) {
  if (m + n != roots.size())
    throw Error(ErrorCode::kInvalidArgument, "split sizes do not add up to the number of roots");

  if (policy.kind == SplitKind::kExplicit) {
    std::vector<bool> chosen(roots.size(), false);
    for (std::size_t idx : policy.indices) {
      if (idx >= roots.size() || chosen[idx])
        throw Error(ErrorCode::kInfeasibleSplit, "explicit split index out of range or repeated");
      chosen[idx] = true;
    }
    if (policy.indices.size() != m)
      throw Error(ErrorCode::kInfeasibleSplit, "explicit split selects the wrong number of roots");
    RootSet first, second;
    for (std::size_t i = 0; i < roots.size(); ++i) (chosen[i] ? first : second).roots.push_back(roots.roots[i]);
    try {
      std::vector<RootUnit> u1 = ConjugateUnits(first), u2 = ConjugateUnits(second);
      return {Flatten(u1), Flatten(u2)};
    } catch (const Error&) {
      throw Error(ErrorCode::kInfeasibleSplit, "explicit split breaks a conjugate pair");
    }
  }

  std::vector<RootUnit> units = ConjugateUnits(roots);
  const bool slow_first = policy.kind == SplitKind::kSlowestToController;
  std::stable_sort(units.begin(), units.end(), [&](const RootUnit& x, const RootUnit& y) {
    return slow_first ? Slower(x.root, y.root) : Slower(y.root, x.root);
  });

  std::vector<std::size_t> singles, pairs;  // unit ranks, in priority order
  for (std::size_t r = 0; r < units.size(); ++r) (units[r].pair ? pairs : singles).push_back(r);

  // Each feasible pair count gives one candidate: its best pairs plus its best
  // singles. The winner has the lexicographically smallest per-root rank list.
  std::optional<std::vector<std::size_t>> best_units;
  std::vector<std::size_t> best_key;
  for (std::size_t j = 0; j <= pairs.size() && 2 * j <= m; ++j) {
    const std::size_t need = m - 2 * j;
    if (need > singles.size()) continue;
    std::vector<std::size_t> pick(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(j));
    pick.insert(pick.end(), singles.begin(), singles.begin() + static_cast<std::ptrdiff_t>(need));
    std::vector<std::size_t> key;
    for (std::size_t r : pick) key.insert(key.end(), units[r].count(), r);
    std::sort(key.begin(), key.end());
    if (!best_units || key < best_key) {
      best_units = std::move(pick);
      best_key = std::move(key);
    }
  }
  if (!best_units)
    throw Error(ErrorCode::kInfeasibleSplit,
                "no conjugate-closed partition of sizes " + std::to_string(m) + "/" + std::to_string(n));

  std::vector<bool> chosen(units.size(), false);
  for (std::size_t r : *best_units) chosen[r] = true;
  std::vector<RootUnit> first, second;
  for (std::size_t r = 0; r < units.size(); ++r) (chosen[r] ? first : second).push_back(units[r]);
  RootSet a = Flatten(first), b = Flatten(second);
  SortByModulus(a);
  SortByModulus(b);
  return {a, b};
}

}  // namespace adrc
