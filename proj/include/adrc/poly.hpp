#pragma once

// Real polynomials, root sets and the small dense eigen-kernel the rest of the
// library is built on. Coefficients are always stored in ascending degree.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace adrc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using ExtVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

class RealPoly {
 public:
  RealPoly() : coeffs_{0.0} {}
  /// `ascending[i]` multiplies s^i. Exact-zero leading entries are dropped.
  explicit RealPoly(std::vector<double> ascending);
  RealPoly(std::initializer_list<double> ascending)
      : RealPoly(std::vector<double>(ascending)) {}

  /// s^n + c[n-1] s^(n-1) + ... + c[0], with `lower` = c in ascending order.
  static RealPoly Monic(std::span<const double> lower);

  std::size_t degree() const { return coeffs_.size() - 1; }
  double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }
  double leading() const { return coeffs_.back(); }
  bool is_monic() const { return coeffs_.back() == 1.0; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  /// Coefficients below the leading one, ascending. For a monic polynomial
  /// these are the companion-form gains.
  std::vector<double> lower() const { return {coeffs_.begin(), coeffs_.end() - 1}; }

  RealPoly normalized() const;
  Complex operator()(Complex s) const;
  double operator()(double s) const;

  friend RealPoly operator*(const RealPoly& p, const RealPoly& q);
  friend RealPoly operator+(const RealPoly& p, const RealPoly& q);
  friend RealPoly operator-(const RealPoly& p, const RealPoly& q);
  friend RealPoly operator*(double c, const RealPoly& p);
  friend bool operator==(const RealPoly&, const RealPoly&) = default;

 private:
  std::vector<double> coeffs_;
};

/// Largest per-coefficient relative difference, |p_i - q_i| / max(|q_i|, floor).
double MaxRelativeCoeffError(const RealPoly& p, const RealPoly& q, double floor = 1.0);

/// Multiset of complex roots. Conjugate closure is checked by the operations
/// that need it, not on construction.
struct RootSet {
  std::vector<Complex> roots;

  std::size_t size() const { return roots.size(); }
  bool empty() const { return roots.empty(); }
};

/// Imaginary parts below this (times 1+|r|) are treated as eigensolver noise.
inline constexpr double kRealSnapTol = 1e-9;
/// Two roots are conjugates of each other when |r - conj(q)| <= tol * (1+|r|).
inline constexpr double kConjugatePairTol = 1e-7;

/// A real root or a conjugate pair; the atomic pieces of a real factorization.
struct RootUnit {
  Complex root;  // for a pair, the member with positive imaginary part
  bool pair = false;

  std::size_t count() const { return pair ? 2 : 1; }
  RealPoly factor() const;
};

/// Groups a root multiset into real roots and conjugate pairs.
/// Throws ConjugateViolation if some non-real root has no partner.
std::vector<RootUnit> ConjugateUnits(const RootSet& roots);
bool IsConjugateClosed(const RootSet& roots);
RootSet Flatten(std::span<const RootUnit> units);

RealPoly PolyFromRoots(const RootSet& roots);
/// Ascending coefficients of PolyFromRoots accumulated in long double.
std::vector<long double> PolyFromRootsExtended(const RootSet& roots);
RootSet RootsOf(const RealPoly& p);

/// det(sI - M): balancing, Hessenberg reduction and La Budde's recurrence,
/// carried out in long double.
RealPoly CharPoly(const Matrix& m);
/// Same coefficients, ascending, before rounding to double.
std::vector<long double> CharPolyExtended(const ExtMatrix& m);
/// Balanced dense nonsymmetric eigensolve with real snapping applied.
RootSet Eig(const Matrix& m);
bool IsHurwitz(const Matrix& m);

/// Largest distance between matched elements of two equally sized root sets.
/// Pairs are matched greedily, closest first.
double SpectrumDistance(const RootSet& a, const RootSet& b);

enum class SplitKind {
  kSlowestToController,
  kFastestToController,
  kExplicit,
};

struct SplitPolicy {
  SplitKind kind = SplitKind::kSlowestToController;
  /// Controller-side root indices for kExplicit (into the input order).
  std::vector<std::size_t> indices;

  friend bool operator==(const SplitPolicy&, const SplitPolicy&) = default;
};

const char* SplitKindName(SplitKind kind);

/// Partitions `roots` into (first, second) with first.size() == m, both parts
/// conjugate-closed. Slow/fast ordering is by modulus |r|; conjugate pairs
/// move as a unit.
std::pair<RootSet, RootSet> RealSplit(const RootSet& roots, std::size_t m, std::size_t n,
                                      const SplitPolicy& policy);

/// Canonical presentation order: ascending modulus, then larger real part,
/// then larger imaginary part.
void SortByModulus(RootSet& roots);

}  // namespace adrc
