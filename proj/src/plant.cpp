#include "adrc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "adrc/errors.hpp"

namespace adrc {

void StateSpacePlant::Validate() const {
  const Eigen::Index n = A.rows();
  if (n < 1 || A.cols() != n || B.size() != n || C.size() != n)
    throw Error(ErrorCode::kInvalidArgument, "plant matrices have inconsistent dimensions");
}

void CanonicalPlant::Validate() const {
  if (a.size() < 1) throw Error(ErrorCode::kInvalidArgument, "canonical plant needs rho >= 1");
  if (b == 0.0) throw Error(ErrorCode::kInvalidArgument, "input coefficient b must be nonzero");
}

StateSpacePlant CanonicalPlant::AsStateSpace() const {
  const auto n = a.size();
  StateSpacePlant p;
  p.A = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) p.A(i, i + 1) = 1.0;
  p.A.row(n - 1) = a.transpose();
  p.B = Vector::Zero(n);
  p.B(n - 1) = b;
  p.C = Eigen::RowVectorXd::Zero(n);
  p.C(0) = 1.0;
  return p;
}

std::size_t RelativeDegree(const StateSpacePlant& p, const CanonicalizeOptions& opts) {
  p.Validate();
  const std::size_t n = p.order();
  const double norm_a = std::max(1.0, p.A.operatorNorm());
  const double base = p.C.norm() * p.B.norm();
  Eigen::RowVectorXd c_ak = p.C;  // C A^(k-1)
  double scale = base;
  for (std::size_t k = 1; k <= n; ++k) {
    const double markov = c_ak.dot(p.B);
    if (std::abs(markov) > opts.markov_tol * scale && base > 0.0) return k;
    c_ak = c_ak * p.A;
    scale *= norm_a;
  }
  throw Error(ErrorCode::kNoRelativeDegree, "C A^(k-1) B vanishes for every k <= N");
}

Matrix ObservabilityMatrix(const StateSpacePlant& p) {
  p.Validate();
  const auto n = p.A.rows();
  Matrix obs(n, n);
  Eigen::RowVectorXd row = p.C;
  for (Eigen::Index i = 0; i < n; ++i) {
    obs.row(i) = row;
    row = row * p.A;
  }
  return obs;
}

CanonicalForm ToCanonical(const StateSpacePlant& p, const CanonicalizeOptions& opts) {
  p.Validate();
  const auto n = p.A.rows();
  const Matrix obs = ObservabilityMatrix(p);

  Eigen::JacobiSVD<Matrix> svd(obs);
  const auto& sv = svd.singularValues();
  const double cond = sv(0) == 0.0 ? INFINITY : sv(0) / sv(n - 1);
  if (!(cond < opts.max_condition))
    throw Error(ErrorCode::kUnobservable, "observability matrix condition number " + std::to_string(cond));

  const std::size_t rho = RelativeDegree(p, opts);
  if (rho != static_cast<std::size_t>(n))
    throw Error(ErrorCode::kRelativeDegreeMismatch,
                "relative degree " + std::to_string(rho) + " differs from order " + std::to_string(n));

  std::vector<Eigen::RowVectorXd> c_pow(static_cast<std::size_t>(n) + 1);  // C A^k
  c_pow[0] = p.C;
  for (Eigen::Index k = 1; k <= n; ++k) c_pow[static_cast<std::size_t>(k)] = c_pow[static_cast<std::size_t>(k - 1)] * p.A;

  // a O = C A^N, solved as O^T a^T = (C A^N)^T.
  const Eigen::PartialPivLU<Matrix> lu(obs.transpose());
  const Vector a = lu.solve(c_pow[static_cast<std::size_t>(n)].transpose());

  CanonicalForm out;
  out.plant.a = a;
  out.plant.b = c_pow[static_cast<std::size_t>(n - 1)].dot(p.B);

  // x = O z + sum_j M_j delta^(j), where row i of M_j is C A^(i-1-j) (zero if negative).
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix mj = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index pw = i - 1 - j;
      if (pw >= 0) mj.row(i) = c_pow[static_cast<std::size_t>(pw)];
    }
    Eigen::RowVectorXd w = c_pow[static_cast<std::size_t>(n - 1 - j)] - a.transpose() * mj;
    out.disturbance.weights.push_back(w);
  }
  return out;
}

std::pair<RealPoly, RealPoly> TransferFunction(const StateSpacePlant& p) {
  p.Validate();
  const RealPoly den = CharPoly(p.A);
  const RealPoly shifted = CharPoly(p.A - p.B * p.C);
  return {shifted - den, den};
}

}  // namespace adrc
