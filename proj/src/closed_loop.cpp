#include "adrc/closed_loop.hpp"

#include "adrc/errors.hpp"

namespace adrc {

namespace {

void RequireRho3(std::size_t rho, const char* what) {
  if (rho != 3) throw Error(ErrorCode::kUnsupportedOrder, std::string(what) + " is defined for rho = 3");
}

void CheckCompatible(const CanonicalPlant& plant, const AdrcGains& gains) {
  plant.Validate();
  gains.Validate();
  if (plant.rho() != gains.rho()) throw Error(ErrorCode::kInvalidArgument, "plant and gains disagree on rho");
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> ClosedLoopMatrix(const CanonicalPlant& plant, const AdrcGains& gains) {
  using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Row = Eigen::Matrix<T, 1, Eigen::Dynamic>;
  CheckCompatible(plant, gains);
  const auto rho = static_cast<Eigen::Index>(plant.rho());
  const Eigen::Index n = 2 * rho + 1;
  const Eigen::Index xt = rho;       // first x_tilde column
  const Eigen::Index dt = 2 * rho;   // d_tilde column
  const T r = static_cast<T>(plant.b) / static_cast<T>(gains.b_hat);
  const Row k = gains.K.transpose().cast<T>();
  const Row a_row = plant.a.transpose().cast<T>();

  M a = M::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < rho; ++i) a(i, i + 1) = 1;
  a.block(rho - 1, 0, 1, rho) = a_row - r * k;
  a.block(rho - 1, xt, 1, rho) = -r * k;
  a(rho - 1, dt) = -1;

  for (Eigen::Index i = 0; i < rho; ++i) {
    a(xt + i, xt) -= static_cast<T>(gains.G(i));
    if (i + 1 < rho) a(xt + i, xt + i + 1) = 1;
  }
  a.block(xt + rho - 1, 0, 1, rho) = (r - 1) * k - a_row;
  a.block(xt + rho - 1, xt, 1, rho) += (r - 1) * k;
  a(xt + rho - 1, dt) = 1;
  a(dt, xt) = -r * static_cast<T>(gains.G(rho));
  return a;
}

}  // namespace

ClosedLoopSystem BuildClosedLoop(const CanonicalPlant& plant, const AdrcGains& gains) {
  const auto rho = static_cast<Eigen::Index>(plant.rho());
  ClosedLoopSystem cl;
  cl.A = ClosedLoopMatrix<double>(plant, gains);
  const Eigen::Index n = cl.A.rows();
  cl.B = Vector::Zero(n);
  cl.B(rho - 1) = 1.0;
  cl.B(2 * rho - 1) = -1.0;
  cl.C = Matrix::Zero(rho, n);
  cl.C.leftCols(rho).setIdentity();
  return cl;
}

ExtMatrix ClosedLoopMatrixExtended(const CanonicalPlant& plant, const AdrcGains& gains) {
  return ClosedLoopMatrix<long double>(plant, gains);
}

RealPoly CoeffMatch(const AdrcGains& gains, const CanonicalPlant& plant) {
  CheckCompatible(plant, gains);
  RequireRho3(plant.rho(), "CoeffMatch");
  const double k1 = gains.K(0), k2 = gains.K(1), k3 = gains.K(2);
  const double g1 = gains.G(0), g2 = gains.G(1), g3 = gains.G(2), g4 = gains.G(3);
  const double a1 = plant.a(0), a2 = plant.a(1), a3 = plant.a(2);
  const double r = plant.b / gains.b_hat;
  const double q6 = g1 + k3 - a3;
  const double q5 = g2 + k2 + g1 * k3 - a2 - a3 * (g1 + k3);
  const double q4 = g3 + k1 + g1 * k2 + g2 * k3 - a1 - a2 * (g1 + k3) - a3 * (k2 + g2 + g1 * k3);
  const double q3 = r * (g4 + g1 * k1 + g2 * k2 + g3 * k3) - a1 * (g1 + k3) - a2 * (g2 + k2 + g1 * k3) -
                    a3 * (g3 + k1 + g1 * k2 + g2 * k3);
  const double q2 = r * (g2 * k1 + g3 * k2 + g4 * k3) - a1 * (g2 + k2 + g1 * k3) -
                    a2 * (g3 + k1 + g1 * k2 + g2 * k3);
  const double q1 = r * (g3 * k1 + g4 * k2) - a1 * (g1 * k2 + g3 + k1 + g2 * k3);
  const double q0 = r * g4 * k1;
  return RealPoly({q0, q1, q2, q3, q4, q5, q6, 1.0});
}

RationalTF AdrcTransfer(const AdrcGains& gains) {
  gains.Validate();
  const std::size_t rho = gains.rho();
  const RealPoly q = NominalCoeffs(gains);
  std::vector<double> num(q.coeffs().begin(), q.coeffs().begin() + static_cast<std::ptrdiff_t>(rho + 1));
  std::vector<double> den(rho + 2, 0.0);
  for (std::size_t j = 0; j < rho; ++j) den[j + 1] = gains.b_hat * q[rho + 1 + j];
  den[rho + 1] = gains.b_hat;
  return {RealPoly(std::move(num)), RealPoly(std::move(den))};
}

RationalTF ModelBasedTransfer(const Vector& k_star, const Vector& g_star, const CanonicalPlant& plant) {
  plant.Validate();
  RequireRho3(plant.rho(), "ModelBasedTransfer");
  if (k_star.size() != 3 || g_star.size() != 4)
    throw Error(ErrorCode::kInvalidArgument, "model-based gains need K* in R^3 and G* in R^4");
  const double k1 = k_star(0), k2 = k_star(1), k3 = k_star(2);
  const double g1 = g_star(0), g2 = g_star(1), g3 = g_star(2), g4 = g_star(3);
  const double a1 = plant.a(0), a2 = plant.a(1), a3 = plant.a(2);
  const double b = plant.b;

  const double n3 = g4 + g1 * k1 + g2 * k2 + g3 * k3;
  const double n2 = g2 * k1 + g3 * k2 + g4 * k3 - a3 * g4 - a3 * g1 * k1 - a3 * g2 * k2 + a1 * g1 * k3 +
                    a2 * g2 * k3;
  const double n1 = g3 * k1 + g4 * k2 + a1 * g1 * k2 - a2 * g1 * k1 + a1 * g2 * k3 - a3 * g2 * k1 - a2 * g4;
  const double n0 = g4 * (k1 - a1);

  const double d2 = g1 + k3 - a3;
  const double d1 = g2 + k2 + g1 * k3 - a3 * g1 - a2;
  const double d0 = g3 + k1 + g1 * k2 + g2 * k3 - a2 * g1 - a3 * g2 - a1;
  return {RealPoly({n0, n1, n2, n3}), RealPoly({0.0, b * d0, b * d1, b * d2, b})};
}

AdrcGains MatchModelBased(const Vector& k_star, const Vector& g_star, const CanonicalPlant& plant,
                          double b_hat, const SplitPolicy& policy) {
  if (b_hat == 0.0) throw Error(ErrorCode::kInvalidArgument, "b_hat must be nonzero");
  const RationalTF target = ModelBasedTransfer(k_star, g_star, plant);
  const double lead = target.den[4];  // b
  // H_ADRC numerator is q-hat_i / b_hat and denominator cubic is monic.
  std::vector<double> q(8, 0.0);
  for (std::size_t i = 0; i < 4; ++i) q[i] = b_hat * target.num[i] / lead;
  for (std::size_t j = 0; j < 3; ++j) q[4 + j] = target.den[1 + j] / lead;
  q[7] = 1.0;
  return GainsFromNominal(RealPoly(std::move(q)), 3, b_hat, policy).gains;
}

Matrix PidClosedLoop(const CanonicalPlant& plant, double kp, double ki, double kd) {
  plant.Validate();
  RequireRho3(plant.rho(), "PidClosedLoop");
  const double b = plant.b;
  Matrix m = Matrix::Zero(4, 4);
  m(0, 1) = m(1, 2) = m(2, 3) = 1.0;
  m(3, 0) = -b * ki;
  m(3, 1) = plant.a(0) - b * kp;
  m(3, 2) = plant.a(1) - b * kd;
  m(3, 3) = plant.a(2);
  return m;
}

bool PidNecessaryCondition(const CanonicalPlant& plant) {
  plant.Validate();
  RequireRho3(plant.rho(), "PidNecessaryCondition");
  return plant.a(2) < 0.0;
}

}  // namespace adrc
