#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "adrc/errors.hpp"
#include "adrc/plant.hpp"
#include "adrc/random.hpp"
#include "oracles.hpp"

using namespace adrc;

namespace {

CanonicalPlant TablePlant() {
  CanonicalPlant p;
  p.a = Eigen::Vector3d(4, 1, 2);
  p.b = -1.0;
  return p;
}

Matrix RandomWellConditioned(Rng& rng, Eigen::Index n) {
  Matrix t(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) t(i, j) = rng.Uniform(-1.0, 1.0) + (i == j ? 2.5 : 0.0);
  return t;
}

StateSpacePlant Transformed(const StateSpacePlant& p, const Matrix& t) {
  // z' = T z
  const Matrix ti = t.inverse();
  return {t * p.A * ti, t * p.B, p.C * ti};
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kConfig;
}

}  // namespace

TEST(CanonicalPlant, StateSpaceTriple) {
  const StateSpacePlant s = TablePlant().AsStateSpace();
  Matrix a(3, 3);
  a << 0, 1, 0, 0, 0, 1, 4, 1, 2;
  EXPECT_EQ(s.A, a);
  EXPECT_EQ(s.B, Eigen::Vector3d(0, 0, -1));
  EXPECT_EQ(s.C, Eigen::RowVector3d(1, 0, 0));
}

TEST(CanonicalPlant, RejectsZeroInputCoefficient) {
  CanonicalPlant p = TablePlant();
  p.b = 0.0;
  EXPECT_EQ(CodeOf([&] { p.Validate(); }), ErrorCode::kInvalidArgument);
}

TEST(RelativeDegree, CanonicalTripleIsThree) { EXPECT_EQ(RelativeDegree(TablePlant().AsStateSpace()), 3u); }

TEST(RelativeDegree, ScalarIntegrator) {
  StateSpacePlant p{Matrix::Zero(1, 1), Vector::Ones(1), Eigen::RowVectorXd::Ones(1)};
  EXPECT_EQ(RelativeDegree(p), 1u);
}

TEST(RelativeDegree, InvariantUnderSimilarity) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const StateSpacePlant p = Transformed(TablePlant().AsStateSpace(), RandomWellConditioned(rng, 3));
    EXPECT_EQ(RelativeDegree(p), 3u);
  }
}

TEST(RelativeDegree, ZeroInputHasNone) {
  StateSpacePlant p = TablePlant().AsStateSpace();
  p.B.setZero();
  EXPECT_EQ(CodeOf([&] { RelativeDegree(p); }), ErrorCode::kNoRelativeDegree);
}

TEST(ToCanonical, IdentityOnCanonicalTriple) {
  const CanonicalForm f = ToCanonical(TablePlant().AsStateSpace());
  EXPECT_LT((f.plant.a - Eigen::Vector3d(4, 1, 2)).norm(), 1e-12);
  EXPECT_NEAR(f.plant.b, -1.0, 1e-12);
}

TEST(ToCanonical, DisturbanceWeightsForCanonicalTriple) {
  // With A in companion form and C = e1, the observability matrix is I, and
  // w0 = CA^2 - CA^3 [0; C; CA], w1 = CA - CA^3 [0; 0; C], w2 = C.
  const StateSpacePlant s = TablePlant().AsStateSpace();
  const CanonicalForm f = ToCanonical(s);
  ASSERT_EQ(f.disturbance.weights.size(), 3u);
  const Eigen::RowVectorXd ca = s.C * s.A, ca2 = ca * s.A, ca3 = ca2 * s.A;
  Matrix shift1 = Matrix::Zero(3, 3);
  shift1.row(1) = s.C;
  shift1.row(2) = ca;
  Matrix shift2 = Matrix::Zero(3, 3);
  shift2.row(2) = s.C;
  const Eigen::RowVectorXd w0 = ca2 - ca3 * shift1;
  const Eigen::RowVectorXd w1 = ca - ca3 * shift2;
  EXPECT_LT((f.disturbance.weights[0] - w0).norm(), 1e-12);
  EXPECT_LT((f.disturbance.weights[1] - w1).norm(), 1e-12);
  EXPECT_EQ(f.disturbance.weights[2], s.C);
}

TEST(ToCanonical, InvariantUnderSimilarity) {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    CanonicalPlant p;
    const auto n = static_cast<Eigen::Index>(1 + trial % 5);
    p.a = Vector(n);
    for (Eigen::Index i = 0; i < n; ++i) p.a(i) = rng.Uniform(-5.0, 5.0);
    p.b = rng.Coin() ? rng.Uniform(0.5, 5.0) : -rng.Uniform(0.5, 5.0);
    const Matrix t = RandomWellConditioned(rng, n);
    const CanonicalForm f = ToCanonical(Transformed(p.AsStateSpace(), t));
    EXPECT_LT((f.plant.a - p.a).norm() / std::max(1.0, p.a.norm()), 1e-7);
    EXPECT_NEAR(f.plant.b, p.b, 1e-7 * std::abs(p.b));
  }
}

TEST(ToCanonical, PreservesTransferFunction) {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 3;
    // Full-order plant with relative degree 3: a canonical one seen through a
    // random change of coordinates.
    CanonicalPlant c;
    c.a = Eigen::Vector3d(rng.Uniform(-3, 3), rng.Uniform(-3, 3), rng.Uniform(-3, 3));
    c.b = rng.Uniform(0.5, 3.0);
    const StateSpacePlant s = Transformed(c.AsStateSpace(), RandomWellConditioned(rng, n));
    const CanonicalForm f = ToCanonical(s);
    const StateSpacePlant back = f.plant.AsStateSpace();
    for (int k = 0; k < 5; ++k) {
      const Complex freq(rng.Uniform(-1.0, 1.0), rng.Uniform(0.5, 4.0));
      const Complex h0 = oracle::FrequencyResponse(s.A, s.B, s.C, freq);
      const Complex h1 = oracle::FrequencyResponse(back.A, back.B, back.C, freq);
      EXPECT_LT(std::abs(h0 - h1), 1e-7 * std::abs(h0));
    }
    const auto [num, den] = TransferFunction(s);
    const auto [num_c, den_c] = TransferFunction(back);
    EXPECT_LT(MaxRelativeCoeffError(den, den_c), 1e-7);
    EXPECT_LT(MaxRelativeCoeffError(num, num_c, 1e-3), 1e-7);
  }
}

TEST(ToCanonical, LowRelativeDegreeIsMismatch) {
  StateSpacePlant s = TablePlant().AsStateSpace();
  s.C = Eigen::RowVector3d(0, 0, 1);
  EXPECT_EQ(CodeOf([&] { ToCanonical(s); }), ErrorCode::kRelativeDegreeMismatch);
}

TEST(ToCanonical, ZeroOutputIsUnobservable) {
  StateSpacePlant s = TablePlant().AsStateSpace();
  s.C.setZero();
  const ErrorCode code = CodeOf([&] { ToCanonical(s); });
  EXPECT_TRUE(code == ErrorCode::kUnobservable || code == ErrorCode::kNoRelativeDegree);
}

TEST(ToCanonical, UnobservableModeRejected) {
  // Relative degree 3 exists but a decoupled mode hides from the output.
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = -1.0;
  a(1, 2) = 1.0;
  a(2, 2) = -2.0;
  StateSpacePlant s{a, Eigen::Vector3d(1, 0, 1), Eigen::RowVector3d(0, 1, 0)};
  const ErrorCode code = CodeOf([&] { ToCanonical(s); });
  EXPECT_TRUE(code == ErrorCode::kUnobservable || code == ErrorCode::kRelativeDegreeMismatch);
}

TEST(TransferFunction, MatchesFrequencyResponseOracle) {
  Rng rng(24);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    StateSpacePlant s{Matrix(n, n), Vector(n), Eigen::RowVectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
      s.B(i) = rng.Uniform(-1.0, 1.0);
      s.C(i) = rng.Uniform(-1.0, 1.0);
      for (Eigen::Index j = 0; j < n; ++j) s.A(i, j) = rng.Uniform(-2.0, 2.0);
    }
    const auto [num, den] = TransferFunction(s);
    EXPECT_TRUE(den.is_monic());
    const Complex freq(0.3, 1.7);
    const Complex expected = oracle::FrequencyResponse(s.A, s.B, s.C, freq);
    EXPECT_LT(std::abs(num(freq) / den(freq) - expected), 1e-9 * std::max(1.0, std::abs(expected)));
  }
}
