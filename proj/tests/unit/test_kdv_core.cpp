#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "capwhitham/fit.hpp"
#include "capwhitham/kdv_core.hpp"

using namespace capwhitham;
using std::numbers::pi;

namespace {

// (1/pi) \int_0^inf sigma(X) cos(kX) dX by exp-sinh quadrature
double sigma_hat_quadrature(const BondParams& p, double k) {
  boost::math::quadrature::exp_sinh<double> q;
  const double v = q.integrate([&](double X) { return sigma_value(p, X) * std::cos(k * X); }, 1e-15);
  return v / pi;
}

}  // namespace

TEST(Sigma, SolvesKdvProfileEquation) {
  const Grid g(40.0, 512);
  for (double b : {0.1, 0.2, 0.5, 2.0}) {
    const auto s = sigma_beta(BondParams(b), g);
    EXPECT_LE(kdv_residual(s), 1e-10) << b;
    EXPECT_TRUE(s.field.is_even(0.0));
  }
}

TEST(Sigma, SignFollowsRegime) {
  EXPECT_GT(sigma_value(BondParams(0.1), 0.0), 0.0);
  EXPECT_LT(sigma_value(BondParams(0.5), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(sigma_value(BondParams(0.2), 0.0), 0.1);
}

TEST(Sigma, TransformMatchesQuadratureAndGrid) {
  const BondParams p(0.2);
  const Grid g(60.0, 1024);
  const auto s = sigma_beta(p, g);
  for (double k : {0.0, 0.3, 1.0, 2.5, 6.0}) {
    EXPECT_NEAR(sigma_hat(p, k), sigma_hat_quadrature(p, k), 1e-14) << k;
  }
  for (int j : {0, 4, 19, 60}) EXPECT_NEAR(s.field.coeffs()[j].real(), sigma_hat(p, g.k(j)), 1e-14);
  EXPECT_EQ(sigma_hat(p, 1000.0), 0.0);
  EXPECT_EQ(sigma_hat(p, -1.3), sigma_hat(p, 1.3));
}

TEST(Sigma, RequiresDecayAtBoundary) {
  try {
    sigma_beta(BondParams(0.2), Grid(10.0, 128));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BoundaryNotDecayed);
  }
}

TEST(J0, ScalesLikeEpsSquared) {
  const Grid g(80.0, 1024);
  for (double b : {0.1, 0.2, 0.5}) {
    const BondParams p(b);
    const auto s = sigma_beta(p, g);
    std::vector<double> eps{0.2, 0.15, 0.1, 0.05, 0.025}, norms;
    for (double e : eps) norms.push_back(j0(s, ScalingParams(p, e)).l2_norm());
    EXPECT_NEAR(loglog_slope(eps, norms), 2.0, 0.2) << b;
  }
}

TEST(J0, LeadingTermIsFourthDerivative) {
  // m(k) - 1 + gamma k^2 = c4 k^4 + ..., so J0 ~ -c4 eps^2 sigma''''.
  const BondParams p(0.2);
  const double b = p.beta();
  const double c4 = (19.0 - 30.0 * b - 45.0 * b * b) / 360.0;
  const Grid g(80.0, 1024);
  const auto s = sigma_beta(p, g);
  const double e = 0.01;
  const auto j = j0(s, ScalingParams(p, e));
  const auto d4 = derivative(s.field, 4);
  for (int n = 0; n < g.size(); n += 17) EXPECT_NEAR(j[n], -c4 * e * e * d4[n], 1e-3 * e * e * d4.sup_norm());
}

TEST(S0, OddKernel) {
  for (double b : {0.1, 0.5}) {
    const auto s = sigma_beta(BondParams(b), Grid(40.0, 512));
    const auto ds = derivative(s.field, 1);
    EXPECT_LE(s0_apply(s, ds).sup_norm(), 1e-11 * ds.sup_norm()) << b;
  }
}

TEST(S0, SolveRoundTripDenseAndKrylov) {
  const auto s = sigma_beta(BondParams(0.2), Grid(40.0, 512));
  const auto r = SpectralField::sample(s.grid(), [](double x) { return std::exp(-0.3 * x * x) * (1.0 + x * x); });
  const auto rhs = s0_apply(s, r);
  LinearSolveOptions dense{.method = SolveMethod::Dense};
  LinearSolveOptions krylov{.method = SolveMethod::Krylov};
  const auto xd = s0_solve(s, rhs, dense);
  const auto xk = s0_solve(s, rhs, krylov);
  EXPECT_LE((xd - r).sup_norm(), 1e-10);
  EXPECT_LE((xk - r).sup_norm(), 1e-10);
  EXPECT_LE((xd - xk).sup_norm(), 1e-10);
}

TEST(S0, RejectsOddInput) {
  const auto s = sigma_beta(BondParams(0.2), Grid(40.0, 512));
  const auto odd = SpectralField::sample(s.grid(), [](double x) { return x * std::exp(-x * x); });
  try {
    s0_solve(s, odd);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(SolveEven, ZeroRhs) {
  LinearOp id = [](const Vec& v) { return v; };
  const Vec x = solve_even(id, Vec(16, 0.0), 16, {});
  for (double v : x) EXPECT_EQ(v, 0.0);
}
