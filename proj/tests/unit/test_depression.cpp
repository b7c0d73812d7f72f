#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "capwhitham/depression.hpp"

using namespace capwhitham;

namespace {

template <typename Body>
void expect_code(Body&& body, ErrorCode code) {
  try {
    body();
    FAIL() << "no exception, expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Petviashvili iteration for (c - M) w = w^2, started from the sech^2 guess.
SpectralField petviashvili(const BondParams& p, const ScalingParams& s, const Grid& g) {
  auto w = SpectralField::sample(g, [&](double x) { return depression_leading(p, s, x); });
  auto inv = [&](double k) { return 1.0 / (s.c() - m_beta(p, k)); };
  auto A = [&](double k) { return s.c() - m_beta(p, k); };
  for (int it = 0; it < 500; ++it) {
    const auto w2 = w * w;
    const auto Aw = apply_multiplier(w, A);
    double num = 0.0, den = 0.0;
    for (int n = 0; n < g.size(); ++n) {
      num += Aw[n] * w[n];
      den += w2[n] * w[n];
    }
    const double S = num / den;
    const auto next = apply_multiplier(w2, inv).scaled(S * S).symmetrized();
    const double step = (next - w).sup_norm();
    w = next;
    if (step <= 1e-16 * w.sup_norm()) break;
  }
  return w;
}

const DepressionWave& reference() {
  static const DepressionWave w = [] {
    const BondParams p(0.5);
    return solve_depression(p, ScalingParams(p, 0.1));
  }();
  return w;
}

}  // namespace

TEST(Depression, Errors) {
  const BondParams weak(0.1), strong(0.5);
  expect_code([&] { solve_depression(weak, ScalingParams(weak, 0.1)); }, ErrorCode::SymbolNotCoercive);
  DepressionOptions small;
  small.L_scaled = 10.0;
  expect_code([&] { solve_depression(strong, ScalingParams(strong, 0.1), small); }, ErrorCode::InvalidArgument);
  const std::vector<double> three{0.3, 0.2, 0.1}, rising{0.1, 0.2, 0.3, 0.4};
  expect_code([&] { remainder_scaling(strong, three); }, ErrorCode::InvalidArgument);
  expect_code([&] { remainder_scaling(strong, rising); }, ErrorCode::InvalidArgument);
}

TEST(Depression, ShapeAndResidual) {
  const auto& w = reference();
  const int mid = w.w.size() / 2;
  EXPECT_LT(w.w[mid], 0.0);
  EXPECT_NEAR(w.w[mid], -1.2508e-3, 1e-7);
  EXPECT_TRUE(w.w.is_even(0.0));
  EXPECT_EQ(count_critical_points(w.w), 1);
  double maxv = -1.0;
  for (double v : w.w.values()) maxv = std::max(maxv, v);
  EXPECT_LE(maxv, 1e-13);
  EXPECT_LT(w.scaling.c(), 1.0);
  EXPECT_LE(w.residual, 1e-11);
  EXPECT_LE(full_residual(w.params, w.scaling, w.w, Variables::Physical), 1e-11);
}

TEST(Depression, MatchesPetviashviliOracle) {
  for (double b : {0.5, 2.0}) {
    const BondParams p(b);
    const ScalingParams s(p, 0.15);
    const auto grid = depression_grid(s);
    const auto w = solve_depression(p, s, grid);
    const auto oracle = petviashvili(p, s, grid);
    EXPECT_LE((w.w - oracle).sup_norm(), 1e-10 * w.w.sup_norm()) << b;
  }
}

TEST(Depression, IndependentOfInitialGuess) {
  const BondParams p(0.5);
  const ScalingParams s(p, 0.1);
  DepressionOptions o;
  o.guess_scale = 1.2;
  const auto w = solve_depression(p, s, o);
  EXPECT_LE((w.w - reference().w).sup_norm(), 1e-9 * reference().w.sup_norm());
}

TEST(Depression, SpectrumDecays) {
  const auto& w = reference();
  const auto c = w.w.coeffs();
  double peak = 0.0;
  for (const auto& z : c) peak = std::max(peak, std::abs(z));
  EXPECT_LE(std::abs(c[w.w.size() / 2 - 1]), 1e-13 * peak);
}

TEST(Depression, RemainderScaling) {
  const std::vector<double> eps{0.3, 0.2, 0.15, 0.1};
  for (double b : {0.5, 2.0}) {
    const BondParams p(b);
    const auto r0 = remainder_scaling(p, eps, 0);
    const auto r1 = remainder_scaling(p, eps, 1);
    EXPECT_GE(r0.slope, 3.5) << b;
    EXPECT_GE(r1.slope, 3.5) << b;
    for (double res : r0.residuals) EXPECT_LE(res, 1e-11);
  }
}

TEST(Depression, LeadingTermProfile) {
  const BondParams p(0.5);
  const ScalingParams s(p, 0.1);
  EXPECT_DOUBLE_EQ(depression_leading(p, s, 0.0), -0.01 * 0.125);
  EXPECT_NEAR(depression_leading(p, s, 20.0), -0.00125 / std::pow(std::cosh(1.0), 2), 1e-18);
}
