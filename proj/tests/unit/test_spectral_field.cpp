#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "capwhitham/spectral_field.hpp"

using namespace capwhitham;
using std::numbers::pi;

namespace {

double sech2_half(double x) {
  const double s = 1.0 / std::cosh(0.5 * x);
  return s * s;
}

// (1/2pi) \int_{-L}^{L} f(x) cos(kx) dx by adaptive Gauss-Kronrod.
template <typename F>
double quad_coeff(F f, double k, double L) {
  auto g = [&](double x) { return f(x) * std::cos(k * x); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -L, L, 15, 1e-14) / (2.0 * pi);
}

template <typename Code>
void expect_code(Code&& body, ErrorCode code) {
  try {
    body();
    FAIL() << "no exception, expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Grid, Layout) {
  const Grid g(10.0, 64);
  EXPECT_DOUBLE_EQ(g.spacing(), 20.0 / 64);
  EXPECT_DOUBLE_EQ(g.x(0), -10.0);
  EXPECT_DOUBLE_EQ(g.x(32), 0.0);
  EXPECT_DOUBLE_EQ(g.dk(), pi / 10.0);
  EXPECT_EQ(g.freq_index(31), 31);
  EXPECT_EQ(g.freq_index(32), -32);
  EXPECT_EQ(g.freq_index(63), -1);
  EXPECT_EQ(g.slot(-1), 63);
  EXPECT_EQ(mirror(0, 64), 0);
  EXPECT_EQ(mirror(10, 64), 54);
  EXPECT_DOUBLE_EQ(g.x(mirror(10, 64)), -g.x(10));
}

TEST(Grid, Validation) {
  expect_code([] { Grid(0.0, 64); }, ErrorCode::NonPositiveInput);
  expect_code([] { Grid(-1.0, 64); }, ErrorCode::NonPositiveInput);
  expect_code([] { Grid(10.0, 100); }, ErrorCode::InvalidArgument);
  expect_code([] { Grid(10.0, 4); }, ErrorCode::InvalidArgument);
}

TEST(Transform, GaussianClosedForm) {
  const Grid g(30.0, 512);
  const auto f = SpectralField::sample(g, [](double x) { return std::exp(-0.5 * x * x); });
  for (int j = 0; j < g.size(); ++j) {
    const double k = g.k(j);
    const double exact = std::exp(-0.5 * k * k) / std::sqrt(2.0 * pi);
    EXPECT_NEAR(f.coeffs()[j].real(), exact, 1e-14);
    EXPECT_NEAR(f.coeffs()[j].imag(), 0.0, 1e-14);
  }
}

TEST(Transform, SechSquaredClosedFormAndQuadrature) {
  const Grid g(60.0, 1024);
  const auto f = SpectralField::sample(g, sech2_half);
  for (int j : {0, 1, 5, 20, 60}) {
    const double k = g.k(j);
    const double exact = k == 0.0 ? 2.0 / pi : 2.0 * k / std::sinh(pi * k);
    EXPECT_NEAR(f.coeffs()[j].real(), exact, 1e-13) << k;
    EXPECT_NEAR(quad_coeff(sech2_half, k, 60.0), exact, 1e-13) << k;
  }
}

TEST(Transform, ParsevalAndRoundTrip) {
  const Grid g(20.0, 256);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(gen);
  const auto c = transform(g, v);
  double lhs = 0.0, rhs = 0.0;
  for (int n = 0; n < g.size(); ++n) lhs += g.spacing() * v[n] * v[n];
  for (const auto& z : c) rhs += std::norm(z);
  rhs *= 2.0 * pi * g.dk();
  EXPECT_NEAR(lhs, rhs, 1e-12 * lhs);
  const auto back = inverse_transform(g, c);
  for (int n = 0; n < g.size(); ++n) EXPECT_NEAR(back[n], v[n], 1e-13);
  EXPECT_THROW(transform(g, std::vector<double>(10)), Error);
}

TEST(Multiplier, DerivativeOfGaussian) {
  const Grid g(30.0, 512);
  const auto f = SpectralField::sample(g, [](double x) { return std::exp(-0.5 * x * x); });
  const auto d1 = derivative(f, 1);
  const auto d2 = derivative(f, 2);
  for (int n = 0; n < g.size(); ++n) {
    const double x = g.x(n), e = std::exp(-0.5 * x * x);
    EXPECT_NEAR(d1[n], -x * e, 1e-12);
    EXPECT_NEAR(d2[n], (x * x - 1.0) * e, 1e-12);
  }
  EXPECT_LE(std::abs(d1.coeffs()[g.nyquist_slot()]), 1e-16);
}

TEST(Multiplier, NyquistZeroedAndCachedTableAgrees) {
  const Grid g(10.0, 64);
  std::vector<double> alt(g.size());
  for (int n = 0; n < g.size(); ++n) alt[n] = n % 2 == 0 ? 1.0 : -1.0;
  const SpectralField f(g, alt);
  const auto out = apply_multiplier(f, [](double) { return 1.0; });
  EXPECT_LT(out.sup_norm(), 1e-14);

  const auto h = SpectralField::sample(g, [](double x) { return 1.0 / std::cosh(x); });
  auto sym = [](double k) { return 1.0 / (1.0 + k * k); };
  const Multiplier m(g, sym);
  const auto a = apply_multiplier(h, m), b = apply_multiplier(h, sym);
  for (int n = 0; n < g.size(); ++n) EXPECT_NEAR(a[n], b[n], 1e-15);
}

TEST(Multiplier, NonFiniteSymbol) {
  const Grid g(10.0, 64);
  const auto f = SpectralField::sample(g, [](double x) { return std::exp(-x * x); });
  expect_code([&] { apply_multiplier(f, [](double k) { return 1.0 / k; }); }, ErrorCode::NonFiniteSymbol);
}

TEST(Symmetry, Helpers) {
  const Grid g(10.0, 64);
  const auto even = SpectralField::sample(g, [](double x) { return std::exp(-x * x); });
  const auto odd = SpectralField::sample(g, [](double x) { return x * std::exp(-x * x); });
  EXPECT_TRUE(even.is_even());
  EXPECT_FALSE(odd.is_even());
  const auto mixed = even + odd;
  const auto sym = mixed.symmetrized();
  EXPECT_TRUE(sym.is_even(0.0));
  for (int n = 0; n < g.size(); ++n) EXPECT_NEAR(sym[n], even[n], 1e-15);
  expect_code([&] { even + SpectralField::zeros(Grid(10.0, 128)); }, ErrorCode::SizeMismatch);
}

TEST(CoeffAt, MatchesCachedCoefficient) {
  const Grid g(40.0, 512);
  const auto f = SpectralField::sample(g, sech2_half);
  for (int j : {0, 3, 17, 40}) {
    EXPECT_NEAR(coeff_at(f, g.k(j)), f.coeffs()[j].real(), 1e-12);
    EXPECT_NEAR(coeff_at_complex(f, g.k(j)).imag(), 0.0, 1e-14);
  }
  // off-grid frequency against the closed form
  EXPECT_NEAR(coeff_at(f, 1.2345), 2.0 * 1.2345 / std::sinh(pi * 1.2345), 1e-12);
}

TEST(CoeffAt, BoundaryNotDecayed) {
  const Grid g(5.0, 64);
  const auto f = SpectralField::sample(g, [](double x) { return std::exp(-0.1 * x * x); });
  expect_code([&] { coeff_at(f, 1.0); }, ErrorCode::BoundaryNotDecayed);
}

TEST(WeightedNorm, QuadratureOracle) {
  const Grid g(30.0, 1024);
  const auto f = SpectralField::sample(g, [](double x) { return std::exp(-x * x); });
  // r = 0: || cosh^q f ||_{L2}
  for (double q : {0.0, 0.1, 1.0}) {
    auto integrand = [&](double x) {
      const double v = std::pow(std::cosh(x), q) * std::exp(-x * x);
      return v * v;
    };
    const double oracle =
        std::sqrt(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -30.0, 30.0, 15, 1e-14));
    EXPECT_NEAR(weighted_norm(f, {0.0, q}), oracle, 1e-12 * oracle) << q;
  }
  // r = 1: ||f||^2 + ||f'||^2
  auto h1 = [](double x) {
    const double e = std::exp(-x * x);
    return e * e * (1.0 + 4.0 * x * x);
  };
  const double oracle =
      std::sqrt(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(h1, -30.0, 30.0, 15, 1e-14));
  EXPECT_NEAR(weighted_norm(f, {1.0, 0.0}), oracle, 1e-12 * oracle);
  EXPECT_NEAR(weighted_norm(f, {0.0, 0.0}), f.l2_norm(), 1e-14);
}

TEST(WeightedNorm, Errors) {
  const Grid g(100.0, 64);
  const auto f = SpectralField::zeros(g);
  expect_code([&] { weighted_norm(f, {0.0, 7.0}); }, ErrorCode::WeightOverflow);
  expect_code([&] { weighted_norm(f, {-1.0, 0.0}); }, ErrorCode::InvalidArgument);
}
