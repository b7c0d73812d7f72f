#pragma once

// Real profiles on the periodic truncation [-L, L) of the line.
//
// Fourier convention: for the grid frequency k_j = j pi / L the stored
// coefficient is the trapezoidal approximation of
//     f^(k_j) = (1 / 2 pi) \int f(x) exp(-i k_j x) dx,
// i.e. c_j = (h / 2 pi) sum_n f(x_n) exp(-i k_j x_n), and the inverse is the
// Riemann sum f(x_n) = (pi / L) sum_j c_j exp(i k_j x_n). With this choice
// c_j approximates the continuous transform directly (no extra factor), and
// Parseval reads  h sum f_n^2 = 2 pi (pi / L) sum |c_j|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "capwhitham/error.hpp"
#include "capwhitham/fft.hpp"

namespace capwhitham {

using cplx = std::complex<double>;

class Grid {
 public:
  Grid(double half_length, int n_points) : half_length_(half_length), n_(n_points) {
    if (!(half_length > 0.0) || !std::isfinite(half_length)) {
      fail(ErrorCode::NonPositiveInput, "grid half-length must be positive");
    }
    if (n_points < 8 || (n_points & (n_points - 1)) != 0) {
      fail(ErrorCode::InvalidArgument, "grid size must be a power of two >= 8, got " + num(n_points));
    }
  }

  double half_length() const noexcept { return half_length_; }
  int size() const noexcept { return n_; }
  double spacing() const noexcept { return 2.0 * half_length_ / n_; }
  double dk() const noexcept { return std::numbers::pi / half_length_; }

  double x(int n) const noexcept { return -half_length_ + n * spacing(); }

  /// Signed frequency index of FFT slot j (the Nyquist slot maps to -N/2).
  int freq_index(int j) const noexcept { return j < n_ / 2 ? j : j - n_; }
  double k(int j) const noexcept { return freq_index(j) * dk(); }

  /// FFT slot holding signed frequency index m, |m| < N/2.
  int slot(int m) const noexcept { return m >= 0 ? m : m + n_; }
  int nyquist_slot() const noexcept { return n_ / 2; }

  std::vector<double> points() const {
    std::vector<double> xs(n_);
    for (int n = 0; n < n_; ++n) xs[n] = x(n);
    return xs;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.half_length_ == b.half_length_ && a.n_ == b.n_;
  }

 private:
  double half_length_;
  int n_;
};

/// Forward transform under the convention above.
inline std::vector<cplx> transform(const Grid& grid, std::span<const double> values) {
  if (static_cast<int>(values.size()) != grid.size()) {
    fail(ErrorCode::SizeMismatch, "sample count does not match grid");
  }
  std::vector<cplx> data(values.begin(), values.end());
  auto out = fft::forward(data);
  const double scale = grid.spacing() / (2.0 * std::numbers::pi);
  for (int j = 0; j < grid.size(); ++j) {
    // x_0 = -L contributes the phase exp(i k_j L) = (-1)^j.
    out[j] *= (j % 2 == 0 ? scale : -scale);
  }
  return out;
}

/// Inverse transform; returns real parts (callers supply Hermitian data).
inline std::vector<double> inverse_transform(const Grid& grid, std::span<const cplx> coeffs) {
  if (static_cast<int>(coeffs.size()) != grid.size()) {
    fail(ErrorCode::SizeMismatch, "coefficient count does not match grid");
  }
  std::vector<cplx> data(coeffs.begin(), coeffs.end());
  for (int j = 0; j < grid.size(); ++j) {
    if (j % 2 != 0) data[j] = -data[j];
  }
  auto out = fft::backward(data);
  const double scale = grid.dk();
  std::vector<double> values(grid.size());
  for (int n = 0; n < grid.size(); ++n) values[n] = scale * out[n].real();
  return values;
}

/// Mirror index of x_n -> -x_n.
inline int mirror(int n, int size) { return (size - n) % size; }

inline double asymmetry(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  double worst = 0.0;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(v[i] - v[mirror(i, n)]));
    scale = std::max(scale, std::abs(v[i]));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

inline void symmetrize(std::span<double> v) {
  const int n = static_cast<int>(v.size());
  for (int i = 1; i < n / 2; ++i) {
    const double avg = 0.5 * (v[i] + v[n - i]);
    v[i] = avg;
    v[n - i] = avg;
  }
}

/// Symbol values tabulated on the grid frequencies; the Nyquist entry is zero.
class Multiplier {
 public:
  template <typename Symbol>
  Multiplier(const Grid& grid, Symbol&& symbol) : grid_(grid), values_(grid.size()) {
    for (int j = 0; j < grid.size(); ++j) {
      if (j == grid.nyquist_slot()) continue;
      const double s = symbol(grid.k(j));
      if (!std::isfinite(s)) {
        fail(ErrorCode::NonFiniteSymbol, "symbol is not finite at k = " + num(grid.k(j)));
      }
      values_[j] = s;
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](int j) const noexcept { return values_[j]; }

  std::vector<double> apply(std::span<const double> samples) const {
    auto c = transform(grid_, samples);
    for (int j = 0; j < grid_.size(); ++j) c[j] *= values_[j];
    return inverse_transform(grid_, c);
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// An immutable real profile with its cached discrete Fourier coefficients.
class SpectralField {
 public:
  SpectralField(const Grid& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)), coeffs_(transform(grid_, values_)) {}

  static SpectralField zeros(const Grid& grid) {
    return SpectralField(grid, std::vector<double>(grid.size(), 0.0));
  }

  template <typename F>
  static SpectralField sample(const Grid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (int n = 0; n < grid.size(); ++n) v[n] = f(grid.x(n));
    return SpectralField(grid, std::move(v));
  }

  static SpectralField from_coeffs(const Grid& grid, std::span<const cplx> coeffs) {
    return SpectralField(grid, inverse_transform(grid, coeffs));
  }

  const Grid& grid() const noexcept { return grid_; }
  int size() const noexcept { return grid_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }
  double operator[](int n) const noexcept { return values_[n]; }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Discrete L2 norm sqrt(h sum f^2).
  double l2_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(grid_.spacing() * s);
  }

  double asymmetry() const { return capwhitham::asymmetry(values_); }
  bool is_even(double tol = 1e-12) const { return asymmetry() <= tol; }

  SpectralField symmetrized() const {
    auto v = values_;
    symmetrize(v);
    return SpectralField(grid_, std::move(v));
  }

  SpectralField scaled(double s) const {
    auto v = values_;
    for (double& x : v) x *= s;
    return SpectralField(grid_, std::move(v));
  }

  friend SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    return combine(a, b, [](double x, double y) { return x + y; });
  }
  friend SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    return combine(a, b, [](double x, double y) { return x - y; });
  }
  friend SpectralField operator*(const SpectralField& a, const SpectralField& b) {
    return combine(a, b, [](double x, double y) { return x * y; });
  }
  friend SpectralField operator*(double s, const SpectralField& a) { return a.scaled(s); }

 private:
  template <typename Op>
  static SpectralField combine(const SpectralField& a, const SpectralField& b, Op op) {
    if (!(a.grid_ == b.grid_)) fail(ErrorCode::SizeMismatch, "fields live on different grids");
    std::vector<double> v(a.size());
    for (int n = 0; n < a.size(); ++n) v[n] = op(a.values_[n], b.values_[n]);
    return SpectralField(a.grid_, std::move(v));
  }

  Grid grid_;
  std::vector<double> values_;
  std::vector<cplx> coeffs_;
};

/// Multiply the coefficients by symbol(k_j). The Nyquist mode is zeroed.
template <typename Symbol>
SpectralField apply_multiplier(const SpectralField& field, Symbol&& symbol) {
  const Grid& g = field.grid();
  std::vector<cplx> c(field.coeffs().begin(), field.coeffs().end());
  for (int j = 0; j < g.size(); ++j) {
    if (j == g.nyquist_slot()) {
      c[j] = 0.0;
      continue;
    }
    const auto s = symbol(g.k(j));
    if (!std::isfinite(std::abs(cplx(s)))) {
      fail(ErrorCode::NonFiniteSymbol, "symbol is not finite at k = " + num(g.k(j)));
    }
    c[j] *= s;
  }
  return SpectralField::from_coeffs(g, c);
}

inline SpectralField apply_multiplier(const SpectralField& field, const Multiplier& mult) {
  if (!(field.grid() == mult.grid())) fail(ErrorCode::SizeMismatch, "multiplier built for another grid");
  return SpectralField(field.grid(), mult.apply(field.values()));
}

/// Spectral derivative of the given order.
inline SpectralField derivative(const SpectralField& field, int order) {
  return apply_multiplier(field, [order](double k) { return std::pow(cplx(0.0, k), order); });
}

inline constexpr double kBoundaryDecay = 1e-9;

/// (1/2pi) \int f(x) exp(-iKx) dx by the trapezoidal rule on the grid.
/// For even fields the imaginary part vanishes and only the real part is kept.
inline double coeff_at(const SpectralField& field, double K) {
  const Grid& g = field.grid();
  const auto v = field.values();
  const double edge = std::abs(v[0]);
  const double peak = field.sup_norm();
  if (peak > 0.0 && edge > kBoundaryDecay * peak) {
    fail(ErrorCode::BoundaryNotDecayed,
         "|f(+-L)| / max|f| = " + num(edge / peak) + " exceeds " + num(kBoundaryDecay));
  }
  double re = 0.0;
  for (int n = 0; n < g.size(); ++n) re += v[n] * std::cos(K * g.x(n));
  return g.spacing() / (2.0 * std::numbers::pi) * re;
}

/// Complex variant used to confirm the imaginary part of an even field vanishes.
inline cplx coeff_at_complex(const SpectralField& field, double K) {
  const Grid& g = field.grid();
  cplx s = 0.0;
  for (int n = 0; n < g.size(); ++n) s += field[n] * std::polar(1.0, -K * g.x(n));
  return g.spacing() / (2.0 * std::numbers::pi) * s;
}

struct WeightedNorm {
  double r = 0.0;  // Sobolev regularity
  double q = 0.0;  // exponential weight cosh(x)^q
};

/// || cosh^q f ||_{H^r} with H^r weight (1 + k^2)^r on the coefficients:
///   sqrt(2 pi (pi/L) sum_j (1 + k_j^2)^r |g_j|^2),  g = cosh^q f.
/// Reduces to sqrt(h sum f^2) for r = q = 0.
inline double weighted_norm(const SpectralField& field, WeightedNorm norm) {
  const Grid& g = field.grid();
  if (norm.r < 0.0 || norm.q < 0.0) fail(ErrorCode::InvalidArgument, "norm indices must be non-negative");
  if (norm.q * g.half_length() > 600.0) {
    fail(ErrorCode::WeightOverflow, "q * L = " + num(norm.q * g.half_length()) + " exceeds 600");
  }
  std::vector<double> w(g.size());
  for (int n = 0; n < g.size(); ++n) w[n] = std::pow(std::cosh(g.x(n)), norm.q) * field[n];
  const auto c = transform(g, w);
  double s = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double k = g.k(j);
    s += std::pow(1.0 + k * k, norm.r) * std::norm(c[j]);
  }
  return std::sqrt(2.0 * std::numbers::pi * g.dk() * s);
}

}  // namespace capwhitham
