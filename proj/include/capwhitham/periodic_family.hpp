#pragma once

// Small-amplitude periodic solutions W(X) = a phi(K X) of the scaled profile
// equation, phi(y) = sum_n c_n cos(n y) with the normalisation c_1 = 1.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capwhitham/dispersion.hpp"
#include "capwhitham/spectral_field.hpp"

namespace capwhitham {

struct PeriodicWave {
  BondParams params;
  ScalingParams scaling;
  double a = 0.0;
  double K = 0.0;
  std::vector<double> cos_coeffs;  // c_0 .. c_M

  int harmonics() const noexcept { return static_cast<int>(cos_coeffs.size()) - 1; }

  /// phi(y) by Clenshaw summation of the cosine series.
  double phi(double y) const {
    const double x = std::cos(y);
    double b1 = 0.0, b2 = 0.0;
    for (int n = harmonics(); n >= 1; --n) {
      const double b0 = cos_coeffs[n] + 2.0 * x * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return cos_coeffs[0] + x * b1 - b2;
  }

  /// Phi(X) = phi(K X)
  double profile(double X) const { return phi(K * X); }
};

namespace detail {

/// Cosine coefficients 0..M of phi^2 (truncated).
inline std::vector<double> square_cos_coeffs(const std::vector<double>& c) {
  const int M = static_cast<int>(c.size()) - 1;
  auto d = [&](int p) { return p == 0 ? c[0] : 0.5 * c[std::abs(p)]; };
  std::vector<double> q(M + 1, 0.0);
  for (int n = 0; n <= M; ++n) {
    double e = 0.0;
    for (int p = std::max(-M, n - M); p <= std::min(M, n + M); ++p) e += d(p) * d(n - p);
    q[n] = n == 0 ? e : 2.0 * e;
  }
  return q;
}

/// d Q_n / d c_m for Q = square_cos_coeffs(c).
inline Eigen::MatrixXd square_jacobian(const std::vector<double>& c) {
  const int M = static_cast<int>(c.size()) - 1;
  auto d = [&](int p) { return std::abs(p) > M ? 0.0 : (p == 0 ? c[0] : 0.5 * c[std::abs(p)]); };
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(M + 1, M + 1);
  for (int n = 0; n <= M; ++n) {
    const double w = n == 0 ? 1.0 : 2.0;
    for (int m = 0; m <= M; ++m) {
      const double de = m == 0 ? 2.0 * d(n) : d(n - m) + d(n + m);
      J(n, m) = w * de;
    }
  }
  return J;
}

/// Residual divided by a eps^2: l_eps(nK) c_n + a (phi^2)_n, plus c_1 - 1.
inline Eigen::VectorXd scaled_residual(const BondParams& params, const ScalingParams& scaling, double a, double K,
                                       const std::vector<double>& c) {
  const int M = static_cast<int>(c.size()) - 1;
  const auto q = square_cos_coeffs(c);
  Eigen::VectorXd r(M + 2);
  for (int n = 0; n <= M; ++n) r(n) = l_eps(params, scaling, n * K) * c[n] + a * q[n];
  r(M + 1) = c[1] - 1.0;
  return r;
}

}  // namespace detail

/// Mode-by-mode residual of the scaled profile equation for W = a phi(K X):
///   [m(eps n K) - 1 - gamma eps^2] a c_n + eps^2 a^2 (phi^2)_n,  n = 0..M,
/// followed by the normalisation residual c_1 - 1.
inline std::vector<double> periodic_residual(const PeriodicWave& wave) {
  const double e = wave.scaling.epsilon();
  const double g = wave.params.gamma();
  const auto q = detail::square_cos_coeffs(wave.cos_coeffs);
  const int M = wave.harmonics();
  std::vector<double> r(M + 2);
  for (int n = 0; n <= M; ++n) {
    r[n] = (m_beta(wave.params, e * n * wave.K) - 1.0 - g * e * e) * wave.a * wave.cos_coeffs[n] +
           e * e * wave.a * wave.a * q[n];
  }
  r[M + 1] = wave.cos_coeffs[1] - 1.0;
  return r;
}

/// sup-norm of the amplitude-scaled residual l_eps(nK) c_n + a (phi^2)_n.
inline double periodic_scaled_residual(const PeriodicWave& wave) {
  return detail::scaled_residual(wave.params, wave.scaling, wave.a, wave.K, wave.cos_coeffs).lpNorm<Eigen::Infinity>();
}

struct PeriodicOptions {
  int harmonics = 32;
  int max_harmonics = 512;
  double alpha0 = 0.05;  // upper cap; see amplitude_bound
  int continuation_steps = 10;
  int max_newton = 50;
  double tol = 1e-13;         // Newton target on the scaled residual
  double accept = 1e-12;      // required final scaled residual
  double tail_ratio = 1e-10;  // |c_M| <= tail_ratio * max |c_n|
};

/// Largest amplitude accepted by solve_periodic. The mean mode satisfies
/// a c_0^2 - gamma c_0 + a/2 ~ 0, so the branch folds near a = gamma / sqrt(2);
/// stay well inside at gamma / 4.
inline double amplitude_bound(const BondParams& params, const PeriodicOptions& opts = {}) {
  return std::min(opts.alpha0, 0.25 * std::abs(params.gamma()));
}

/// The a = 0 member: phi = cos, K = K_eps.
inline PeriodicWave periodic_seed(const BondParams& params, const ScalingParams& scaling, int harmonics) {
  std::vector<double> c(harmonics + 1, 0.0);
  c[1] = 1.0;
  return {params, scaling, 0.0, K_eps(params, scaling), std::move(c)};
}

namespace detail {

inline void newton_periodic(PeriodicWave& w, const PeriodicOptions& opts) {
  const int M = w.harmonics();
  const double e = w.scaling.epsilon();
  auto res = scaled_residual(w.params, w.scaling, w.a, w.K, w.cos_coeffs);
  double rnorm = res.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < opts.max_newton && rnorm > opts.tol; ++it) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(M + 2, M + 2);
    J.topLeftCorner(M + 1, M + 1) = w.a * square_jacobian(w.cos_coeffs);
    for (int n = 0; n <= M; ++n) {
      J(n, n) += l_eps(w.params, w.scaling, n * w.K);
      // d/dK of l_eps(nK) = eps^-1 n m'(eps n K)
      J(n, M + 1) = n == 0 ? 0.0 : n * m_beta_deriv(w.params, e * n * w.K, 1) / e * w.cos_coeffs[n];
    }
    J(M + 1, 1) = 1.0;
    Eigen::VectorXd step = J.partialPivLu().solve(-res);
    double damping = 1.0;
    bool improved = false;
    for (int halvings = 0; halvings < 30; ++halvings, damping *= 0.5) {
      std::vector<double> c = w.cos_coeffs;
      for (int n = 0; n <= M; ++n) c[n] += damping * step(n);
      const double K = w.K + damping * step(M + 1);
      auto trial = scaled_residual(w.params, w.scaling, w.a, K, c);
      const double tn = trial.lpNorm<Eigen::Infinity>();
      if (tn < rnorm) {
        w.cos_coeffs = std::move(c);
        w.K = K;
        res = trial;
        rnorm = tn;
        improved = true;
        break;
      }
    }
    if (!improved) break;  // residual is at roundoff level
  }
  if (!(rnorm <= opts.accept)) {
    fail(ErrorCode::NewtonDivergence, "periodic Newton stalled at scaled residual " + num(rnorm) +
                                          " for a = " + num(w.a));
  }
}

}  // namespace detail

/// Continue from the a = 0 seed to amplitude a in equal steps, Newton at each.
inline PeriodicWave solve_periodic(const BondParams& params, const ScalingParams& scaling, double a,
                                   const PeriodicOptions& opts = {}) {
  if (params.regime() != Regime::Weak) {
    fail(ErrorCode::WrongRegime, "periodic family is built for beta < 1/3");
  }
  const double bound = amplitude_bound(params, opts);
  if (std::abs(a) > bound) {
    fail(ErrorCode::InvalidArgument, "amplitude " + num(a) + " exceeds alpha0 = " + num(bound));
  }
  for (int M = opts.harmonics; M <= opts.max_harmonics; M *= 2) {
    PeriodicWave w = periodic_seed(params, scaling, M);
    if (a != 0.0) {
      for (int s = 1; s <= opts.continuation_steps; ++s) {
        w.a = a * s / opts.continuation_steps;
        detail::newton_periodic(w, opts);
      }
    }
    double cmax = 0.0;
    for (double c : w.cos_coeffs) cmax = std::max(cmax, std::abs(c));
    if (std::abs(w.cos_coeffs[M]) <= opts.tail_ratio * cmax) return w;
  }
  fail(ErrorCode::AliasingTail, "cosine series not resolved within " + num(opts.max_harmonics) + " harmonics");
}

/// Grid whose half-length makes frequency K exactly representable:
/// L = j pi / K with j = round(K target_L / pi).
inline Grid snap_grid(double K, double target_L, int n_points, int* index = nullptr) {
  const int j = std::max(1, static_cast<int>(std::lround(K * target_L / std::numbers::pi)));
  if (index) *index = j;
  return Grid(j * std::numbers::pi / K, n_points);
}

inline constexpr double kOnGridTol = 1e-9;

/// Sample Phi(X) = phi(K X) (times a when `times_amplitude`) on the grid.
/// With `require_on_grid`, K L / pi must be an integer so the sample is periodic.
inline SpectralField sample_on_grid(const PeriodicWave& wave, const Grid& grid, bool times_amplitude = false,
                                    bool require_on_grid = false) {
  if (require_on_grid) {
    const double j = wave.K * grid.half_length() / std::numbers::pi;
    if (std::abs(j - std::round(j)) > kOnGridTol) {
      fail(ErrorCode::OffGridFrequency, "K L / pi = " + num(j) + " is not an integer");
    }
  }
  const double s = times_amplitude ? wave.a : 1.0;
  return SpectralField::sample(grid, [&](double X) { return s * wave.profile(X); });
}

}  // namespace capwhitham
