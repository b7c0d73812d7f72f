#pragma once

// Phase-speed symbol of the capillary-gravity Whitham equation, its
// derivatives, the long-wave parameters and the critical resonant frequency.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "capwhitham/error.hpp"

namespace capwhitham {

enum class Regime { Weak, Strong };

inline std::string to_string(Regime r) { return r == Regime::Weak ? "weak" : "strong"; }

/// Bond number together with the long-wave coefficient gamma = (1 - 3 beta)/6.
class BondParams {
 public:
  explicit BondParams(double beta) : beta_(beta), gamma_((1.0 - 3.0 * beta) / 6.0) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      fail(ErrorCode::NonPositiveInput, "Bond number must be positive, got " + num(beta));
    }
    // beta = 1/3 is the degenerate KdV point; neither regime applies.
    if (std::abs(beta - 1.0 / 3.0) <= 1e-15) {
      fail(ErrorCode::WrongRegime, "beta = 1/3 separates the two regimes and is not supported");
    }
  }

  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  Regime regime() const noexcept { return beta_ < 1.0 / 3.0 ? Regime::Weak : Regime::Strong; }

 private:
  double beta_;
  double gamma_;
};

/// Long-wave scaling: c = 1 + gamma * eps^2 and w(y) = eps^2 W(eps y).
class ScalingParams {
 public:
  ScalingParams(const BondParams& params, double epsilon)
      : epsilon_(epsilon), c_(1.0 + params.gamma() * epsilon * epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      fail(ErrorCode::NonPositiveInput, "epsilon must be positive, got " + num(epsilon));
    }
  }

  double epsilon() const noexcept { return epsilon_; }
  double c() const noexcept { return c_; }

 private:
  double epsilon_;
  double c_;
};

/// beta = tau / (g d^2)
inline double bond_number(double g, double d, double tau) {
  if (!(g > 0.0) || !(d > 0.0) || !(tau > 0.0)) {
    fail(ErrorCode::NonPositiveInput, "gravity, depth and surface tension must all be positive");
  }
  return tau / (g * d * d);
}

inline BondParams nondimensionalize(double g, double d, double tau) {
  return BondParams(bond_number(g, d, tau));
}

namespace detail {

// Taylor coefficients of tanh(k)/k in powers of k^2.
inline constexpr std::array<double, 8> kTanhOverK = {
    1.0,
    -1.0 / 3.0,
    2.0 / 15.0,
    -17.0 / 315.0,
    62.0 / 2835.0,
    -1382.0 / 155925.0,
    21844.0 / 6081075.0,
    -929569.0 / 638512875.0,
};

inline constexpr double kTaylorSwitch = 1e-4;
inline constexpr double kSeriesSwitch = 0.05;

/// t(k) = tanh(k)/k and its first two derivatives, k >= 0.
struct TanhRatio {
  double t, dt, d2t;
};

inline TanhRatio tanh_ratio(double k) {
  if (k < kSeriesSwitch) {
    TanhRatio r{0.0, 0.0, 0.0};
    const double k2 = k * k;
    double pow = 1.0;  // k^(2n)
    for (std::size_t n = 0; n < kTanhOverK.size(); ++n) {
      const double a = kTanhOverK[n];
      r.t += a * pow;
      if (n >= 1) {
        // d/dk k^(2n) = 2n k^(2n-1);  d2/dk2 = 2n(2n-1) k^(2n-2)
        const double pm2 = pow / k2;  // k^(2n-2)
        r.dt += a * 2.0 * n * pm2 * k;
        r.d2t += a * 2.0 * n * (2.0 * n - 1.0) * pm2;
      }
      pow *= k2;
    }
    if (k == 0.0) {
      r.dt = 0.0;
      r.d2t = 2.0 * kTanhOverK[1];
    }
    return r;
  }
  const double th = std::tanh(k);
  const double sech2 = 1.0 - th * th;
  const double t = th / k;
  const double dt = sech2 / k - th / (k * k);
  const double d2t = -2.0 * sech2 * th / k - 2.0 * sech2 / (k * k) + 2.0 * th / (k * k * k);
  return {t, dt, d2t};
}

}  // namespace detail

/// m_beta(k) = sqrt((1 + beta k^2) tanh(k)/k); even, m_beta(0) = 1.
inline double m_beta(const BondParams& params, double k) {
  const double ak = std::abs(k);
  const double b = params.beta();
  double t;
  if (ak < detail::kTaylorSwitch) {
    const double k2 = ak * ak;
    t = 1.0 + k2 * (detail::kTanhOverK[1] + k2 * (detail::kTanhOverK[2] + k2 * detail::kTanhOverK[3]));
  } else {
    t = std::tanh(ak) / ak;
  }
  return std::sqrt((1.0 + b * ak * ak) * t);
}

/// Closed-form first (order = 1) or second (order = 2) derivative of m_beta.
inline double m_beta_deriv(const BondParams& params, double k, int order) {
  if (order != 1 && order != 2) {
    fail(ErrorCode::InvalidArgument, "derivative order must be 1 or 2");
  }
  const double ak = std::abs(k);
  const double b = params.beta();
  const auto tr = detail::tanh_ratio(ak);
  const double q = 1.0 + b * ak * ak;
  const double p = q * tr.t;
  const double dp = 2.0 * b * ak * tr.t + q * tr.dt;
  const double m = std::sqrt(p);
  if (order == 1) {
    const double d1 = dp / (2.0 * m);
    return k < 0.0 ? -d1 : d1;
  }
  const double d2p = 2.0 * b * tr.t + 4.0 * b * ak * tr.dt + q * tr.d2t;
  return d2p / (2.0 * m) - dp * dp / (4.0 * m * m * m);
}

/// l_eps(K) = eps^-2 (m_beta(eps K) - 1 - gamma eps^2), the symbol of the
/// scaled linear operator; it vanishes at +-K_eps in the weak regime.
inline double l_eps(const BondParams& params, const ScalingParams& scaling, double K) {
  const double e = scaling.epsilon();
  return (m_beta(params, e * K) - 1.0 - params.gamma() * e * e) / (e * e);
}

struct RootOptions {
  double tol = 1e-13;  // absolute bound on |m_beta(k) - c|
};

/// Global minimiser of m_beta on (0, inf) for the weak regime.
inline double k_min(const BondParams& params) {
  if (params.regime() != Regime::Weak) {
    fail(ErrorCode::WrongRegime, "m_beta has an interior minimum only for beta < 1/3");
  }
  // The minimiser sits near 1/sqrt(beta) for small beta, so widen (0, 10) when needed.
  const double hi = std::max(10.0, 3.0 / std::sqrt(params.beta()));
  std::uintmax_t max_iter = 500;
  auto res = boost::math::tools::brent_find_minima(
      [&](double k) { return m_beta(params, k); }, 1e-6, hi, std::numeric_limits<double>::digits / 2,
      max_iter);
  // Polish with Newton on m' so that the location is accurate beyond sqrt(eps).
  double k = res.first;
  for (int i = 0; i < 8; ++i) {
    const double d2 = m_beta_deriv(params, k, 2);
    if (!(d2 > 0.0)) break;
    const double step = m_beta_deriv(params, k, 1) / d2;
    k -= step;
    if (std::abs(step) <= 1e-15 * k) break;
  }
  return k;
}

/// The unique k > k_min with m_beta(k) = c (critical resonant frequency).
inline double k_crit(const BondParams& params, double c, RootOptions opts = {}) {
  if (params.regime() != Regime::Weak) {
    fail(ErrorCode::WrongRegime, "critical frequency exists only for beta < 1/3");
  }
  const double kmin = k_min(params);
  const double mmin = m_beta(params, kmin);
  if (c < mmin) {
    fail(ErrorCode::NoRoot, "speed " + num(c) + " is below min m_beta = " + num(mmin));
  }
  auto f = [&](double k) { return m_beta(params, k) - c; };
  if (f(kmin) == 0.0) return kmin;
  double hi = 2.0 * kmin;
  while (f(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e12) fail(ErrorCode::NoRoot, "failed to bracket critical frequency");
  }
  std::uintmax_t max_iter = 400;
  auto bracket = boost::math::tools::bisect(
      f, kmin, hi, [](double a, double b) { return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b); },
      max_iter);
  const double lo_k = bracket.first;
  const double hi_k = bracket.second;
  const double k = std::abs(f(lo_k)) <= std::abs(f(hi_k)) ? lo_k : hi_k;
  if (std::abs(f(k)) > opts.tol) {
    fail(ErrorCode::NoRoot, "bisection stalled with residual " + num(std::abs(f(k))));
  }
  return k;
}

/// K_eps = k_crit(beta, 1 + gamma eps^2) / eps.
inline double K_eps(const BondParams& params, const ScalingParams& scaling, RootOptions opts = {}) {
  return k_crit(params, scaling.c(), opts) / scaling.epsilon();
}

}  // namespace capwhitham
