#pragma once

// Modulational stability index of the periodic waves:
//   Delta_BF(k) = 2 (m(k) - m(2k)) + ((k m)'(k) - m(0))
//   Delta_MI(k) = (k m)''(k) ((k m)'(k) - m(0)) / (m(k) - m(2k)) * Delta_BF(k)
// Delta_MI < 0 means modulationally unstable.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "capwhitham/dispersion.hpp"
#include "capwhitham/parallel.hpp"

namespace capwhitham {

/// (k m)' = m + k m'
inline double group_velocity(const BondParams& params, double k) {
  return m_beta(params, k) + k * m_beta_deriv(params, k, 1);
}

/// (k m)'' = 2 m' + k m''
inline double group_velocity_deriv(const BondParams& params, double k) {
  return 2.0 * m_beta_deriv(params, k, 1) + k * m_beta_deriv(params, k, 2);
}

inline void require_positive_k(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorCode::InvalidArgument, "wavenumber must be positive, got " + num(k));
}

inline double delta_bf(const BondParams& params, double k) {
  require_positive_k(k);
  return 2.0 * (m_beta(params, k) - m_beta(params, 2.0 * k)) + (group_velocity(params, k) - 1.0);
}

inline constexpr double kResonanceTol = 1e-12;

/// (k m)'' ((k m)' - 1) / (m(k) - m(2k))
inline double delta_mi_prefactor(const BondParams& params, double k) {
  require_positive_k(k);
  const double den = m_beta(params, k) - m_beta(params, 2.0 * k);
  if (std::abs(den) <= kResonanceTol) {
    fail(ErrorCode::ResonantDenominator, "m(k) - m(2k) = " + num(den) + " at k = " + num(k));
  }
  return group_velocity_deriv(params, k) * (group_velocity(params, k) - 1.0) / den;
}

inline double delta_mi(const BondParams& params, double k) {
  return delta_mi_prefactor(params, k) * delta_bf(params, k);
}

namespace detail {

/// Richardson table on a base difference quotient with step halving.
template <typename Quotient>
double richardson(Quotient&& q, double h0, int levels = 5) {
  std::vector<std::vector<double>> t(levels);
  double h = h0;
  for (int i = 0; i < levels; ++i, h *= 0.5) {
    t[i].resize(i + 1);
    t[i][0] = q(h);
    double f = 4.0;
    for (int j = 1; j <= i; ++j, f *= 4.0) t[i][j] = t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / (f - 1.0);
  }
  return t[levels - 1][levels - 1];
}

}  // namespace detail

/// Delta_MI with (k m)' and (k m)'' from Richardson-extrapolated central
/// differences of k m(k); uses nothing but m_beta.
inline double delta_mi_finite_difference(const BondParams& params, double k) {
  require_positive_k(k);
  auto g = [&](double x) { return x * m_beta(params, x); };
  const double h0 = 0.05 * std::max(k, 0.2);
  const double d1 = detail::richardson([&](double h) { return (g(k + h) - g(k - h)) / (2.0 * h); }, h0);
  const double d2 = detail::richardson([&](double h) { return (g(k + h) - 2.0 * g(k) + g(k - h)) / (h * h); }, h0);
  const double m1 = m_beta(params, k), m2 = m_beta(params, 2.0 * k);
  const double bf = 2.0 * (m1 - m2) + (d1 - 1.0);
  return d2 * (d1 - 1.0) / (m1 - m2) * bf;
}

enum class Verdict { Stable, Unstable, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "S";
    case Verdict::Unstable: return "U";
    case Verdict::Indeterminate: return "I";
  }
  return "?";
}

inline constexpr double kIndeterminateBand = 1e-9;

inline Verdict classify(double delta_mi_value, double band = kIndeterminateBand) {
  if (!std::isfinite(delta_mi_value)) return Verdict::Indeterminate;
  if (delta_mi_value > band) return Verdict::Stable;
  if (delta_mi_value < -band) return Verdict::Unstable;
  return Verdict::Indeterminate;
}

struct StabilitySample {
  double beta = 0.0;
  double k = 0.0;
  double delta_bf = 0.0;
  double delta_mi = 0.0;  // NaN at a resonant denominator
  Verdict verdict = Verdict::Indeterminate;
};

inline StabilitySample stability_sample(const BondParams& params, double k) {
  StabilitySample s{params.beta(), k, delta_bf(params, k), std::numeric_limits<double>::quiet_NaN(),
                    Verdict::Indeterminate};
  try {
    s.delta_mi = delta_mi(params, k);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ResonantDenominator) throw;
  }
  s.verdict = classify(s.delta_mi);
  return s;
}

enum class Mechanism : int {
  GroupVelocityExtremum = 1,    // (k m)'' = 0
  LongShortResonance = 2,       // (k m)' = m(0)
  SecondHarmonicResonance = 3,  // m(k) = m(2k)
  BenjaminFeir = 4,             // Delta_BF = 0
};

inline double mechanism_value(const BondParams& params, Mechanism id, double k) {
  switch (id) {
    case Mechanism::GroupVelocityExtremum: return group_velocity_deriv(params, k);
    case Mechanism::LongShortResonance: return group_velocity(params, k) - 1.0;
    case Mechanism::SecondHarmonicResonance: return m_beta(params, k) - m_beta(params, 2.0 * k);
    case Mechanism::BenjaminFeir: return delta_bf(params, k);
  }
  return 0.0;
}

struct MechanismRoot {
  double k = 0.0;
  Mechanism id = Mechanism::GroupVelocityExtremum;
  double value = 0.0;  // mechanism function at k
};

/// Sign changes of the four mechanism functions on n_samples equispaced points
/// of [k_lo, k_hi], each refined by bisection. Sorted by mechanism, then k.
inline std::vector<MechanismRoot> mechanisms(const BondParams& params, double k_lo, double k_hi, int n_samples) {
  if (!(k_lo > 0.0) || !(k_hi > k_lo)) fail(ErrorCode::InvalidArgument, "k range must satisfy 0 < lo < hi");
  if (n_samples < 100) fail(ErrorCode::InvalidArgument, "need at least 100 samples");
  std::vector<MechanismRoot> out;
  for (Mechanism id : {Mechanism::GroupVelocityExtremum, Mechanism::LongShortResonance,
                       Mechanism::SecondHarmonicResonance, Mechanism::BenjaminFeir}) {
    auto f = [&](double k) { return mechanism_value(params, id, k); };
    double k0 = k_lo, f0 = f(k0);
    for (int i = 1; i < n_samples; ++i) {
      const double k1 = k_lo + (k_hi - k_lo) * i / (n_samples - 1);
      const double f1 = f(k1);
      if (f0 == 0.0) {
        out.push_back({k0, id, 0.0});
      } else if (f0 * f1 < 0.0) {
        auto tol = [](double a, double b) { return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b); };
        std::uintmax_t iters = 200;
        const auto br = boost::math::tools::bisect(f, k0, k1, tol, iters);
        const double fa = f(br.first), fb = f(br.second);
        const double k = std::abs(fa) <= std::abs(fb) ? br.first : br.second;
        out.push_back({k, id, f(k)});
      }
      k0 = k1;
      f0 = f1;
    }
    if (f0 == 0.0) out.push_back({k0, id, 0.0});
  }
  return out;
}

/// n points strictly inside (lo, hi): lo + i (hi - lo)/(n + 1), i = 1..n.
/// The 2n + 1 point version contains these at odd positions.
inline std::vector<double> interior_linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 1; i <= n; ++i) v[i - 1] = lo + (hi - lo) * i / (n + 1);
  return v;
}

struct StabilityMap {
  std::vector<double> betas;
  std::vector<double> ks;
  std::vector<StabilitySample> samples;  // row-major, one row per beta
  std::vector<std::pair<double, double>> kcrit_curve;  // (beta, k_crit(beta, 1))

  const StabilitySample& at(std::size_t ib, std::size_t ik) const { return samples[ib * ks.size() + ik]; }
  std::array<int, 3> counts() const {
    std::array<int, 3> c{0, 0, 0};
    for (const auto& s : samples) ++c[static_cast<int>(s.verdict)];
    return c;
  }
};

struct MapRange {
  double beta_lo = 0.0, beta_hi = 1.0 / 3.0;
  double k_lo = 0.0, k_hi = 12.0;
  int n_beta = 64, n_k = 64;
  int n_curve = 64;
};

/// Delta_MI on an interior grid of (beta, k) plus the curve beta -> k_crit(beta, 1).
inline StabilityMap stability_map(const MapRange& r) {
  if (r.n_beta < 32 || r.n_k < 32) fail(ErrorCode::InvalidArgument, "resolution must be at least 32x32");
  if (!(r.beta_lo >= 0.0) || !(r.beta_hi > r.beta_lo) || !(r.k_lo >= 0.0) || !(r.k_hi > r.k_lo)) {
    fail(ErrorCode::InvalidArgument, "invalid map range");
  }
  StabilityMap map;
  map.betas = interior_linspace(r.beta_lo, r.beta_hi, r.n_beta);
  map.ks = interior_linspace(r.k_lo, r.k_hi, r.n_k);
  map.samples.resize(map.betas.size() * map.ks.size());
  parallel_for(map.betas.size(), [&](std::size_t ib) {
    const BondParams p(map.betas[ib]);
    for (std::size_t ik = 0; ik < map.ks.size(); ++ik) map.samples[ib * map.ks.size() + ik] = stability_sample(p, map.ks[ik]);
  });
  for (double b : interior_linspace(r.beta_lo, r.beta_hi, r.n_curve)) {
    const BondParams p(b);
    if (p.regime() != Regime::Weak) continue;
    map.kcrit_curve.emplace_back(b, k_crit(p, 1.0));
  }
  return map;
}

/// Nested points whose verdict differs between a map and its 2x refinement
/// (2n + 1 points per axis), counting only cells with |Delta_MI| > threshold.
inline int refinement_mismatches(const StabilityMap& coarse, const StabilityMap& fine, double threshold = 1e-6) {
  if (fine.betas.size() != 2 * coarse.betas.size() + 1 || fine.ks.size() != 2 * coarse.ks.size() + 1) {
    fail(ErrorCode::SizeMismatch, "fine map must have 2n + 1 points per axis");
  }
  int bad = 0;
  for (std::size_t ib = 0; ib < coarse.betas.size(); ++ib) {
    for (std::size_t ik = 0; ik < coarse.ks.size(); ++ik) {
      const auto& c = coarse.at(ib, ik);
      const auto& f = fine.at(2 * ib + 1, 2 * ik + 1);
      if (!(std::abs(c.delta_mi) > threshold)) continue;
      if (c.verdict != f.verdict) ++bad;
    }
  }
  return bad;
}

}  // namespace capwhitham
