#pragma once

// Leading-order KdV solitary profile, the residual forcing it leaves in the
// scaled Whitham equation, and the linearised KdV operator S0 on even fields.

#include <cmath>
#include <numbers>
#include <string>

#include "capwhitham/dispersion.hpp"
#include "capwhitham/linear_solve.hpp"
#include "capwhitham/spectral_field.hpp"

namespace capwhitham {

struct KdvProfile {
  BondParams params;
  SpectralField field;

  const Grid& grid() const noexcept { return field.grid(); }
};

inline double sigma_amplitude(const BondParams& params) { return (1.0 - 3.0 * params.beta()) / 4.0; }

/// sigma(X) = ((1 - 3 beta)/4) sech^2(X/2)
inline double sigma_value(const BondParams& params, double X) {
  const double s = 1.0 / std::cosh(0.5 * X);
  return sigma_amplitude(params) * s * s;
}

/// Closed-form transform (1 - 3 beta) k / (2 sinh(pi k)), limit (1 - 3 beta)/(2 pi).
inline double sigma_hat(const BondParams& params, double k) {
  const double amp = 1.0 - 3.0 * params.beta();
  const double pk = std::numbers::pi * std::abs(k);
  if (pk < 1e-8) return amp / (2.0 * std::numbers::pi);
  if (pk > 700.0) return 0.0;
  return amp * std::abs(k) / (2.0 * std::sinh(pk));
}

inline KdvProfile sigma_beta(const BondParams& params, const Grid& grid) {
  auto field = SpectralField::sample(grid, [&](double X) { return sigma_value(params, X); });
  const double edge = std::abs(field[0]);
  if (edge > 1e-13 * std::abs(sigma_amplitude(params))) {
    fail(ErrorCode::BoundaryNotDecayed,
         "sech^2 profile not decayed at X = L = " + num(grid.half_length()));
  }
  return {params, std::move(field)};
}

/// sup |sigma'' - sigma + sigma^2 / gamma| with spectral differentiation.
inline double kdv_residual(const KdvProfile& p) {
  const auto& s = p.field;
  const auto d2 = derivative(s, 2);
  const double g = p.params.gamma();
  double worst = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    worst = std::max(worst, std::abs(d2[n] - s[n] + s[n] * s[n] / g));
  }
  return worst;
}

/// J0 = -eps^-2 (M_eps - 1 - gamma eps^2 d_X^2) sigma.
inline SpectralField j0(const KdvProfile& p, const ScalingParams& scaling) {
  const double e = scaling.epsilon();
  const double g = p.params.gamma();
  const auto& params = p.params;
  return apply_multiplier(p.field, [&](double K) {
    return -(m_beta(params, e * K) - 1.0 + g * e * e * K * K) / (e * e);
  });
}

/// (1 - d^2)^-1 applied spectrally.
inline Multiplier bessel_inverse(const Grid& grid) {
  return Multiplier(grid, [](double k) { return 1.0 / (1.0 + k * k); });
}

/// S0 R = R - gamma^-1 (1 - d^2)^-1 (2 sigma R)
inline Vec s0_apply(const KdvProfile& p, const Multiplier& smoother, const Vec& r) {
  const auto s = p.field.values();
  Vec prod(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) prod[i] = 2.0 * s[i] * r[i];
  Vec sm = smoother.apply(prod);
  const double ginv = 1.0 / p.params.gamma();
  Vec out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i] - ginv * sm[i];
  return out;
}

inline SpectralField s0_apply(const KdvProfile& p, const SpectralField& r) {
  return SpectralField(p.grid(), s0_apply(p, bessel_inverse(p.grid()), Vec(r.values().begin(), r.values().end())));
}

enum class SolveMethod { Auto, Dense, Krylov };

struct LinearSolveOptions {
  SolveMethod method = SolveMethod::Auto;
  int dense_max_n = 4096;
  double rel_tol = 1e-12;
  int max_iter = 500;
  double accept_residual = 1e-11;  // relative residual required of the returned solution
};

inline double relative_residual(const LinearOp& op, const Vec& x, const Vec& b) {
  Vec ax = op(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    num += (ax[i] - b[i]) * (ax[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Solve op(x) = rhs on even fields by dense LU or GMRES, then symmetrise and
/// check the residual. The odd roundoff part of rhs is dropped.
inline Vec solve_even(const LinearOp& op, const Vec& rhs_in, int n, const LinearSolveOptions& opts,
                      const LinearOp& precond = {}) {
  Vec rhs = rhs_in;
  symmetrize(rhs);
  double bn = 0.0;
  for (double v : rhs) bn = std::max(bn, std::abs(v));
  if (bn == 0.0) return Vec(rhs.size(), 0.0);
  const bool dense = opts.method == SolveMethod::Dense ||
                     (opts.method == SolveMethod::Auto && n <= opts.dense_max_n);
  Vec x;
  if (dense) {
    x = DenseEvenSolver(op, n).solve(rhs);
  } else {
    GmresOptions g;
    g.rel_tol = opts.rel_tol;
    g.max_iter = opts.max_iter;
    auto res = gmres(op, rhs, g, precond);
    if (!res.converged && res.rel_residual > opts.accept_residual) {
      fail(ErrorCode::SolverDivergence, "Krylov solve stalled at relative residual " +
                                            num(res.rel_residual) + " after " +
                                            num(res.iterations) + " iterations");
    }
    x = std::move(res.x);
  }
  symmetrize(x);
  const double rr = relative_residual(op, x, rhs);
  if (rr > opts.accept_residual) {
    fail(ErrorCode::SolverDivergence, "linear solve residual " + num(rr) + " exceeds " +
                                          num(opts.accept_residual));
  }
  return x;
}

/// Solve S0 R = rhs on even fields.
inline SpectralField s0_solve(const KdvProfile& p, const SpectralField& rhs, const LinearSolveOptions& opts = {}) {
  if (!rhs.is_even(1e-10)) fail(ErrorCode::InvalidArgument, "S0 is inverted on even fields only");
  const auto smoother = bessel_inverse(p.grid());
  LinearOp op = [&](const Vec& r) { return s0_apply(p, smoother, r); };
  Vec b(rhs.values().begin(), rhs.values().end());
  return SpectralField(p.grid(), solve_even(op, b, p.grid().size(), opts));
}

}  // namespace capwhitham
