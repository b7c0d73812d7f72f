#pragma once

// Subcritical solitary waves of depression for strong surface tension
// (beta > 1/3), computed by Newton's method on the unscaled profile equation
//     (M - c) w + w^2 = 0,   c = 1 + gamma eps^2 < 1.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "capwhitham/dispersion.hpp"
#include "capwhitham/fit.hpp"
#include "capwhitham/kdv_core.hpp"
#include "capwhitham/linear_solve.hpp"
#include "capwhitham/profile_equation.hpp"
#include "capwhitham/spectral_field.hpp"

namespace capwhitham {

struct DepressionOptions {
  double L_scaled = 40.0;  // half-length in X = eps x; the x-grid uses L_scaled / eps
  int N = 512;
  double guess_scale = 1.0;  // multiplies the sech^2 initial guess
  int max_newton = 30;
  double tol = 1e-13;     // Newton stops at this relative residual
  double accept = 1e-11;  // required final relative residual
  double krylov_tol = 1e-12;
};

struct DepressionWave {
  BondParams params;
  ScalingParams scaling;
  SpectralField w;  // on the x-grid
  SpectralField R;  // w minus the leading sech^2 term
  double residual = 0.0;
  int iterations = 0;
};

/// Leading term -((3 beta - 1)/4) eps^2 sech^2(eps x / 2).
inline double depression_leading(const BondParams& params, const ScalingParams& scaling, double x) {
  const double e = scaling.epsilon();
  return e * e * sigma_value(params, e * x);
}

inline Grid depression_grid(const ScalingParams& scaling, const DepressionOptions& opts = {}) {
  return Grid(opts.L_scaled / scaling.epsilon(), opts.N);
}

inline DepressionWave solve_depression(const BondParams& params, const ScalingParams& scaling, const Grid& grid,
                                       const DepressionOptions& opts = {}) {
  const double e = scaling.epsilon();
  if (e * grid.half_length() < 40.0 - 1e-9) {
    fail(ErrorCode::InvalidArgument, "grid does not resolve the decay: eps L = " + num(e * grid.half_length()) + " < 40");
  }
  const Multiplier shifted(grid, [&](double k) { return m_beta(params, k) - scaling.c(); });
  // For beta < 1/3 the speed is supercritical and m - c < 0 near k = 0, so
  // this check is also what rejects the weak regime.
  double margin = 1.0 - scaling.c();
  for (int j = 0; j < grid.size(); ++j) {
    if (j != grid.nyquist_slot()) margin = std::min(margin, shifted[j]);
  }
  if (!(margin > 0.0)) {
    fail(ErrorCode::SymbolNotCoercive, "min (m - c) = " + num(margin) + " is not positive (beta < 1/3 or eps too large)");
  }
  const Multiplier precond_symbol(grid, [&](double k) { return 1.0 / (m_beta(params, k) - scaling.c()); });

  Vec w(grid.size());
  for (int n = 0; n < grid.size(); ++n) w[n] = opts.guess_scale * depression_leading(params, scaling, grid.x(n));

  auto residual_vec = [&](const Vec& u) {
    Vec r = shifted.apply(u);
    for (std::size_t n = 0; n < u.size(); ++n) r[n] += u[n] * u[n];
    return r;
  };
  auto rel = [](const Vec& r, const Vec& u) {
    double a = 0.0, b = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
      a = std::max(a, std::abs(r[n]));
      b = std::max(b, std::abs(u[n]));
    }
    return b > 0.0 ? a / b : a;
  };

  GmresOptions lin;
  lin.rel_tol = opts.krylov_tol;
  LinearOp precond = [&](const Vec& v) { return precond_symbol.apply(v); };

  Vec F = residual_vec(w);
  double rnorm = rel(F, w);
  int it = 0;
  for (; it < opts.max_newton && rnorm > opts.tol; ++it) {
    LinearOp J = [&](const Vec& v) {
      Vec r = shifted.apply(v);
      for (std::size_t n = 0; n < v.size(); ++n) r[n] += 2.0 * w[n] * v[n];
      return r;
    };
    Vec rhs(F.size());
    for (std::size_t n = 0; n < F.size(); ++n) rhs[n] = -F[n];
    // Inexact Newton: near convergence rhs is at roundoff and GMRES may stop
    // short of krylov_tol; the outer residual test decides whether to accept.
    Vec dw = gmres(J, rhs, lin, precond).x;
    symmetrize(dw);
    Vec trial(w.size());
    for (std::size_t n = 0; n < w.size(); ++n) trial[n] = w[n] + dw[n];
    const Vec Ft = residual_vec(trial);
    const double tn = rel(Ft, trial);
    if (!(tn < rnorm)) break;  // roundoff floor
    w = std::move(trial);
    F = Ft;
    rnorm = tn;
  }
  symmetrize(w);
  SpectralField wf(grid, w);
  const double res = full_residual(params, scaling, wf, Variables::Physical);
  if (!(res <= opts.accept)) {
    fail(ErrorCode::NewtonDivergence, "depression Newton stopped at relative residual " + num(res) +
                                          " (eps = " + num(e) + " may be too large)");
  }
  Vec r(grid.size());
  for (int n = 0; n < grid.size(); ++n) r[n] = w[n] - depression_leading(params, scaling, grid.x(n));
  return {params, scaling, std::move(wf), SpectralField(grid, std::move(r)), res, it};
}

inline DepressionWave solve_depression(const BondParams& params, const ScalingParams& scaling,
                                       const DepressionOptions& opts = {}) {
  return solve_depression(params, scaling, depression_grid(scaling, opts), opts);
}

/// R as a function of X = eps x: same samples on the grid scaled by eps.
inline SpectralField remainder_in_scaled_variable(const DepressionWave& wave) {
  const Grid& g = wave.R.grid();
  const Grid gX(g.half_length() * wave.scaling.epsilon(), g.size());
  return SpectralField(gX, Vec(wave.R.values().begin(), wave.R.values().end()));
}

/// Number of interior sign changes of w' ignoring samples where |w'| is below
/// rel_floor * max |w'|.
inline int count_critical_points(const SpectralField& w, double rel_floor = 1e-6) {
  const auto d = derivative(w, 1);
  const double floor = rel_floor * d.sup_norm();
  int changes = 0, last = 0;
  for (int n = 0; n < d.size(); ++n) {
    const int s = d[n] > floor ? 1 : (d[n] < -floor ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

struct RemainderFit {
  std::vector<double> eps;
  std::vector<double> norms;      // ||d_X^r R_eps||_{L^2(dX)}
  std::vector<double> residuals;  // full-equation residual of each solve
  double slope = 0.0;
};

/// Fit the decay exponent of the remainder (or its r-th X-derivative) in L^2.
inline RemainderFit remainder_scaling(const BondParams& params, std::span<const double> eps_list, int r = 0,
                                      const DepressionOptions& opts = {}) {
  if (eps_list.size() < 4) fail(ErrorCode::InvalidArgument, "need at least 4 epsilon values");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) fail(ErrorCode::InvalidArgument, "epsilon list must be decreasing");
  }
  if (r < 0) fail(ErrorCode::InvalidArgument, "derivative order must be >= 0");
  RemainderFit fit;
  for (double e : eps_list) {
    const ScalingParams s(params, e);
    const auto wave = solve_depression(params, s, opts);
    auto R = remainder_in_scaled_variable(wave);
    if (r > 0) R = derivative(R, r);
    fit.eps.push_back(e);
    fit.norms.push_back(R.l2_norm());
    fit.residuals.push_back(wave.residual);
  }
  fit.slope = loglog_slope(fit.eps, fit.norms);
  return fit;
}

}  // namespace capwhitham
