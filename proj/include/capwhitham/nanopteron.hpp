#pragma once

// Generalized solitary waves for weak surface tension by Beale's method.
//
// The scaled profile equation is solved with the ansatz
//     W = sigma + a Phi^a + R,
// where sigma is the KdV core, Phi^a the periodic wave of amplitude a and R a
// localized remainder. Projecting out the resonant frequency K_eps makes the
// linear part invertible, and (R, a) is found as the fixed point of
//     R <- S_eps^-1 L_eps^-1 P_eps G(R, a),
//     a <- chi^-1 (G^(K_eps) - 2 (sigma R)^(K_eps)).
// K_eps is placed exactly on the grid by adjusting L, so the projection and
// the kernel-aware inverse are diagonal operations on the grid coefficients.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "capwhitham/dispersion.hpp"
#include "capwhitham/kdv_core.hpp"
#include "capwhitham/linear_solve.hpp"
#include "capwhitham/periodic_family.hpp"
#include "capwhitham/profile_equation.hpp"
#include "capwhitham/spectral_field.hpp"

namespace capwhitham {

class BealeWorkspace {
 public:
  /// target_N = 0 picks the smallest power of two with >= 8 points per ripple wavelength.
  BealeWorkspace(const BondParams& params, const ScalingParams& scaling, double target_L = 100.0,
                 int target_N = 0)
      : params_(params),
        scaling_(scaling),
        K_(checked_K(params, scaling)),
        grid_(make_grid(K_, target_L, target_N, &j0_)),
        sigma_(sigma_beta(params, grid_)),
        phi0_(SpectralField::sample(grid_, [&](double X) { return std::cos(K_ * X); })),
        l_symbol_(grid_, [&](double K) { return l_eps(params, scaling, K); }),
        j0_field_(j0(sigma_, scaling).symmetrized()) {
    if (std::abs(l_eps(params_, scaling_, grid_.k(j0_))) > 1e-10) {
      fail(ErrorCode::GridTooCoarse, "resonant frequency is not a root of l_eps on the grid");
    }
    chi_ = 2.0 * coeff_at(sigma_.field * phi0_, K_);
    if (!(chi_ >= 0.9 * sigma_hat(params_, 0.0))) {
      fail(ErrorCode::InvalidArgument, "chi = " + num(chi_) + " is not bounded away from zero");
    }
    linv_.assign(grid_.size(), 0.0);
    for (int j = 0; j < grid_.size(); ++j) {
      const int m = grid_.freq_index(j);
      if (j == grid_.nyquist_slot() || std::abs(m) == j0_) continue;
      linv_[j] = 1.0 / l_symbol_[j];
    }
    const double e = scaling_.epsilon();
    dl_K_ = m_beta_deriv(params_, e * K_, 1) / e;
    x_cos_.resize(grid_.size());
    x_sin_.resize(grid_.size());
    for (int n = 0; n < grid_.size(); ++n) {
      const double x = grid_.x(n);
      x_cos_[n] = x * std::cos(K_ * x);
      x_sin_[n] = x * std::sin(K_ * x);
    }
  }

  const BondParams& params() const noexcept { return params_; }
  const ScalingParams& scaling() const noexcept { return scaling_; }
  const Grid& grid() const noexcept { return grid_; }
  int kernel_index() const noexcept { return j0_; }
  double K() const noexcept { return K_; }
  const KdvProfile& sigma() const noexcept { return sigma_; }
  const SpectralField& phi0() const noexcept { return phi0_; }
  double chi() const noexcept { return chi_; }
  const Multiplier& l_symbol() const noexcept { return l_symbol_; }
  const SpectralField& j0_field() const noexcept { return j0_field_; }

  /// Trapezoidal coefficient at K_eps; same quadrature as coeff_at.
  double coeff_K(std::span<const double> f) const {
    double s = 0.0;
    const auto c = phi0_.values();
    for (std::size_t n = 0; n < f.size(); ++n) s += f[n] * c[n];
    return grid_.spacing() / (2.0 * std::numbers::pi) * s;
  }

  /// F - 2 F^(K) chi^-1 sigma Phi0, without input checks.
  Vec project_raw(const Vec& f) const {
    const double fk = coeff_K(f);
    const double s = 2.0 * fk / chi_;
    const auto sig = sigma_.field.values();
    const auto c = phi0_.values();
    Vec out(f.size());
    for (std::size_t n = 0; n < f.size(); ++n) out[n] = f[n] - s * sig[n] * c[n];
    return out;
  }

  /// Divide by l_eps off the kernel modes +-j0. On them use the limit
  /// f^'(+-K) / l'(+-K), which is the value that keeps the result localized
  /// when f^(K) = 0; zero there would leave a cos(K X) tail.
  Vec l_inv_raw(const Vec& f) const {
    auto c = transform(grid_, f);
    for (int j = 0; j < grid_.size(); ++j) c[j] *= linv_[j];
    double sc = 0.0, ss = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n) {
      sc += f[n] * x_cos_[n];
      ss += f[n] * x_sin_[n];
    }
    // d/dk of (h/2pi) sum f exp(-i k x) at k = +-K; l' is odd in K.
    const double h = grid_.spacing() / (2.0 * std::numbers::pi);
    const cplx d_plus = h * cplx(-ss, -sc);
    const cplx d_minus = h * cplx(ss, -sc);
    c[grid_.slot(j0_)] = d_plus / dl_K_;
    c[grid_.slot(-j0_)] = d_minus / (-dl_K_);
    return inverse_transform(grid_, c);
  }

  /// S_eps R = R + L^-1 P (2 sigma R)
  Vec s_eps_apply(const Vec& r) const {
    const auto sig = sigma_.field.values();
    Vec prod(r.size());
    for (std::size_t n = 0; n < r.size(); ++n) prod[n] = 2.0 * sig[n] * r[n];
    Vec t = l_inv_raw(project_raw(prod));
    for (std::size_t n = 0; n < r.size(); ++n) t[n] += r[n];
    return t;
  }

 private:
  static double checked_K(const BondParams& params, const ScalingParams& scaling) {
    if (params.regime() != Regime::Weak) {
      fail(ErrorCode::WrongRegime, "generalized solitary waves require beta < 1/3");
    }
    return K_eps(params, scaling);
  }

  static Grid make_grid(double K, double target_L, int target_N, int* j0) {
    int j = 0;
    Grid probe = snap_grid(K, target_L, 8, &j);
    int n = target_N;
    if (n == 0) {
      n = 8;
      while (n < 8 * j) n *= 2;
    }
    if (j >= n / 4) {
      fail(ErrorCode::GridTooCoarse, "ripple index " + num(j) + " needs N > " + num(4 * j) +
                                         ", got N = " + num(n));
    }
    *j0 = j;
    return Grid(probe.half_length(), n);
  }

  BondParams params_;
  ScalingParams scaling_;
  double K_;
  int j0_ = 0;
  Grid grid_;
  KdvProfile sigma_;
  SpectralField phi0_;
  Multiplier l_symbol_;
  SpectralField j0_field_;
  double chi_ = 0.0;
  std::vector<double> linv_;
  double dl_K_ = 0.0;
  std::vector<double> x_cos_, x_sin_;
};

inline BealeWorkspace make_workspace(const BondParams& params, const ScalingParams& scaling, double target_L = 100.0,
                                     int target_N = 0) {
  return BealeWorkspace(params, scaling, target_L, target_N);
}

inline Vec to_vec(const SpectralField& f) { return Vec(f.values().begin(), f.values().end()); }

/// P_eps F = F - 2 F^(K_eps) chi^-1 sigma Phi0; the result has no K_eps content.
inline SpectralField project(const BealeWorkspace& ws, const SpectralField& F) {
  const double fk = coeff_at(F, ws.K());  // also checks boundary decay
  (void)fk;
  return SpectralField(ws.grid(), ws.project_raw(to_vec(F)));
}

inline constexpr double kKernelResidueTol = 1e-9;

/// L_eps^-1 on fields with vanishing K_eps coefficient.
inline SpectralField l_inv(const BealeWorkspace& ws, const SpectralField& F) {
  const double fk = coeff_at(F, ws.K());
  const double norm = F.l2_norm();
  if (std::abs(fk) > kKernelResidueTol * std::max(norm, 1e-300)) {
    fail(ErrorCode::KernelResidue, "F^(K_eps) = " + num(fk) + " is not zero; project first");
  }
  return SpectralField(ws.grid(), ws.l_inv_raw(to_vec(F)));
}

/// Solve S_eps R = rhs on even fields.
inline SpectralField s_eps_solve(const BealeWorkspace& ws, const SpectralField& rhs,
                                 LinearSolveOptions opts = {.method = SolveMethod::Krylov}) {
  LinearOp op = [&](const Vec& r) { return ws.s_eps_apply(r); };
  const Vec b = to_vec(rhs);
  try {
    return SpectralField(ws.grid(), solve_even(op, b, ws.grid().size(), opts));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SolverDivergence || opts.method != SolveMethod::Krylov ||
        ws.grid().size() > opts.dense_max_n) {
      throw;
    }
    opts.method = SolveMethod::Dense;
    return SpectralField(ws.grid(), solve_even(op, b, ws.grid().size(), opts));
  }
}

/// J1 = -R^2
inline SpectralField j1(const SpectralField& R) { return (R * R).scaled(-1.0); }

/// J2 = -2 a sigma (Phi^a - Phi^0)
inline SpectralField j2(const BealeWorkspace& ws, const PeriodicWave& wave) {
  const auto phia = sample_on_grid(wave, ws.grid());
  return (ws.sigma().field * (phia - ws.phi0())).scaled(-2.0 * wave.a);
}

/// J3 = -2 a Phi^a R
inline SpectralField j3(const BealeWorkspace& ws, const PeriodicWave& wave, const SpectralField& R) {
  const auto phia = sample_on_grid(wave, ws.grid());
  return (phia * R).scaled(-2.0 * wave.a);
}

/// G = J0 + J1 + J2 + J3 for the given remainder and ripple (wave.a is the amplitude).
inline SpectralField assemble_rhs(const BealeWorkspace& ws, const SpectralField& R, const PeriodicWave& wave) {
  const auto sig = ws.sigma().field.values();
  const auto phi0 = ws.phi0().values();
  const auto jz = ws.j0_field().values();
  const auto phia = sample_on_grid(wave, ws.grid());
  const double a = wave.a;
  Vec g(R.size());
  for (int n = 0; n < R.size(); ++n) {
    g[n] = jz[n] - R[n] * R[n] - 2.0 * a * sig[n] * (phia[n] - phi0[n]) - 2.0 * a * phia[n] * R[n];
  }
  return SpectralField(ws.grid(), std::move(g));
}

struct IterationRecord {
  double dR = 0.0;     // ||R_{n+1} - R_n||_{0,0}
  double da = 0.0;     // |a_{n+1} - a_n|
  double ratio = 0.0;  // step_{n+1} / step_n (0 for the first step)
};

struct NanopteronNorms {
  double R_l2 = 0.0;
  double R_weighted = 0.0;
  double a_over_eps4 = 0.0;
};

struct NanopteronSolution {
  SpectralField R;
  double a = 0.0;
  PeriodicWave wave;
  int iterations = 0;
  std::vector<IterationRecord> history;
  double residual = 0.0;     // full scaled-equation residual relative to ||sigma||_inf
  double contraction = 0.0;  // asymptotic ratio of successive steps above the noise floor
  double max_ratio = 0.0;    // largest ratio above the noise floor
  NanopteronNorms norms;
};

struct BealeOptions {
  double tol = 1e-12;
  int max_iter = 100;
  int stall_window = 5;
  double weight_q = 0.1;
  double ripple_refresh = 0.1;  // re-solve Phi^a when |a_n - a_solved| > ripple_refresh |a_n|
  LinearSolveOptions linear{.method = SolveMethod::Krylov, .rel_tol = 1e-13};
  PeriodicOptions periodic{};
};

/// One application of the maps (N1, N2): returns (R_next, a_next).
inline std::pair<SpectralField, double> beale_step(const BealeWorkspace& ws, const SpectralField& R,
                                                   const PeriodicWave& wave, const LinearSolveOptions& lin = {
                                                       .method = SolveMethod::Krylov, .rel_tol = 1e-13}) {
  const auto G = assemble_rhs(ws, R, wave);
  const auto rhs = SpectralField(ws.grid(), ws.l_inv_raw(to_vec(project(ws, G))));
  auto R_next = s_eps_solve(ws, rhs, lin).symmetrized();
  const double a_next = (coeff_at(G, ws.K()) - 2.0 * coeff_at(ws.sigma().field * R_next, ws.K())) / ws.chi();
  return {std::move(R_next), a_next};
}

/// Full residual of the scaled equation for W = sigma + R + a Phi^a, split as
/// the localized part evaluated with the plain multiplier on the grid plus
/// the exact harmonic residual of the periodic wave. Relative to ||sigma||_inf.
inline double nanopteron_residual(const BealeWorkspace& ws, const SpectralField& R, const PeriodicWave& wave) {
  const auto U = ws.sigma().field + R;
  const auto LU = apply_multiplier(U, [&](double K) { return l_eps(ws.params(), ws.scaling(), K); });
  const auto phia = sample_on_grid(wave, ws.grid());
  double worst = 0.0;
  for (int n = 0; n < U.size(); ++n) {
    worst = std::max(worst, std::abs(LU[n] + U[n] * U[n] + 2.0 * wave.a * phia[n] * U[n]));
  }
  double periodic = 0.0;
  if (wave.a != 0.0) {
    const auto r = detail::scaled_residual(wave.params, wave.scaling, wave.a, wave.K, wave.cos_coeffs);
    for (int n = 0; n <= wave.harmonics(); ++n) periodic += std::abs(wave.a * r(n));
  }
  return (worst + periodic) / ws.sigma().field.sup_norm();
}

inline bool needs_ripple_refresh(double a, double a_solved, double rel) {
  return a != a_solved && std::abs(a - a_solved) > rel * std::abs(a);
}

/// Iterate the Beale maps from (R0, a0) (default (0, 0)) to a fixed point.
inline NanopteronSolution beale_iterate(const BealeWorkspace& ws, const BealeOptions& opts = {},
                                        std::optional<SpectralField> R0 = std::nullopt, double a0 = 0.0) {
  SpectralField R = R0 ? *R0 : SpectralField::zeros(ws.grid());
  double a = a0;
  PeriodicWave wave = solve_periodic(ws.params(), ws.scaling(), a, opts.periodic);
  double a_solved = a;

  NanopteronSolution sol{R, a, wave, 0, {}, 0.0, 0.0, 0.0, {}};
  double prev_step = -1.0;
  int stalls = 0;
  bool converged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    if (needs_ripple_refresh(a, a_solved, opts.ripple_refresh)) {
      wave = solve_periodic(ws.params(), ws.scaling(), a, opts.periodic);
      a_solved = a;
    }
    wave.a = a;
    auto [R_next, a_next] = beale_step(ws, R, wave, opts.linear);
    IterationRecord rec;
    rec.dR = (R_next - R).l2_norm();
    rec.da = std::abs(a_next - a);
    const double step = rec.dR + rec.da;
    rec.ratio = prev_step > 0.0 ? step / prev_step : 0.0;
    sol.history.push_back(rec);
    stalls = (prev_step > 0.0 && step >= prev_step) ? stalls + 1 : 0;
    prev_step = step;
    R = std::move(R_next);
    a = a_next;
    sol.iterations = it;
    if (step <= opts.tol) {
      converged = true;
      break;
    }
    if (stalls >= opts.stall_window) {
      fail(ErrorCode::NoContraction, "successive differences failed to decrease for " +
                                         num(opts.stall_window) + " steps (eps too large?)");
    }
  }
  if (!converged) {
    fail(ErrorCode::MaxIterations, "Beale iteration did not reach tol " + num(opts.tol) + " in " +
                                       num(opts.max_iter) + " iterations");
  }
  if (needs_ripple_refresh(a, a_solved, opts.ripple_refresh)) {
    wave = solve_periodic(ws.params(), ws.scaling(), a, opts.periodic);
  }
  wave.a = a;
  sol.R = R;
  sol.a = a;
  sol.wave = wave;
  sol.residual = nanopteron_residual(ws, R, wave);

  // Ratios taken while the step is well above roundoff describe the contraction.
  const double floor = 1e3 * opts.tol;
  for (std::size_t n = 1; n < sol.history.size(); ++n) {
    const double before = sol.history[n - 1].dR + sol.history[n - 1].da;
    if (before > floor && sol.history[n].dR + sol.history[n].da > 0.1 * floor) {
      sol.max_ratio = std::max(sol.max_ratio, sol.history[n].ratio);
      sol.contraction = sol.history[n].ratio;
    }
  }
  const double e = ws.scaling().epsilon();
  sol.norms.R_l2 = R.l2_norm();
  sol.norms.R_weighted = weighted_norm(R, {0.0, opts.weight_q});
  sol.norms.a_over_eps4 = std::abs(a) / (e * e * e * e);
  return sol;
}

struct PhysicalProfile {
  Grid grid;            // x-grid, x = X / eps
  SpectralField w;      // core + ripple
  SpectralField core;   // eps^2 (sigma + R)(eps x)
  SpectralField ripple; // eps^2 a Phi^a(eps x)
  double c = 0.0;
};

/// Back to the unscaled variable: w(x) = eps^2 W(eps x), c = 1 + gamma eps^2.
inline PhysicalProfile unscale(const BealeWorkspace& ws, const NanopteronSolution& sol) {
  const double e = ws.scaling().epsilon();
  const Grid xg(ws.grid().half_length() / e, ws.grid().size());
  const auto sig = ws.sigma().field.values();
  std::vector<double> core(xg.size()), ripple(xg.size()), w(xg.size());
  for (int n = 0; n < xg.size(); ++n) {
    const double X = ws.grid().x(n);
    core[n] = e * e * (sig[n] + sol.R[n]);
    ripple[n] = e * e * sol.a * sol.wave.profile(X);
    w[n] = core[n] + ripple[n];
  }
  return {xg, SpectralField(xg, std::move(w)), SpectralField(xg, std::move(core)), SpectralField(xg, std::move(ripple)),
          ws.scaling().c()};
}

struct NewtonOracleResult {
  SpectralField U;  // sigma + R
  double a = 0.0;
  int iterations = 0;
  double residual = 0.0;  // final sup residual of the localized equation
  double moved = 0.0;     // sup |U_newton - U_start| + |a_newton - a_start|
};

/// Independent check of a Beale solution: Newton's method on the discretised
/// scaled equation with unknowns (U = sigma + R on the grid, a), closed by the
/// constraint U^(K_eps) = sigma^(K_eps). It uses only the plain multiplier and
/// pointwise products, never the projection or the kernel-aware inverse.
inline NewtonOracleResult newton_oracle(const BealeWorkspace& ws, const NanopteronSolution& start,
                                        int max_newton = 10, double step_tol = 1e-14,
                                        const PeriodicOptions& popts = {}) {
  const Grid& g = ws.grid();
  const int N = g.size();
  const Multiplier L(g, [&](double K) { return l_eps(ws.params(), ws.scaling(), K); });
  const double scale_h = g.spacing() / (2.0 * std::numbers::pi);
  const double sigma_K = coeff_at(ws.sigma().field, ws.K());
  auto coeffK = [&](std::span<const double> f) {
    double s = 0.0;
    for (int n = 0; n < N; ++n) s += f[n] * std::cos(ws.K() * g.x(n));
    return scale_h * s;
  };

  Vec U = to_vec(ws.sigma().field + start.R);
  double a = start.a;
  PeriodicWave wave = start.wave;
  const Vec U0 = U;
  const double a0 = a;

  auto residual = [&](const Vec& u, double amp, const std::vector<double>& phia) {
    Vec r = L.apply(u);
    for (int n = 0; n < N; ++n) r[n] += u[n] * u[n] + 2.0 * amp * phia[n] * u[n];
    r.push_back(coeffK(u) - sigma_K);
    return r;
  };
  // Preconditioner: 1/l_eps away from the near-kernel band.
  const double floor = 0.05 * std::abs(ws.params().gamma());
  const Multiplier precond_symbol(g, [&](double K) {
    const double l = l_eps(ws.params(), ws.scaling(), K);
    return std::abs(l) >= floor ? 1.0 / l : 1.0 / floor;
  });

  NewtonOracleResult out{SpectralField(g, U), a, 0, 0.0, 0.0};
  for (int it = 0; it < max_newton; ++it) {
    if (needs_ripple_refresh(a, wave.a, 0.1)) wave = solve_periodic(ws.params(), ws.scaling(), a, popts);
    wave.a = a;
    const auto phia_f = sample_on_grid(wave, g);
    const std::vector<double> phia(phia_f.values().begin(), phia_f.values().end());
    Vec F = residual(U, a, phia);
    LinearOp J = [&](const Vec& v) {
      Vec du(v.begin(), v.begin() + N);
      symmetrize(du);
      const double da = v[N];
      Vec r = L.apply(du);
      for (int n = 0; n < N; ++n) r[n] += 2.0 * U[n] * du[n] + 2.0 * a * phia[n] * du[n] + 2.0 * phia[n] * U[n] * da;
      r.push_back(coeffK(du));
      return r;
    };
    LinearOp M = [&](const Vec& v) {
      Vec du(v.begin(), v.begin() + N);
      Vec r = precond_symbol.apply(du);
      r.push_back(v[N]);
      return r;
    };
    for (auto& f : F) f = -f;
    GmresOptions go;
    go.rel_tol = 1e-12;
    go.restart = 120;
    go.max_iter = 2000;
    auto sol = gmres(J, F, go, M);
    Vec du(sol.x.begin(), sol.x.begin() + N);
    symmetrize(du);
    double step = std::abs(sol.x[N]);
    for (int n = 0; n < N; ++n) {
      U[n] += du[n];
      step = std::max(step, std::abs(du[n]));
    }
    a += sol.x[N];
    out.iterations = it + 1;
    if (step <= step_tol) break;
  }
  {
    wave.a = a;
    const auto phia_f = sample_on_grid(wave, g);
    const std::vector<double> phia(phia_f.values().begin(), phia_f.values().end());
    Vec F = residual(U, a, phia);
    double worst = 0.0;
    for (int n = 0; n < N; ++n) worst = std::max(worst, std::abs(F[n]));
    out.residual = worst / ws.sigma().field.sup_norm();
  }
  double moved = std::abs(a - a0);
  for (int n = 0; n < N; ++n) moved = std::max(moved, std::abs(U[n] - U0[n]));
  out.U = SpectralField(g, U);
  out.a = a;
  out.moved = moved;
  return out;
}

}  // namespace capwhitham
