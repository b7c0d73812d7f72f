#pragma once

// Matrix-free GMRES and a dense fallback that assembles an operator on the
// even subspace. Both work on plain sample vectors.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capwhitham/error.hpp"

namespace capwhitham {

using Vec = std::vector<double>;
using LinearOp = std::function<Vec(const Vec&)>;

struct GmresOptions {
  double rel_tol = 1e-12;
  int restart = 60;
  int max_iter = 500;
};

struct GmresResult {
  Vec x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

namespace detail {
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
}  // namespace detail

/// Restarted GMRES(m) with modified Gram-Schmidt and Givens rotations.
/// `precond` is a right preconditioner (identity when empty).
inline GmresResult gmres(const LinearOp& op, const Vec& b, const GmresOptions& opts = {},
                         const LinearOp& precond = {}, const Vec* x0 = nullptr) {
  const std::size_t n = b.size();
  GmresResult res;
  res.x = x0 ? *x0 : Vec(n, 0.0);
  const double bnorm = detail::norm(b);
  if (bnorm == 0.0 && !x0) {
    res.converged = true;
    return res;
  }
  const double target = opts.rel_tol * (bnorm > 0.0 ? bnorm : 1.0);
  auto apply_m = [&](const Vec& v) { return precond ? precond(v) : v; };

  const int m = opts.restart;
  while (res.iterations < opts.max_iter) {
    Vec ax = op(res.x);
    Vec r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    double beta = detail::norm(r);
    res.rel_residual = beta / (bnorm > 0.0 ? bnorm : 1.0);
    if (beta <= target) {
      res.converged = true;
      return res;
    }
    std::vector<Vec> basis;
    basis.reserve(m + 1);
    for (auto& v : r) v /= beta;
    basis.push_back(std::move(r));
    std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m && res.iterations < opts.max_iter; ++k, ++res.iterations) {
      Vec w = op(apply_m(basis[k]));
      for (int i = 0; i <= k; ++i) {
        h[i][k] = detail::dot(w, basis[i]);
        for (std::size_t j = 0; j < n; ++j) w[j] -= h[i][k] * basis[i][j];
      }
      h[k + 1][k] = detail::norm(w);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
        h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
        h[i][k] = t;
      }
      const double denom = std::hypot(h[k][k], h[k + 1][k]);
      cs[k] = denom > 0.0 ? h[k][k] / denom : 1.0;
      sn[k] = denom > 0.0 ? h[k + 1][k] / denom : 0.0;
      h[k][k] = denom;
      const double hk1 = h[k + 1][k];
      h[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= target || hk1 == 0.0) {
        ++k;
        ++res.iterations;
        break;
      }
      for (auto& v : w) v /= hk1;
      basis.push_back(std::move(w));
    }
    // Back substitution for the least-squares coefficients.
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h[i][j] * y[j];
      y[i] = s / h[i][i];
    }
    Vec update(n, 0.0);
    for (int i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < n; ++j) update[j] += y[i] * basis[i][j];
    }
    update = apply_m(update);
    for (std::size_t j = 0; j < n; ++j) res.x[j] += update[j];
  }
  Vec ax = op(res.x);
  double rn = 0.0;
  for (std::size_t i = 0; i < n; ++i) rn += (b[i] - ax[i]) * (b[i] - ax[i]);
  res.rel_residual = std::sqrt(rn) / (bnorm > 0.0 ? bnorm : 1.0);
  res.converged = std::sqrt(rn) <= target;
  return res;
}

/// Solve op(x) = b or throw SolverDivergence.
inline Vec gmres_solve(const LinearOp& op, const Vec& b, const GmresOptions& opts = {},
                       const LinearOp& precond = {}) {
  auto res = gmres(op, b, opts, precond);
  if (!res.converged) {
    fail(ErrorCode::SolverDivergence, "GMRES stalled at relative residual " + num(res.rel_residual) +
                                          " after " + num(res.iterations) + " iterations");
  }
  return std::move(res.x);
}

/// LU factorisation of an even-to-even operator on N samples, represented on
/// the N/2 + 1 independent values v[0..N/2] (v[N-i] = v[i]).
class DenseEvenSolver {
 public:
  DenseEvenSolver(const LinearOp& op, int n_points) : n_(n_points) {
    const int half = n_ / 2 + 1;
    Eigen::MatrixXd a(half, half);
    Vec e(n_, 0.0);
    for (int i = 0; i < half; ++i) {
      set_even_unit(e, i, 1.0);
      const Vec col = op(e);
      for (int r = 0; r < half; ++r) a(r, i) = col[r];
      set_even_unit(e, i, 0.0);
    }
    lu_ = a.partialPivLu();
  }

  Vec solve(const Vec& rhs) const {
    const int half = n_ / 2 + 1;
    Eigen::VectorXd b(half);
    for (int r = 0; r < half; ++r) b(r) = rhs[r];
    Eigen::VectorXd y = lu_.solve(b);
    Vec x(n_);
    for (int i = 0; i < half; ++i) {
      x[i] = y(i);
      x[(n_ - i) % n_] = y(i);
    }
    return x;
  }

 private:
  void set_even_unit(Vec& e, int i, double v) const {
    e[i] = v;
    e[(n_ - i) % n_] = v;
  }

  int n_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace capwhitham
