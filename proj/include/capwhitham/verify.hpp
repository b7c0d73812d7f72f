#pragma once

// The acceptance suite. Each criterion computes its metrics, decides pass or
// fail at fixed tolerances, and is timed against its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "capwhitham/depression.hpp"
#include "capwhitham/dispersion.hpp"
#include "capwhitham/fit.hpp"
#include "capwhitham/io.hpp"
#include "capwhitham/kdv_core.hpp"
#include "capwhitham/modstab.hpp"
#include "capwhitham/nanopteron.hpp"
#include "capwhitham/periodic_family.hpp"

namespace capwhitham {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string claim;
  bool pass = false;
  double seconds = 0.0;
  double budget = 0.0;
  json metrics = json::object();
  std::vector<std::string> failures;  // why the verdict is fail
};

struct VerifyConfig {
  std::uint64_t seed = 20240611;
};

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

/// Smooth localized even field with sup norm `amplitude`.
inline SpectralField random_even_bumps(const Grid& grid, std::mt19937_64& gen, double amplitude, int bumps = 6) {
  std::vector<double> c(bumps), s(bumps), w(bumps);
  for (int j = 0; j < bumps; ++j) {
    c[j] = 2.0 * unit_uniform(gen) - 1.0;
    s[j] = 10.0 * unit_uniform(gen);
    w[j] = 0.5 + 2.5 * unit_uniform(gen);
  }
  auto f = SpectralField::sample(grid, [&](double X) {
    double v = 0.0;
    for (int j = 0; j < bumps; ++j) {
      const double a = 1.0 / std::cosh((X - s[j]) / w[j]), b = 1.0 / std::cosh((X + s[j]) / w[j]);
      v += c[j] * (a * a + b * b);
    }
    return v;
  });
  return f.scaled(amplitude / f.sup_norm());
}

namespace detail {

inline const std::vector<double>& sweep_betas() {
  static const std::vector<double> v{0.1, 0.2};
  return v;
}
inline const std::vector<double>& sweep_eps() {
  static const std::vector<double> v{0.25, 0.2, 0.15, 0.1};
  return v;
}

struct SweepEntry {
  double beta = 0.0, eps = 0.0;
  std::shared_ptr<BealeWorkspace> ws;
  std::optional<NanopteronSolution> sol;
  std::string error;
};

/// Beale solves shared by the convergence and size criteria.
class NanopteronSweep {
 public:
  const std::vector<SweepEntry>& entries() {
    if (!done_) {
      for (double b : sweep_betas()) {
        for (double e : sweep_eps()) entries_.push_back({b, e, nullptr, std::nullopt, ""});
      }
      parallel_for(entries_.size(), [&](std::size_t i) {
        auto& en = entries_[i];
        try {
          const BondParams p(en.beta);
          const ScalingParams s(p, en.eps);
          en.ws = std::make_shared<BealeWorkspace>(p, s);
          en.sol = beale_iterate(*en.ws);
        } catch (const std::exception& ex) {
          en.error = ex.what();
        }
      });
      done_ = true;
    }
    return entries_;
  }

 private:
  bool done_ = false;
  std::vector<SweepEntry> entries_;
};

inline std::string tag(double beta, double eps) { return "beta=" + num(beta) + ",eps=" + num(eps); }

}  // namespace detail

struct Criterion {
  int id;
  std::string name;
  std::string claim;
  double budget;
  std::function<void(CriterionResult&)> run;
};

inline std::vector<Criterion> acceptance_suite(const VerifyConfig& cfg = {}) {
  auto sweep = std::make_shared<detail::NanopteronSweep>();
  std::vector<Criterion> out;

  out.push_back({1, "kdv-profile", "sampled sech^2 core solves the KdV profile equation", 1.0, [](CriterionResult& r) {
                   for (double b : {0.1, 0.2, 0.5, 2.0}) {
                     const BondParams p(b);
                     const auto s = sigma_beta(p, Grid(40.0, 512));
                     const double res = kdv_residual(s);
                     r.metrics["residual"][num(b)] = res;
                     if (!(res <= 1e-10)) r.failures.push_back("beta=" + num(b) + " residual " + num(res) + " > 1e-10");
                   }
                 }});

  out.push_back({2, "j0-scaling", "||J0||_{0,0} = O(eps^2)", 5.0, [](CriterionResult& r) {
                   const std::vector<double> eps{0.4, 0.3, 0.2, 0.1, 0.05};
                   for (double b : {0.1, 0.2}) {
                     const BondParams p(b);
                     const auto s = sigma_beta(p, Grid(80.0, 1024));
                     std::vector<double> norms;
                     for (double e : eps) norms.push_back(j0(s, ScalingParams(p, e)).l2_norm());
                     const double slope = loglog_slope(eps, norms);
                     r.metrics["slope"][num(b)] = slope;
                     r.metrics["norms"][num(b)] = norms;
                     if (!(std::abs(slope - 2.0) <= 0.2)) {
                       r.failures.push_back("beta=" + num(b) + " slope " + num(slope) + " outside 2 +- 0.2");
                     }
                   }
                 }});

  out.push_back({3, "symbol-remainder", "m(k) - 1 + gamma k^2 = O(k^4)", 1.0, [](CriterionResult& r) {
                   std::vector<double> ks;
                   for (int i = 0; i < 60; ++i) ks.push_back(1e-3 * std::pow(300.0, i / 59.0));
                   for (double b : {0.1, 0.2, 0.5, 2.0}) {
                     const BondParams p(b);
                     std::vector<double> rem;
                     for (double k : ks) rem.push_back(std::abs(m_beta(p, k) - 1.0 + p.gamma() * k * k));
                     const double slope = loglog_slope(ks, rem);
                     r.metrics["exponent"][num(b)] = slope;
                     if (!(std::abs(slope - 4.0) <= 0.1)) {
                       r.failures.push_back("beta=" + num(b) + " exponent " + num(slope) + " outside 4 +- 0.1");
                     }
                   }
                 }});

  out.push_back({4, "depression-remainder", "||R_eps||_{L2} = O(eps^4) for beta > 1/3", 60.0, [](CriterionResult& r) {
                   const std::vector<double> eps{0.3, 0.2, 0.15, 0.1};
                   for (double b : {0.5, 2.0}) {
                     const auto fit = remainder_scaling(BondParams(b), eps);
                     r.metrics["slope"][num(b)] = fit.slope;
                     r.metrics["norms"][num(b)] = fit.norms;
                     r.metrics["residuals"][num(b)] = fit.residuals;
                     if (!(fit.slope >= 3.5)) r.failures.push_back("beta=" + num(b) + " slope " + num(fit.slope) + " < 3.5");
                     for (std::size_t i = 0; i < eps.size(); ++i) {
                       if (!(fit.residuals[i] <= 1e-11)) {
                         r.failures.push_back(detail::tag(b, eps[i]) + " residual " + num(fit.residuals[i]) + " > 1e-11");
                       }
                     }
                   }
                 }});

  out.push_back({5, "periodic-family", "a = 0 gives (cos, K_eps); K^a is Lipschitz in a", 30.0, [](CriterionResult& r) {
                   for (double b : {0.1, 0.2}) {
                     const BondParams p(b);
                     const ScalingParams s(p, 0.2);
                     const PeriodicOptions opts;
                     const auto w0 = solve_periodic(p, s, 0.0, opts);
                     const double res0 = periodic_scaled_residual(w0);
                     double dev = std::abs(w0.K - K_eps(p, s));
                     for (int n = 0; n <= w0.harmonics(); ++n) dev = std::max(dev, std::abs(w0.cos_coeffs[n] - (n == 1 ? 1.0 : 0.0)));
                     r.metrics["a0_residual"][num(b)] = res0;
                     r.metrics["a0_deviation"][num(b)] = dev;
                     if (!(res0 <= 1e-13)) r.failures.push_back("beta=" + num(b) + " a=0 residual " + num(res0));
                     if (dev != 0.0) r.failures.push_back("beta=" + num(b) + " a=0 member differs from (cos, K_eps) by " + num(dev));
                     std::vector<double> lips;
                     for (int n : {10, 20, 40}) {
                       double lip = 0.0, prevK = w0.K, prevA = 0.0;
                       for (int i = 1; i <= n; ++i) {
                         const double a = amplitude_bound(p, opts) * i / n;
                         const double K = solve_periodic(p, s, a, opts).K;
                         lip = std::max(lip, std::abs(K - prevK) / (a - prevA));
                         prevK = K;
                         prevA = a;
                       }
                       lips.push_back(lip);
                     }
                     r.metrics["lipschitz"][num(b)] = lips;
                     for (std::size_t i = 1; i < lips.size(); ++i) {
                       if (!(std::isfinite(lips[i]) && std::abs(lips[i] - lips[i - 1]) <= 0.1 * lips[i - 1])) {
                         r.failures.push_back("beta=" + num(b) + " Lipschitz ratio not stable under refinement");
                       }
                     }
                   }
                 }});

  out.push_back({6, "beale-convergence", "Beale iteration contracts with ratio decreasing in eps", 600.0,
                 [sweep](CriterionResult& r) {
                   std::map<double, std::vector<double>> ratios;
                   for (const auto& en : sweep->entries()) {
                     const auto t = detail::tag(en.beta, en.eps);
                     if (!en.sol) {
                       r.failures.push_back(t + " failed: " + en.error);
                       continue;
                     }
                     const auto& s = *en.sol;
                     r.metrics[t] = {{"iterations", s.iterations}, {"contraction", s.contraction},
                                     {"max_ratio", s.max_ratio}, {"residual", s.residual}, {"N", en.ws->grid().size()}};
                     ratios[en.beta].push_back(s.contraction);
                     if (!(s.contraction < 1.0)) r.failures.push_back(t + " contraction " + num(s.contraction) + " >= 1");
                     if (!(s.residual <= 1e-10)) r.failures.push_back(t + " residual " + num(s.residual) + " > 1e-10");
                   }
                   for (const auto& [b, v] : ratios) {
                     for (std::size_t i = 1; i < v.size(); ++i) {
                       if (!(v[i] < v[i - 1])) r.failures.push_back("beta=" + num(b) + " contraction not decreasing with eps");
                     }
                   }
                 }});

  out.push_back({7, "remainder-ripple", "||R|| = O(eps^2) scaled, ripple beyond all orders, ripple frequency", 600.0,
                 [sweep](CriterionResult& r) {
                   std::map<double, std::vector<const detail::SweepEntry*>> by_beta;
                   for (const auto& en : sweep->entries()) {
                     if (!en.sol) {
                       r.failures.push_back(detail::tag(en.beta, en.eps) + " failed: " + en.error);
                       continue;
                     }
                     by_beta[en.beta].push_back(&en);
                   }
                   for (const auto& [b, list] : by_beta) {
                     const std::string key = num(b);
                     std::vector<double> eps, rw, rw_phys, a4, aabs, floor;
                     for (const auto* en : list) {
                       const auto& s = *en->sol;
                       const double e = en->eps;
                       eps.push_back(e);
                       rw.push_back(s.norms.R_weighted);
                       rw_phys.push_back(e * e * s.norms.R_weighted);
                       a4.push_back(s.norms.a_over_eps4);
                       aabs.push_back(std::abs(s.a));
                       floor.push_back(std::exp(-std::numbers::pi * en->ws->K()));
                       const double kphys = e * s.wave.K;
                       const double kc = k_crit(en->ws->params(), en->ws->scaling().c());
                       const double off = std::abs(kphys - kc);
                       r.metrics["ripple_frequency_offset"][detail::tag(b, e)] = off;
                       if (!(off <= e * e)) r.failures.push_back(detail::tag(b, e) + " ripple frequency off by " + num(off));
                     }
                     if (eps.size() < 2) continue;
                     const double slope = loglog_slope(eps, rw);
                     r.metrics["R_slope"][key] = slope;
                     r.metrics["R_physical_slope"][key] = loglog_slope(eps, rw_phys);
                     r.metrics["a"][key] = aabs;
                     r.metrics["a_over_eps4"][key] = a4;
                     r.metrics["exp_minus_pi_K"][key] = floor;
                     if (!(slope >= 1.8)) r.failures.push_back("beta=" + key + " R slope " + num(slope) + " < 1.8");
                     for (std::size_t i = 1; i < a4.size(); ++i) {
                       if (!(a4[i] < a4[i - 1])) {
                         r.failures.push_back("beta=" + key + " |a|/eps^4 not decreasing at eps=" + num(eps[i]) + " (" +
                                              num(a4[i - 1]) + " -> " + num(a4[i]) + "); |a| <= " +
                                              num(*std::max_element(aabs.begin(), aabs.end())) +
                                              " is roundoff, exact size ~exp(-pi K_eps) <= " +
                                              num(*std::max_element(floor.begin(), floor.end())));
                         break;
                       }
                     }
                   }
                 }});

  out.push_back({8, "newton-oracle", "Newton on the discretized equation leaves the Beale solution in place", 120.0,
                 [](CriterionResult& r) {
                   for (auto [b, e] : {std::pair{0.2, 0.25}, std::pair{0.2, 0.2}, std::pair{0.1, 0.25}}) {
                     const BondParams p(b);
                     const ScalingParams s(p, e);
                     const BealeWorkspace ws(p, s);
                     const auto sol = beale_iterate(ws);
                     const auto o = newton_oracle(ws, sol);
                     const auto t = detail::tag(b, e);
                     r.metrics[t] = {{"moved", o.moved}, {"newton_residual", o.residual}, {"iterations", o.iterations}};
                     if (!(o.moved <= 1e-8)) r.failures.push_back(t + " Newton moved the solution by " + num(o.moved));
                   }
                 }});

  out.push_back({9, "uniqueness", "perturbed seed reconverges to the same (R, a)", 120.0, [cfg](CriterionResult& r) {
                   std::mt19937_64 gen(cfg.seed);
                   for (auto [b, e] : {std::pair{0.2, 0.2}, std::pair{0.1, 0.2}}) {
                     const BondParams p(b);
                     const ScalingParams s(p, e);
                     const BealeWorkspace ws(p, s);
                     const auto ref = beale_iterate(ws);
                     const auto seed = random_even_bumps(ws.grid(), gen, 1e-3);
                     const auto alt = beale_iterate(ws, {}, seed, 1e-3);
                     const double d = (alt.R - ref.R).sup_norm() + std::abs(alt.a - ref.a);
                     const auto t = detail::tag(b, e);
                     r.metrics[t] = {{"difference", d}, {"iterations_perturbed", alt.iterations}};
                     if (!(d <= 1e-8)) r.failures.push_back(t + " perturbed run differs by " + num(d));
                   }
                 }});

  out.push_back({10, "stability-diagram", "Delta_MI > 0 on the k_crit(beta, 1) curve; map has S and U regions", 60.0,
                 [](CriterionResult& r) {
                   for (int i = 1; i <= 6; ++i) {
                     const double b = 0.05 * i;
                     const BondParams p(b);
                     const double k = k_crit(p, 1.0);
                     const double d = delta_mi(p, k);
                     r.metrics["curve_delta_mi"][num(b)] = d;
                     if (classify(d) != Verdict::Stable) r.failures.push_back("beta=" + num(b) + " Delta_MI = " + num(d));
                   }
                   MapRange mr;
                   const auto coarse = stability_map(mr);
                   mr.n_beta = 2 * mr.n_beta + 1;
                   mr.n_k = 2 * mr.n_k + 1;
                   const auto fine = stability_map(mr);
                   const auto c = coarse.counts();
                   const int mism = refinement_mismatches(coarse, fine);
                   r.metrics["counts"] = {{"stable", c[0]}, {"unstable", c[1]}, {"indeterminate", c[2]}};
                   r.metrics["refinement_mismatches"] = mism;
                   if (c[0] == 0 || c[1] == 0) r.failures.push_back("map lacks a stable or unstable region");
                   if (mism != 0) r.failures.push_back(std::to_string(mism) + " verdicts changed under refinement");
                 }});

  out.push_back({11, "index-cross-check", "analytic Delta_MI matches Richardson differences", 5.0,
                 [cfg](CriterionResult& r) {
                   std::mt19937_64 gen(cfg.seed + 11);
                   double worst = 0.0;
                   int n = 0;
                   while (n < 100) {
                     const double b = 0.01 + 0.32 * unit_uniform(gen);
                     const double k = 0.1 + 11.9 * unit_uniform(gen);
                     const BondParams p(b);
                     double an = 0.0;
                     try {
                       an = delta_mi(p, k);
                     } catch (const Error& e) {
                       if (e.code() == ErrorCode::ResonantDenominator) continue;
                       throw;
                     }
                     const double fd = delta_mi_finite_difference(p, k);
                     worst = std::max(worst, std::abs(an - fd) / std::abs(an));
                     ++n;
                   }
                   r.metrics["samples"] = n;
                   r.metrics["worst_relative"] = worst;
                   if (!(worst <= 1e-6)) r.failures.push_back("worst relative difference " + num(worst) + " > 1e-6");
                 }});
  return out;
}

inline CriterionResult run_criterion(const Criterion& c) {
  CriterionResult r;
  r.id = c.id;
  r.name = c.name;
  r.claim = c.claim;
  r.budget = c.budget;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(r);
  } catch (const std::exception& e) {
    r.failures.push_back(std::string("exception: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > r.budget) r.failures.push_back("runtime " + num(r.seconds) + " s exceeds budget " + num(r.budget) + " s");
  r.pass = r.failures.empty();
  return r;
}

/// One line per criterion.
inline std::string summary_line(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "[%s] %2d %-22s %8.2f s / %g s  ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds, r.budget);
  std::string line = head + r.claim;
  for (const auto& f : r.failures) line += "\n       - " + f;
  return line;
}

inline json to_json(const CriterionResult& r) {
  // Wall time is left out so the report is a function of the configuration.
  return {{"id", r.id},         {"name", r.name},       {"claim", r.claim},      {"pass", r.pass},
          {"budget", r.budget}, {"metrics", r.metrics}, {"failures", r.failures}};
}

}  // namespace capwhitham
