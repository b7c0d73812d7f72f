// capwhitham: command-line driver for the capillary-gravity Whitham solvers.
//
// Exit codes: 0 ok, 1 verify failure, 2 usage or configuration error,
// 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capwhitham/capwhitham.hpp"

namespace fs = std::filesystem;
using namespace capwhitham;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Options {
  double beta = 0.1;
  double epsilon = 0.1;
  std::string eps_list;
  double L = 0.0;  // 0: command default
  int N = 0;       // 0: command default
  double tol = 0.0;
  int max_iter = 100;
  std::string out = "out";
  std::vector<std::string> only;
  std::string k_range;
  std::string beta_range;
  std::string resolution = "64x64";
  double a = 0.0;
  std::uint64_t seed = VerifyConfig{}.seed;
};

struct Range {
  double lo = 0.0, hi = 0.0, step = 0.0;
  bool has_step = false;
};

Range parse_range(const std::string& text, const char* flag) {
  Range r;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  try {
    if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("count");
    r.lo = std::stod(parts[0]);
    r.hi = std::stod(parts[1]);
    if (parts.size() == 3) {
      r.step = std::stod(parts[2]);
      r.has_step = true;
    }
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, std::string(flag) + " expects A:B or A:B:STEP, got '" + text + "'");
  }
  if (!(r.hi > r.lo) || (r.has_step && !(r.step > 0.0))) {
    fail(ErrorCode::InvalidArgument, std::string(flag) + " needs A < B and STEP > 0");
  }
  return r;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    try {
      v.push_back(std::stod(p));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "cannot parse list entry '" + p + "'");
    }
  }
  if (v.empty()) fail(ErrorCode::InvalidArgument, "empty list");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) fail(ErrorCode::InvalidArgument, "--eps-list must be strictly decreasing");
  }
  return v;
}

std::vector<double> eps_values(const Options& o) { return o.eps_list.empty() ? std::vector<double>{o.epsilon} : parse_list(o.eps_list); }

std::string eps_dir(double e) { return "eps_" + fmt16(e); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) fail(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
}

/// The effective configuration of a run: every option the command read.
// Where the output goes is not part of the run, so --out and --config stay out of the hash.
RunConfig effective_config(const CLI::App& sub) {
  RunConfig cfg;
  cfg.set("command", sub.get_name());
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_name();
    if (name == "--help" || name == "--config" || name == "--out") continue;
    const std::string key = opt->get_lnames().front();
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    cfg.set(key, value);
  }
  return cfg;
}

int cmd_dispersion(const Options& o, const RunConfig& cfg) {
  const BondParams p(o.beta);
  const Range r = parse_range(o.k_range.empty() ? "0:10:0.01" : o.k_range, "--k-range");
  const double step = r.has_step ? r.step : 0.01;
  const long rows = std::lround((r.hi - r.lo) / step) + 1;
  std::string csv = "k,m,dm,d2m\n";
  for (long i = 0; i < rows; ++i) {
    const double k = r.lo + i * step;
    csv += fmt16(k) + "," + fmt16(m_beta(p, k)) + "," + fmt16(m_beta_deriv(p, k, 1)) + "," + fmt16(m_beta_deriv(p, k, 2)) + "\n";
  }
  const fs::path dir(o.out);
  write_with_sidecar(dir / "dispersion.csv", csv, {"dispersion", 0.0, static_cast<int>(rows), o.beta, 0.0}, cfg);

  json j;
  j["beta"] = p.beta();
  j["gamma"] = p.gamma();
  j["regime"] = p.regime() == Regime::Weak ? "weak" : "strong";
  if (p.regime() == Regime::Weak) {
    const double kc = k_crit(p, 1.0);
    j["k_min"] = k_min(p);
    j["k_crit_c1"] = kc;
    j["k_crit_residual"] = std::abs(m_beta(p, kc) - 1.0);
    json keps = json::array();
    for (double e : eps_values(o)) {
      const ScalingParams s(p, e);
      const double K = K_eps(p, s);
      keps.push_back({{"epsilon", e}, {"c", s.c()}, {"K_eps", K}, {"l_eps_at_K", l_eps(p, s, K)}});
    }
    j["K_eps"] = keps;
  }
  write_with_sidecar(dir / "dispersion.json", j.dump(2) + "\n", {"dispersion-summary", 0.0, 0, o.beta, 0.0}, cfg);
  std::printf("dispersion: %ld rows, gamma = %s\n", rows, fmt16(p.gamma()).c_str());
  return kExitOk;
}

int cmd_nanopteron(const Options& o, const RunConfig& cfg) {
  const BondParams p(o.beta);
  if (p.regime() != Regime::Weak) fail(ErrorCode::WrongRegime, "nanopteron requires beta < 1/3");
  BealeOptions bo;
  if (o.tol > 0.0) bo.tol = o.tol;
  bo.max_iter = o.max_iter;
  const double target_L = o.L > 0.0 ? o.L : 100.0;
  const auto eps = eps_values(o);
  std::vector<double> rw, a4;
  json sweep = json::array();
  for (double e : eps) {
    const ScalingParams s(p, e);
    const BealeWorkspace ws(p, s, target_L, o.N);
    const auto sol = beale_iterate(ws, bo);
    const auto phys = unscale(ws, sol);
    const fs::path dir = eps.size() > 1 ? fs::path(o.out) / eps_dir(e) : fs::path(o.out);
    const SidecarInfo scaled{"nanopteron-R", ws.grid().half_length(), ws.grid().size(), o.beta, e};
    const SidecarInfo physical{"nanopteron-profile", phys.grid.half_length(), phys.grid.size(), o.beta, e};
    write_with_sidecar(dir / "nanopteron.json", to_json(ws, sol).dump(2) + "\n",
                       {"nanopteron", ws.grid().half_length(), ws.grid().size(), o.beta, e}, cfg);
    write_with_sidecar(dir / "R.csv", profile_csv(sol.R), scaled, cfg);
    write_with_sidecar(dir / "w.csv", profile_csv(phys.w), physical, cfg);
    write_with_sidecar(dir / "core.csv", profile_csv(phys.core), physical, cfg);
    write_with_sidecar(dir / "ripple.csv", profile_csv(phys.ripple), physical, cfg);
    std::printf("nanopteron beta=%s eps=%s: iterations=%d residual=%.3e |a|=%.3e ||R||=%.6e\n", fmt16(o.beta).c_str(),
                fmt16(e).c_str(), sol.iterations, sol.residual, std::abs(sol.a), sol.norms.R_l2);
    rw.push_back(sol.norms.R_weighted);
    a4.push_back(sol.norms.a_over_eps4);
    sweep.push_back({{"epsilon", e}, {"R_weighted", sol.norms.R_weighted}, {"a_over_eps4", sol.norms.a_over_eps4},
                     {"contraction", sol.contraction}});
  }
  if (eps.size() > 1) {
    json j;
    j["beta"] = o.beta;
    j["runs"] = sweep;
    j["R_weighted_slope"] = loglog_slope(eps, rw);
    write_with_sidecar(fs::path(o.out) / "sweep.json", j.dump(2) + "\n", {"nanopteron-sweep", 0.0, 0, o.beta, 0.0}, cfg);
  }
  return kExitOk;
}

int cmd_depression(const Options& o, const RunConfig& cfg) {
  const BondParams p(o.beta);
  if (p.regime() != Regime::Strong) fail(ErrorCode::WrongRegime, "depression requires beta > 1/3");
  DepressionOptions d;
  if (o.L > 0.0) d.L_scaled = o.L;
  if (o.N > 0) d.N = o.N;
  if (o.tol > 0.0) d.accept = o.tol;
  d.max_newton = o.max_iter;
  const auto eps = eps_values(o);
  std::vector<double> norms, converged_eps;
  json runs = json::array();
  std::optional<Error> first_failure;
  double largest_converged = 0.0;
  for (double e : eps) {
    const ScalingParams s(p, e);
    const fs::path dir = eps.size() > 1 ? fs::path(o.out) / eps_dir(e) : fs::path(o.out);
    std::optional<DepressionWave> solved;
    try {
      solved = solve_depression(p, s, d);
    } catch (const Error& err) {
      // A sweep keeps going so the largest converged epsilon can be reported.
      if (eps.size() == 1) throw;
      if (!first_failure) first_failure = err;
      runs.push_back({{"beta", o.beta}, {"epsilon", e}, {"error", to_string(err.code())}});
      std::printf("depression beta=%s eps=%s: %s\n", fmt16(o.beta).c_str(), fmt16(e).c_str(), err.what());
      continue;
    }
    const auto& w = *solved;
    largest_converged = std::max(largest_converged, e);
    const SidecarInfo info{"depression-profile", w.w.grid().half_length(), w.w.grid().size(), o.beta, e};
    const double rn = remainder_in_scaled_variable(w).l2_norm();
    json j{{"beta", o.beta},     {"epsilon", e},          {"c", s.c()},
           {"residual", w.residual}, {"iterations", w.iterations}, {"w0", w.w[w.w.size() / 2]},
           {"R_l2_scaled", rn}};
    write_with_sidecar(dir / "depression.json", j.dump(2) + "\n", info, cfg);
    write_with_sidecar(dir / "w.csv", profile_csv(w.w), info, cfg);
    write_with_sidecar(dir / "R.csv", profile_csv(w.R), info, cfg);
    std::printf("depression beta=%s eps=%s: iterations=%d residual=%.3e w(0)=%s\n", fmt16(o.beta).c_str(),
                fmt16(e).c_str(), w.iterations, w.residual, fmt16(w.w[w.w.size() / 2]).c_str());
    converged_eps.push_back(e);
    norms.push_back(rn);
    runs.push_back(j);
  }
  if (eps.size() > 1) {
    json j{{"beta", o.beta}, {"runs", runs}, {"largest_converged_epsilon", converged_eps.empty() ? json(nullptr) : json(largest_converged)}};
    j["R_l2_slope"] = converged_eps.size() >= 2 ? json(loglog_slope(converged_eps, norms)) : json(nullptr);
    write_with_sidecar(fs::path(o.out) / "sweep.json", j.dump(2) + "\n", {"depression-sweep", 0.0, 0, o.beta, 0.0}, cfg);
  }
  if (first_failure) throw *first_failure;
  return kExitOk;
}

int cmd_periodic(const Options& o, const RunConfig& cfg) {
  const BondParams p(o.beta);
  const ScalingParams s(p, o.epsilon);
  const auto w = solve_periodic(p, s, o.a);
  const int n = o.N > 0 ? o.N : 256;
  const Grid g(std::numbers::pi / w.K, n);
  const auto prof = sample_on_grid(w, g, true);
  const fs::path dir(o.out);
  const SidecarInfo info{"periodic", g.half_length(), n, o.beta, o.epsilon};
  write_with_sidecar(dir / "periodic.json", to_json(w).dump(2) + "\n", info, cfg);
  write_with_sidecar(dir / "profile.csv", profile_csv(prof), info, cfg);
  std::printf("periodic beta=%s eps=%s a=%s: K=%s residual=%.3e harmonics=%d\n", fmt16(o.beta).c_str(),
              fmt16(o.epsilon).c_str(), fmt16(o.a).c_str(), fmt16(w.K).c_str(), periodic_scaled_residual(w), w.harmonics());
  return kExitOk;
}

int cmd_stability_map(const Options& o, const RunConfig& cfg) {
  MapRange mr;
  if (!o.k_range.empty()) {
    const Range r = parse_range(o.k_range, "--k-range");
    mr.k_lo = r.lo;
    mr.k_hi = r.hi;
  }
  if (!o.beta_range.empty()) {
    const Range r = parse_range(o.beta_range, "--beta-range");
    mr.beta_lo = r.lo;
    mr.beta_hi = r.hi;
  }
  int rows = 0, cols = 0;
  char x = 0;
  if (std::sscanf(o.resolution.c_str(), "%d%c%d", &rows, &x, &cols) != 3 || (x != 'x' && x != 'X')) {
    fail(ErrorCode::InvalidArgument, "--resolution expects RxC, got '" + o.resolution + "'");
  }
  mr.n_beta = rows;
  mr.n_k = cols;
  const auto map = stability_map(mr);
  const fs::path dir(o.out);
  const SidecarInfo info{"stability-map", 0.0, rows * cols, 0.0, 0.0};
  write_with_sidecar(dir / "stability.csv", stability_csv(map), info, cfg);
  write_with_sidecar(dir / "stability.json", stability_summary(map).dump(2) + "\n", info, cfg);
  const auto c = map.counts();
  std::printf("stability map %dx%d: stable=%d unstable=%d indeterminate=%d\n", rows, cols, c[0], c[1], c[2]);
  return kExitOk;
}

int cmd_verify(const Options& o, const RunConfig& cfg) {
  VerifyConfig vc;
  vc.seed = o.seed;
  auto suite = acceptance_suite(vc);
  if (!o.only.empty()) {
    for (const auto& name : o.only) {
      const bool known = std::any_of(suite.begin(), suite.end(), [&](const Criterion& c) { return c.name == name; });
      if (!known) fail(ErrorCode::InvalidArgument, "unknown criterion '" + name + "'");
    }
    std::erase_if(suite, [&](const Criterion& c) { return std::find(o.only.begin(), o.only.end(), c.name) == o.only.end(); });
  }
  bool all = true;
  json report = json::array();
  for (const auto& c : suite) {
    const auto r = run_criterion(c);
    std::printf("%s\n", summary_line(r).c_str());
    std::fflush(stdout);
    all = all && r.pass;
    report.push_back(to_json(r));
  }
  json j{{"pass", all}, {"criteria", report}};
  write_with_sidecar(fs::path(o.out) / "verify.json", j.dump(2) + "\n", {"verify", 0.0, 0, 0.0, 0.0}, cfg);
  std::printf("%s: %zu criteria\n", all ? "ALL PASS" : "FAILURES", suite.size());
  return all ? kExitOk : kExitVerifyFail;
}

void write_error(const Options& o, const Error& e) {
  try {
    json j{{"code", to_string(e.code())}, {"message", e.what()}};
    write_text(fs::path(o.out) / "error.json", j.dump(2) + "\n");
  } catch (...) {
  }
}

/// Config-file entries become leading `--key=value` arguments of the
/// subcommand, so explicit flags given later take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t erase = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      erase = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      erase = 1;
    } else {
      continue;
    }
    const auto cfg = RunConfig::load(path);
    args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i + erase));
    std::vector<std::string> injected;
    for (const auto& [k, v] : cfg.values()) {
      if (k == "command") continue;
      if (k == "only") {
        std::stringstream ss(v);
        for (std::string n; std::getline(ss, n, ',');) injected.push_back("--only=" + n);
        continue;
      }
      injected.push_back("--" + k + "=" + v);
    }
    // Insert right after the subcommand name (the first non-option argument).
    std::size_t at = 0;
    while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
    if (at < args.size()) ++at;
    args.insert(args.begin() + static_cast<long>(at), injected.begin(), injected.end());
    break;
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Capillary-gravity Whitham equation solvers"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--config", config_path, "flat key=value configuration file");
  };
  auto add_physics = [&](CLI::App* sub) {
    sub->add_option("--beta", o.beta, "Bond number")->capture_default_str();
    sub->add_option("--epsilon", o.epsilon, "small parameter")->capture_default_str();
    sub->add_option("--eps-list", o.eps_list, "comma-separated decreasing epsilon values");
  };

  auto* disp = app.add_subcommand("dispersion", "tabulate the symbol and critical frequencies");
  add_common(disp);
  add_physics(disp);
  disp->add_option("--k-range,--k", o.k_range, "A:B:STEP")->default_str("0:10:0.01");

  auto* nano = app.add_subcommand("nanopteron", "generalized solitary wave for beta < 1/3");
  add_common(nano);
  add_physics(nano);
  nano->add_option("--L", o.L, "target half-length in the scaled variable (default 100)")->capture_default_str();
  nano->add_option("--N", o.N, "grid size (default: >= 8 points per ripple wavelength)")->capture_default_str();
  nano->add_option("--tol", o.tol, "step tolerance (default 1e-12)")->capture_default_str();
  nano->add_option("--max-iter", o.max_iter, "iteration cap")->capture_default_str();

  auto* dep = app.add_subcommand("depression", "solitary wave of depression for beta > 1/3");
  add_common(dep);
  add_physics(dep);
  dep->add_option("--L", o.L, "half-length in the scaled variable (default 40)")->capture_default_str();
  dep->add_option("--N", o.N, "grid size (default 512)")->capture_default_str();
  dep->add_option("--tol", o.tol, "accepted relative residual (default 1e-11)")->capture_default_str();
  dep->add_option("--max-iter", o.max_iter, "Newton iteration cap")->capture_default_str();

  auto* per = app.add_subcommand("periodic", "small-amplitude periodic wave");
  add_common(per);
  add_physics(per);
  per->add_option("--a", o.a, "amplitude")->capture_default_str();
  per->add_option("--N", o.N, "samples per period for the profile CSV (default 256)")->capture_default_str();

  auto* smap = app.add_subcommand("stability-map", "modulational stability index over (beta, k)");
  add_common(smap);
  smap->add_option("--k-range", o.k_range, "A:B (STEP ignored)")->default_str("0:12");
  smap->add_option("--beta-range", o.beta_range, "A:B")->default_str("0:0.333333333333333");
  smap->add_option("--resolution", o.resolution, "RxC samples (beta x k)")->capture_default_str();

  auto* ver = app.add_subcommand("verify", "run the acceptance suite");
  add_common(ver);
  ver->add_option("--only", o.only, "criterion name (repeatable)")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  ver->add_option("--seed", o.seed, "seed for randomized checks")->capture_default_str();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (const auto* tol = sub->get_option_no_throw("--tol"); tol && tol->count() > 0) require_positive(o.tol, "--tol");
    if (o.max_iter < 1) fail(ErrorCode::InvalidArgument, "--max-iter must be >= 1");
    const RunConfig cfg = effective_config(*sub);
    if (sub == disp) return cmd_dispersion(o, cfg);
    if (sub == nano) return cmd_nanopteron(o, cfg);
    if (sub == dep) return cmd_depression(o, cfg);
    if (sub == per) return cmd_periodic(o, cfg);
    if (sub == smap) return cmd_stability_map(o, cfg);
    if (sub == ver) return cmd_verify(o, cfg);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.is_usage_error()) return kExitUsage;
    write_error(o, e);
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
