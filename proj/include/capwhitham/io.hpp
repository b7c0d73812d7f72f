#pragma once

// Output artifacts: profile CSVs, JSON documents with a sidecar describing the
// run, and the flat key=value run configuration.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capwhitham/error.hpp"
#include "capwhitham/modstab.hpp"
#include "capwhitham/nanopteron.hpp"
#include "capwhitham/periodic_family.hpp"
#include "capwhitham/spectral_field.hpp"

namespace capwhitham {

using json = nlohmann::ordered_json;

inline const std::map<std::string, std::string>& module_versions() {
  static const std::map<std::string, std::string> v{
      {"cli", "1.0.0"},     {"depression", "1.0.0"},     {"dispersion", "1.0.0"},     {"kdv_core", "1.0.0"},
      {"modstab", "1.0.0"}, {"nanopteron", "1.0.0"}, {"periodic_family", "1.0.0"}, {"spectral_field", "1.0.0"},
  };
  return v;
}

/// 16 significant digits, '.' decimal point.
inline std::string fmt16(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", v);
  return buf;
}

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Flat key=value configuration. Keys are kept sorted so the serialized
/// form, and therefore the hash, does not depend on insertion order.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        fail(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + " has no '='");
      }
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
  }

  static RunConfig load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::InvalidArgument, "cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) fail(ErrorCode::InvalidArgument, "empty config key");
    values_[key] = value;
  }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const { return values_.at(key); }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }
  std::string hash() const { return fnv1a_hex(serialize()); }

  friend bool operator==(const RunConfig& a, const RunConfig& b) { return a.values_ == b.values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot write " + path.string());
  f << text;
}

inline void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

inline std::string profile_csv(const SpectralField& f) {
  std::string out = "x,value\n";
  const Grid& g = f.grid();
  for (int n = 0; n < f.size(); ++n) out += fmt16(g.x(n)) + "," + fmt16(f[n]) + "\n";
  return out;
}

struct SidecarInfo {
  std::string kind;
  double L = 0.0;
  int N = 0;
  double beta = 0.0;
  double epsilon = 0.0;
};

inline json sidecar(const SidecarInfo& info, const RunConfig& cfg) {
  json j;
  j["kind"] = info.kind;
  j["L"] = info.L;
  j["N"] = info.N;
  j["beta"] = info.beta;
  j["epsilon"] = info.epsilon;
  j["config_hash"] = cfg.hash();
  j["versions"] = module_versions();
  return j;
}

/// Write `name` and its sidecar `name.json`.
inline void write_with_sidecar(const std::filesystem::path& path, const std::string& text, const SidecarInfo& info,
                               const RunConfig& cfg) {
  write_text(path, text);
  write_json(path.string() + ".json", sidecar(info, cfg));
}

inline json to_json(const PeriodicWave& w) {
  json j;
  j["beta"] = w.params.beta();
  j["epsilon"] = w.scaling.epsilon();
  j["c"] = w.scaling.c();
  j["a"] = w.a;
  j["K"] = w.K;
  j["harmonics"] = w.harmonics();
  j["scaled_residual"] = periodic_scaled_residual(w);
  j["cos_coeffs"] = w.cos_coeffs;
  return j;
}

inline json to_json(const BealeWorkspace& ws, const NanopteronSolution& s) {
  json j;
  j["beta"] = ws.params().beta();
  j["epsilon"] = ws.scaling().epsilon();
  j["c"] = ws.scaling().c();
  j["a"] = s.a;
  j["K"] = s.wave.K;
  j["iterations"] = s.iterations;
  j["residual"] = s.residual;
  j["norms"] = {{"R_l2", s.norms.R_l2}, {"R_weighted", s.norms.R_weighted}, {"a_over_eps4", s.norms.a_over_eps4}};
  j["contraction"] = s.contraction;
  j["grid"] = {{"L", ws.grid().half_length()}, {"N", ws.grid().size()}, {"kernel_index", ws.kernel_index()}};
  j["chi"] = ws.chi();
  json hist = json::array();
  for (const auto& h : s.history) hist.push_back({{"dR", h.dR}, {"da", h.da}, {"ratio", h.ratio}});
  j["history"] = hist;
  return j;
}

inline std::string stability_csv(const StabilityMap& map) {
  std::string out = "beta,k,k_sqrt_beta,delta_bf,delta_mi,verdict\n";
  for (const auto& s : map.samples) {
    out += fmt16(s.beta) + "," + fmt16(s.k) + "," + fmt16(s.k * std::sqrt(s.beta)) + "," + fmt16(s.delta_bf) + "," +
           (std::isfinite(s.delta_mi) ? fmt16(s.delta_mi) : std::string("nan")) + "," + to_string(s.verdict) + "\n";
  }
  return out;
}

inline json stability_summary(const StabilityMap& map) {
  const auto c = map.counts();
  json curve = json::array();
  for (const auto& [b, k] : map.kcrit_curve) curve.push_back({b, k});
  json j;
  j["n_beta"] = map.betas.size();
  j["n_k"] = map.ks.size();
  j["counts"] = {{"stable", c[0]}, {"unstable", c[1]}, {"indeterminate", c[2]}};
  j["kcrit_curve"] = curve;
  return j;
}

}  // namespace capwhitham
