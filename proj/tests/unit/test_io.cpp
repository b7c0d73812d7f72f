#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "capwhitham/io.hpp"
#include "capwhitham/parallel.hpp"

using namespace capwhitham;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct ThreadEnv {
  explicit ThreadEnv(const char* v) { setenv("CAPWHITHAM_THREADS", v, 1); }
  ~ThreadEnv() { unsetenv("CAPWHITHAM_THREADS"); }
};

}  // namespace

TEST(Format, SixteenDigits) {
  EXPECT_EQ(fmt16(0.1), "0.1");
  EXPECT_EQ(fmt16(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(fmt16(0.0), "0");
  EXPECT_EQ(fmt16(-2.5e-300), "-2.5e-300");
  EXPECT_EQ(std::stod(fmt16(0.1 + 0.2)), 0.3000000000000000);
}

TEST(Hash, Fnv1aKnownValues) {
  // reference values of 64-bit FNV-1a
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(RunConfig, ParseSerializeRoundTrip) {
  const auto cfg = RunConfig::parse("# comment\n  beta = 0.1  \n\nepsilon=0.15 # trailing\n");
  EXPECT_EQ(cfg.get("beta"), "0.1");
  EXPECT_EQ(cfg.get("epsilon"), "0.15");
  EXPECT_EQ(cfg.serialize(), "beta=0.1\nepsilon=0.15\n");
  EXPECT_EQ(RunConfig::parse(cfg.serialize()), cfg);
  // insertion order does not matter
  const auto other = RunConfig::parse("epsilon = 0.15\nbeta = 0.1\n");
  EXPECT_EQ(other.hash(), cfg.hash());
  auto changed = cfg;
  changed.set("beta", "0.2");
  EXPECT_NE(changed.hash(), cfg.hash());
}

TEST(RunConfig, Errors) {
  EXPECT_THROW(RunConfig::parse("beta 0.1\n"), Error);
  EXPECT_THROW(RunConfig::parse(" = 3\n"), Error);
  EXPECT_THROW(RunConfig::load("/nonexistent/config.cfg"), Error);
}

TEST(Output, ProfileCsv) {
  const Grid g(1.0, 8);
  const auto f = SpectralField::sample(g, [](double x) { return 2.0 * x; });
  const auto csv = profile_csv(f);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,value");
  std::getline(in, line);
  EXPECT_EQ(line, "-1,-2");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 8);
}

TEST(Output, SidecarFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "capwhitham_io_test";
  std::filesystem::remove_all(dir);
  RunConfig cfg;
  cfg.set("beta", "0.1");
  write_with_sidecar(dir / "sub" / "w.csv", "x,value\n", {"profile", 10.0, 64, 0.1, 0.2}, cfg);
  EXPECT_EQ(slurp(dir / "sub" / "w.csv"), "x,value\n");
  const auto j = json::parse(slurp(dir / "sub" / "w.csv.json"));
  EXPECT_EQ(j["kind"], "profile");
  EXPECT_EQ(j["N"], 64);
  EXPECT_EQ(j["config_hash"], cfg.hash());
  for (const char* m : {"dispersion", "spectral_field", "kdv_core", "periodic_family", "nanopteron", "depression",
                        "modstab", "cli"}) {
    EXPECT_TRUE(j["versions"].contains(m)) << m;
  }
  std::filesystem::remove_all(dir);
}

TEST(Output, StabilityCsvAndSummary) {
  MapRange r;
  r.n_beta = 32;
  r.n_k = 32;
  const auto map = stability_map(r);
  const auto csv = stability_csv(map);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "beta,k,k_sqrt_beta,delta_bf,delta_mi,verdict");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 32 * 32 + 1);
  const auto s = stability_summary(map);
  EXPECT_EQ(s["counts"]["stable"].get<int>() + s["counts"]["unstable"].get<int>() +
                s["counts"]["indeterminate"].get<int>(),
            32 * 32);
}

TEST(Output, PeriodicJson) {
  const BondParams p(0.1);
  const auto w = solve_periodic(p, ScalingParams(p, 0.2), 0.01);
  const auto j = to_json(w);
  for (const char* key : {"beta", "epsilon", "c", "a", "K", "harmonics", "scaled_residual", "cos_coeffs"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["cos_coeffs"].size(), w.cos_coeffs.size());
}

TEST(Parallel, CoversEveryIndexOnce) {
  for (const char* t : {"1", "4"}) {
    ThreadEnv env(t);
    EXPECT_EQ(worker_count(), static_cast<unsigned>(std::atoi(t)));
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
}

TEST(Parallel, RethrowsWorkerException) {
  ThreadEnv env("3");
  EXPECT_THROW(parallel_for(50, [](std::size_t i) {
                 if (i == 17) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Parallel, MapIsThreadCountInvariant) {
  MapRange r;
  r.n_beta = 32;
  r.n_k = 32;
  std::string one, many;
  {
    ThreadEnv env("1");
    one = stability_csv(stability_map(r));
  }
  {
    ThreadEnv env("4");
    many = stability_csv(stability_map(r));
  }
  EXPECT_EQ(one, many);
}
