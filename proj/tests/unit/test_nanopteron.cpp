#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "capwhitham/fit.hpp"
#include "capwhitham/modstab.hpp"
#include "capwhitham/nanopteron.hpp"

using namespace capwhitham;

namespace {

template <typename Body>
void expect_code(Body&& body, ErrorCode code) {
  try {
    body();
    FAIL() << "no exception, expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// One shared solve; beta = 0.2, eps = 0.25 runs on 4096 points.
struct Fixture {
  BondParams p{0.2};
  ScalingParams s{p, 0.25};
  BealeWorkspace ws{p, s};
  NanopteronSolution sol = beale_iterate(ws);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

SpectralField bump(const Grid& g, double width, double centre) {
  return SpectralField::sample(g, [&](double x) {
    const double a = 1.0 / std::cosh((x - centre) / width), b = 1.0 / std::cosh((x + centre) / width);
    return a * a + b * b;
  });
}

}  // namespace

TEST(Workspace, ResonantModeOnGrid) {
  const auto& ws = fixture().ws;
  const auto& g = ws.grid();
  EXPECT_NEAR(g.k(ws.kernel_index()), ws.K(), 1e-12 * ws.K());
  EXPECT_LE(std::abs(g.half_length() - 100.0), std::numbers::pi / ws.K());
  EXPECT_LE(std::abs(ws.l_symbol()[ws.kernel_index()]), 1e-10);
  EXPECT_GE(g.size(), 8 * ws.kernel_index());
  EXPECT_EQ(g.size(), 4096);
}

TEST(Workspace, ChiClosedForm) {
  // chi = 2 (sigma cos K.)^(K) = sigma^(0) + sigma^(2K)
  for (double b : {0.1, 0.2}) {
    const BondParams p(b);
    const BealeWorkspace ws(p, ScalingParams(p, 0.25));
    EXPECT_NEAR(ws.chi(), sigma_hat(p, 0.0) + sigma_hat(p, 2.0 * ws.K()), 1e-14) << b;
  }
  EXPECT_NEAR(fixture().ws.chi(), 0.0636619772368, 1e-12);
}

TEST(Workspace, Errors) {
  const BondParams p(0.2);
  expect_code([&] { BealeWorkspace(p, ScalingParams(p, 0.25), 100.0, 512); }, ErrorCode::GridTooCoarse);
  const BondParams strong(0.5);
  expect_code([&] { BealeWorkspace(strong, ScalingParams(strong, 0.25)); }, ErrorCode::WrongRegime);
}

TEST(Projection, RemovesResonantContent) {
  const auto& ws = fixture().ws;
  const auto F = bump(ws.grid(), 0.7, 3.0);
  const auto PF = project(ws, F);
  EXPECT_LE(std::abs(coeff_at(PF, ws.K())), 1e-16);
  EXPECT_LE((project(ws, PF) - PF).sup_norm(), 1e-15);
  const auto sp = ws.sigma().field * ws.phi0();
  EXPECT_LE(project(ws, sp).sup_norm(), 1e-15);
  // changes only a multiple of sigma cos(K X)
  const auto diff = F - PF;
  const double t = diff[ws.grid().size() / 2] / sp[ws.grid().size() / 2];
  EXPECT_LE((diff - sp.scaled(t)).sup_norm(), 1e-15);
}

TEST(LInv, InvertsOnProjectedFields) {
  const auto& ws = fixture().ws;
  const auto PF = project(ws, bump(ws.grid(), 1.0, 2.0));
  const auto u = l_inv(ws, PF);
  const auto back = apply_multiplier(u, ws.l_symbol());
  EXPECT_LE((back - PF).sup_norm(), 1e-12 * PF.sup_norm());
  expect_code([&] { l_inv(ws, bump(ws.grid(), 0.3, 0.0)); }, ErrorCode::KernelResidue);
}

TEST(LInv, ResultDecaysForNarrowData) {
  // A narrow bump has sizeable content near K; the inverse must still be localized.
  const auto& ws = fixture().ws;
  for (double w : {0.25, 0.5}) {
    const auto u = l_inv(ws, project(ws, bump(ws.grid(), w, 5.0)));
    EXPECT_LE(std::abs(u[0]), 1e-12 * u.sup_norm()) << w;
  }
}

TEST(LInv, DesingularizedInverseIsBounded) {
  // ||L^-1 P F|| / ||F|| stays bounded for localized data of varying width.
  const auto& ws = fixture().ws;
  std::vector<double> ws_list{0.5, 1.0, 2.0}, norms;
  for (double w : ws_list) {
    const auto F = bump(ws.grid(), w, 0.0);
    norms.push_back(l_inv(ws, project(ws, F)).l2_norm() / F.l2_norm());
  }
  for (double n : norms) EXPECT_LT(n, 1.0 / std::abs(ws.params().gamma()) * 2.0);
}

TEST(SEps, RoundTripAndZero) {
  const auto& ws = fixture().ws;
  const auto r = bump(ws.grid(), 1.5, 1.0).scaled(1e-3);
  const SpectralField rhs(ws.grid(), ws.s_eps_apply(to_vec(r)));
  const auto x = s_eps_solve(ws, rhs);
  EXPECT_LE((x - r).sup_norm(), 1e-10 * r.sup_norm());
  EXPECT_EQ(s_eps_solve(ws, SpectralField::zeros(ws.grid())).sup_norm(), 0.0);
}

TEST(SEps, ApproachesS0) {
  const BondParams p(0.2);
  std::vector<double> eps{0.25, 0.2, 0.15}, gaps;
  for (double e : eps) {
    const BealeWorkspace ws(p, ScalingParams(p, e));
    const auto r = bump(ws.grid(), 2.0, 0.0);
    const SpectralField se(ws.grid(), ws.s_eps_apply(to_vec(r)));
    gaps.push_back((se - s0_apply(ws.sigma(), r)).l2_norm());
  }
  EXPECT_GE(loglog_slope(eps, gaps), 1.0);
}

TEST(Rhs, Decomposition) {
  const auto& f = fixture();
  const auto& ws = f.ws;
  auto wave = solve_periodic(f.p, f.s, 0.01);
  const auto R = bump(ws.grid(), 1.0, 0.0).scaled(1e-3);
  PeriodicWave flat = periodic_seed(f.p, f.s, 32);
  EXPECT_LE((assemble_rhs(ws, SpectralField::zeros(ws.grid()), flat) - ws.j0_field()).sup_norm(), 0.0);
  const auto G = assemble_rhs(ws, R, wave);
  const auto parts = ws.j0_field() + j1(R) + j2(ws, wave) + j3(ws, wave, R);
  EXPECT_LE((G - parts).sup_norm(), 1e-17);
  // J3 is bilinear in (a, R)
  const auto j3a = j3(ws, wave, R), j3b = j3(ws, wave, R.scaled(2.0));
  EXPECT_LE((j3b - j3a.scaled(2.0)).sup_norm(), 1e-18);
}

TEST(Rhs, RippleMismatchScalesWithAmplitudeSquared) {
  // J2 = -2 a sigma (Phi^a - Phi^0) with Phi^a - Phi^0 = O(a)
  const auto& f = fixture();
  std::vector<double> as{2e-3, 4e-3, 8e-3}, norms;
  for (double a : as) norms.push_back(j2(f.ws, solve_periodic(f.p, f.s, a)).l2_norm());
  EXPECT_NEAR(loglog_slope(as, norms), 2.0, 0.2);
}

TEST(Beale, ConvergedSolution) {
  const auto& sol = fixture().sol;
  EXPECT_LE(sol.residual, 1e-10);
  EXPECT_LT(sol.contraction, 1.0);
  EXPECT_LE(sol.contraction / (0.25 * 0.25), 1.0);
  EXPECT_TRUE(sol.R.is_even(1e-12));
  EXPECT_LE(std::abs(sol.R[0]), 1e-12 * sol.R.sup_norm());
  EXPECT_LE(std::abs(sol.a), 1e-10);
}

TEST(Beale, IsFixedPoint) {
  const auto& f = fixture();
  auto [R, a] = beale_step(f.ws, f.sol.R, f.sol.wave);
  EXPECT_LE((R - f.sol.R).sup_norm(), 1e-12);
  EXPECT_LE(std::abs(a - f.sol.a), 1e-12);
}

TEST(Beale, FirstIterateIsOrderEpsSquared) {
  const BondParams p(0.2);
  std::vector<double> eps{0.25, 0.2}, norms;
  for (double e : eps) {
    const BealeWorkspace ws(p, ScalingParams(p, e));
    auto [R1, a1] = beale_step(ws, SpectralField::zeros(ws.grid()), periodic_seed(p, ScalingParams(p, e), 32));
    norms.push_back(R1.l2_norm());
  }
  EXPECT_NEAR(loglog_slope(eps, norms), 2.0, 0.3);
}

TEST(Beale, MaxIterations) {
  BealeOptions o;
  o.max_iter = 2;
  expect_code([&] { beale_iterate(fixture().ws, o); }, ErrorCode::MaxIterations);
}

TEST(Beale, FullResidualOfAssembledWave) {
  const auto& f = fixture();
  const auto U = f.ws.sigma().field + f.sol.R;
  EXPECT_LE(full_residual(f.p, f.s, U), 1e-10);
}

TEST(Beale, PerturbedStartReconverges) {
  const auto& f = fixture();
  const auto seed = bump(f.ws.grid(), 0.4, 6.0).scaled(1e-3);
  const auto alt = beale_iterate(f.ws, {}, seed, 1e-3);
  EXPECT_LE((alt.R - f.sol.R).sup_norm() + std::abs(alt.a - f.sol.a), 1e-8);
}

TEST(Unscale, PhysicalProfile) {
  const auto& f = fixture();
  const auto prof = unscale(f.ws, f.sol);
  const int mid = f.ws.grid().size() / 2;
  const double e = 0.25;
  EXPECT_DOUBLE_EQ(prof.grid.half_length(), f.ws.grid().half_length() / e);
  EXPECT_NEAR(prof.w[mid], e * e * (f.ws.sigma().field[mid] + f.sol.R[mid] + f.sol.a * f.sol.wave.profile(0.0)), 1e-17);
  EXPECT_DOUBLE_EQ(prof.c, f.s.c());
  EXPECT_LE((prof.core + prof.ripple - prof.w).sup_norm(), 1e-17);
}

TEST(NewtonOracle, LeavesSolutionInPlace) {
  const auto& f = fixture();
  const auto r = newton_oracle(f.ws, f.sol);
  EXPECT_LE(r.moved, 1e-8);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(Ripple, PhysicalFrequencyIsModulationallyStable) {
  const auto& f = fixture();
  const double k = f.s.epsilon() * f.sol.wave.K;
  EXPECT_LE(std::abs(k - k_crit(f.p, f.s.c())), f.s.epsilon() * f.s.epsilon());
  EXPECT_GT(delta_mi(f.p, k), 0.0);
}
