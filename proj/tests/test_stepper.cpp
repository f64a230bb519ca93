#include <doctest.h>

#include <cmath>

#include "biofilm/errors.hpp"
#include "biofilm/kinetics.hpp"
#include "biofilm/scenario.hpp"
#include "biofilm/stepper.hpp"
#include "support.hpp"

using namespace biofilm;

namespace {

std::vector<kinetics::RateBundle> bundles(std::size_t nodes, std::vector<double> r_M) {
  kinetics::RateBundle b;
  b.r_M = r_M;
  b.r_col.assign(r_M.size(), 0.0);
  b.r_S.assign(1, 0.0);
  b.r_Psi.assign(r_M.size(), 0.0);
  b.G = kinetics::source_G(b.r_M, b.r_col);
  return std::vector<kinetics::RateBundle>(nodes, b);
}

BiofilmState two_species_state(double L, std::size_t N) {
  auto cfg = test::two_species();
  cfg.numerics.N = N;
  auto s = initial_state(cfg);
  s.L = L;
  return s;
}

}  // namespace

TEST_CASE("attachment and detachment fluxes") {
  const auto cfg = build_preset("case1").cfg;
  const std::vector<double> psi{100.0, 100.0, 0.0};
  CHECK(attachment_flux(psi, cfg) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(attachment_flux(std::vector<double>{0, 0, 0}, cfg) == 0.0);
  const std::vector<double> tripled{300.0, 300.0, 0.0};
  CHECK(attachment_flux(tripled, cfg) == doctest::Approx(3.0 * attachment_flux(psi, cfg)).epsilon(1e-14));

  CHECK(detachment_flux(0.0, 2000.0) == 0.0);
  CHECK(detachment_flux(1e-3, 2000.0) == doctest::Approx(2e-3).epsilon(1e-14));
  CHECK(detachment_flux(0.5, 0.0) == 0.0);
}

TEST_CASE("inflow fractions") {
  const auto c1 = build_preset("case1").cfg;
  const auto a = inflow_fractions(std::vector<double>{100, 100, 0}, c1);
  CHECK(a == std::vector<double>{0.5, 0.5, 0.0});
  const auto c3 = build_preset("case3").cfg;
  const auto b = inflow_fractions(std::vector<double>{100, 100, 100}, c3);
  CHECK(b == std::vector<double>{0.5, 0.5, 0.0});
  const auto c = inflow_fractions(std::vector<double>{0, 50, 0}, c1);
  CHECK(c == std::vector<double>{0.0, 1.0, 0.0});
  const auto d = inflow_fractions(std::vector<double>{10, 20, 70}, c1);
  CHECK(d[0] + d[1] + d[2] == 1.0);
  CHECK_THROWS_AS(inflow_fractions(std::vector<double>{0, 0, 0}, c1), BiofilmError);
}

TEST_CASE("velocity quadrature") {
  const std::vector<double> g(11, 0.5);
  const auto u = compute_velocity(2e-4, g);
  for (std::size_t k = 0; k <= 10; ++k) CHECK(u[k] == doctest::Approx(0.5 * 2e-4 * k / 10.0).epsilon(1e-14));
  CHECK(compute_velocity(1.0, std::vector<double>(5, 0.0)) == std::vector<double>(5, 0.0));
  const auto v = compute_velocity(1e-4, std::vector<double>(201, 0.82302));
  CHECK(v.back() == doctest::Approx(8.2302e-5).epsilon(1e-12));
  CHECK(v.front() == 0.0);
  // Monotone for a non-negative source.
  std::vector<double> bumpy(21);
  for (std::size_t k = 0; k < bumpy.size(); ++k) bumpy[k] = std::abs(std::sin(0.7 * k));
  const auto w = compute_velocity(1.0, bumpy);
  for (std::size_t k = 1; k < w.size(); ++k) CHECK(w[k] >= w[k - 1]);
}

TEST_CASE("boundary update") {
  const auto a = advance_boundary(0.0, 0.0, 1e-3, 0.0, 1e-3);
  CHECK(a.L_next == doctest::Approx(1e-6).epsilon(1e-14));
  CHECK_FALSE(a.floored);
  CHECK(advance_boundary(5e-4, 0.0, 2e-3, 2e-3, 0.1).L_next == 5e-4);
  const auto b = advance_boundary(1e-6, 0.0, 0.0, 1.0, 1.0);
  CHECK(b.L_next == 0.0);
  CHECK(b.floored);
}

TEST_CASE("biomass transport") {
  NumericsConfig nm;
  SUBCASE("no motion and no reaction is the identity") {
    auto s = two_species_state(1e-4, 16);
    for (std::size_t k = 0; k <= 16; ++k) {
      s.f[0][k] = 0.2 + 0.03 * k;
      s.f[1][k] = 1.0 - s.f[0][k];
    }
    const auto rates = bundles(17, {0.0, 0.0});
    const std::vector<double> u(17, 0.0);
    const auto out = advance_biomass(s, rates, u, s.L, 0.01, Regime::Detachment, {}, nm);
    for (std::size_t i = 0; i < 2; ++i) CHECK(test::max_abs_diff(out.f[i], s.f[i]) <= 1e-15);
  }
  SUBCASE("homogeneous composition follows the local ODE") {
    auto s = two_species_state(1e-4, 16);
    const auto rates = bundles(17, {0.2 * 0.5, 0.6 * 0.5});
    const double G = rates[0].G;
    std::vector<double> Gs(17, G);
    const auto u = compute_velocity(s.L, Gs);
    const double dt = 0.01;
    const double L_next = s.L + dt * u.back();
    const auto out = advance_biomass(s, rates, u, L_next, dt, Regime::Detachment, {}, nm);
    for (std::size_t k = 0; k <= 16; ++k) {
      // Conservative update: L' f' = L (f + dt r), with L' = L (1 + dt G).
      CHECK(out.f[0][k] == doctest::Approx(0.501 / 1.004).epsilon(1e-12));
      // Hand Euler step of f' = r - f G.
      CHECK(std::abs(out.f[0][k] - 0.499) < 1e-5);
    }
    CHECK(out.drift < 1e-14);
  }
  SUBCASE("CFL violation for a non-uniform profile") {
    auto s = two_species_state(1e-4, 16);
    s.f[0][3] = 0.9;
    s.f[1][3] = 0.1;
    const auto rates = bundles(17, {0.0, 0.0});
    std::vector<double> u(17, 0.0);
    const double L_next = s.L + 1.0 * 1e-3;
    try {
      advance_biomass(s, rates, u, L_next, 1.0, Regime::Attachment, std::vector<double>{0.5, 0.5}, nm);
      FAIL("expected CflViolation");
    } catch (const BiofilmError& e) {
      CHECK(e.kind() == ErrorKind::CflViolation);
    }
  }
  SUBCASE("a uniform profile matching the inflow needs no CFL limit") {
    auto s = two_species_state(1e-9, 16);
    const auto rates = bundles(17, {0.0, 0.0});
    const std::vector<double> u(17, 0.0);
    const auto out = advance_biomass(s, rates, u, 1e-6, 1e-3, Regime::Attachment,
                                     std::vector<double>{0.5, 0.5}, nm);
    for (double v : out.f[0]) CHECK(v == 0.5);
  }
  SUBCASE("attachment feeds the interface and transport stays monotone") {
    auto s = two_species_state(1e-4, 20);
    const auto rates = bundles(21, {0.0, 0.0});
    const std::vector<double> u(21, 0.0);
    const std::vector<double> inflow{0.0, 1.0};
    BiofilmState cur = s;
    for (int it = 0; it < 40; ++it) {
      const double dt = 0.5 * transport_time_bound(cur.L, 1e-3, u, std::vector<double>(21, 0.0));
      const double L_next = cur.L + dt * 1e-3;
      auto out = advance_biomass(cur, rates, u, L_next, dt, Regime::Attachment, inflow, nm);
      CHECK(out.f[1].back() == 1.0);
      for (std::size_t k = 0; k <= 20; ++k) {
        CHECK(out.f[0][k] >= 0.0);
        CHECK(out.f[0][k] <= 0.5 + 1e-15);
      }
      cur.f = out.f;
      cur.L = L_next;
    }
    // The front has entered from the interface but not reached the substratum.
    CHECK(cur.f[0].front() == 0.5);
    CHECK(cur.f[0][19] < 1e-3);
  }
  SUBCASE("finite-volume mass balance in outflow") {
    auto s = two_species_state(2e-4, 32);
    for (std::size_t k = 0; k <= 32; ++k) {
      s.f[0][k] = 0.5 + 0.4 * std::sin(0.3 * k);
      s.f[1][k] = 1.0 - s.f[0][k];
    }
    std::vector<kinetics::RateBundle> rates;
    std::vector<double> G(33);
    for (std::size_t k = 0; k <= 32; ++k) {
      kinetics::RateBundle b;
      b.r_M = {0.3 * s.f[0][k], 0.1 * s.f[1][k]};
      b.r_col = {0.0, 0.0};
      b.G = kinetics::source_G(b.r_M, b.r_col);
      G[k] = b.G;
      rates.push_back(b);
    }
    const auto u = compute_velocity(s.L, G);
    const double L_dot = u.back() - 2e-5;  // net detachment
    const double dt = 0.4 * transport_time_bound(s.L, L_dot, u, G);
    const double L_next = s.L + dt * L_dot;
    for (auto scheme : {TransportScheme::Upwind, TransportScheme::AntiDiffusive}) {
      nm.transport = scheme;
      const auto out = advance_biomass(s, rates, u, L_next, dt, Regime::Detachment, {}, nm);
      REQUIRE(out.clamped_nodes == 0);
      const double h = 1.0 / 32.0;
      auto width = [&](std::size_t k) { return (k == 0 || k == 32) ? 0.5 * h : h; };
      for (std::size_t i = 0; i < 2; ++i) {
        double before = 0.0, after = 0.0, source = 0.0;
        for (std::size_t k = 0; k <= 32; ++k) {
          before += s.L * width(k) * s.f[i][k];
          after += L_next * width(k) * out.f[i][k];
          source += dt * s.L * width(k) * rates[k].r_M[i];
        }
        const double outflow = dt * (u.back() - L_dot) * s.f[i].back();
        CHECK(after == doctest::Approx(before + source - outflow).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("front width") {
  Field f{{0, 0, 0.1, 0.2, 0.6, 1.0}, {1, 1, 0.9, 0.8, 0.4, 0.0}};
  CHECK(front_width(f) == 2);
  Field flat{{0.5, 0.5}, {0.5, 0.5}};
  CHECK(front_width(flat) == 0);
}

TEST_CASE("nucleation step") {
  auto cfg = build_preset("case1").cfg;
  cfg.numerics.dt_max = 1e-4;
  const auto s0 = initial_state(cfg);
  const auto res = step(s0, cfg);
  CHECK(res.diagnostics.dt_used == 1e-4);
  CHECK(res.state.L == doctest::Approx(1e-3 * 1e-4 + 1e-9).epsilon(1e-6));
  CHECK(res.state.t == 1e-4);
  // Uniform film: L1 f1 = L0 (f1 + dt (r1 - f1 G)) + dt L_dot f1 with L_dot = L0 G + sigma_a.
  const double r1 = 0.4 * (100.0 / 101.0) * 0.5;
  const double G = r1 + 1.5 * (100.0 / 120.0) * 0.5;
  const double L0 = cfg.numerics.L_eps;
  const double L1 = L0 * (1.0 + 1e-4 * G) + 1e-4 * 1e-3;
  const double expected = 0.5 + 1e-4 * (L0 / L1) * (r1 - 0.5 * G);
  for (std::size_t k = 0; k + 1 < res.state.nodes(); ++k) {
    CHECK(std::abs(res.state.f[0][k] - expected) < 1e-10);
    CHECK(res.state.f[2][k] == 0.0);
  }
  CHECK(res.state.f[0].back() == 0.5);
  CHECK(res.state.f[2].back() == 0.0);
  CHECK(res.diagnostics.regime == Regime::Attachment);
}

TEST_CASE("Euler consistency of the boundary") {
  auto cfg = build_preset("case1").cfg;
  cfg.numerics.N = 40;
  cfg.numerics.dt_max = 1e-3;
  auto s = initial_state(cfg);
  // Grow to a resolved film first.
  while (s.t < 0.05) s = step(s, cfg).state;
  const double dt = 2e-5;
  const auto one = step(s, cfg, 2.0 * dt).state;
  const auto half = step(step(s, cfg, dt).state, cfg, dt).state;
  REQUIRE(one.t == doctest::Approx(half.t).epsilon(1e-12));
  CHECK(std::abs(one.L - half.L) <= 10.0 * dt * dt * 1.0);
  CHECK(std::abs(one.L - half.L) <= 1e-3 * (one.L - s.L));
}

TEST_CASE("run schedule and invariants") {
  SUBCASE("horizon zero") {
    auto cfg = build_preset("case1").cfg;
    cfg.horizon = 0.0;
    cfg.snapshot_times = {0.0};
    const auto out = run(cfg);
    REQUIRE(out.snapshots.size() == 1);
    CHECK(out.snapshots[0].state == initial_state(cfg));
    CHECK(out.steps == 0);
  }
  SUBCASE("snapshots land exactly and stay admissible") {
    auto cfg = build_preset("case2").cfg;
    cfg.numerics.N = 40;
    cfg.horizon = 0.3;
    cfg.snapshot_times = {0.0, 0.1, 0.25, 0.3};
    const auto out = run(cfg);
    REQUIRE(out.snapshots.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(out.snapshots[k].state.t == cfg.snapshot_times[k]);
    for (const auto& snap : out.snapshots) {
      CHECK(constraint_drift(snap.state.f) <= kConstraintTol);
      for (const auto* field : {&snap.state.f, &snap.state.S, &snap.state.Psi})
        for (const auto& row : *field)
          for (double v : row) CHECK(v >= 0.0);
      CHECK(snap.state.u.front() == 0.0);
      CHECK(snap.regime == classify_regime(snap.sigma_a, snap.sigma_d));
    }
    CHECK(out.max_drift <= 1e-12);
    CHECK(out.boundary.back().t == 0.3);
    const auto again = run(cfg);
    CHECK(again.snapshots.back().state == out.snapshots.back().state);
  }
  SUBCASE("errors carry the failing time") {
    auto cfg = build_preset("case1").cfg;
    cfg.numerics.N = 16;
    cfg.numerics.newton_max_iter = 1;
    cfg.numerics.newton_tol = 1e-300;
    cfg.horizon = 0.05;
    cfg.snapshot_times = {};
    try {
      run(cfg);
      FAIL("expected a solver error");
    } catch (const BiofilmError& e) {
      CHECK(e.kind() == ErrorKind::NonConvergence);
      CHECK(std::string(e.what()).find("at t =") != std::string::npos);
    }
  }
}

TEST_CASE("long run reaches a steady thickness") {
  auto cfg = build_preset("case1").cfg;
  cfg.numerics.N = 100;
  const auto out = run(cfg, RunOptions{false});
  const auto& last = out.snapshots.back();
  CHECK(last.regime == Regime::Detachment);
  const double L_dot = last.u_L + last.sigma_a - last.sigma_d;
  CHECK(std::abs(L_dot) * cfg.numerics.dt_max / last.state.L < 1e-4);
}
