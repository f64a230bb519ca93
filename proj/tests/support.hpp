#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "biofilm/config.hpp"
#include "biofilm/elliptic.hpp"
#include "biofilm/scenario.hpp"
#include "biofilm/state.hpp"

namespace biofilm::test {

/// Two species on one substrate, both attaching; small enough for hand checks.
inline ScenarioConfig two_species(double psi1 = 100.0, double psi2 = 100.0) {
  ScenarioConfig cfg;
  SpeciesParams a;
  a.mu_max = 0.4;
  a.K = 1.0;
  a.Y = 0.4;
  a.rho = 5000.0;
  a.v_a = 0.025;
  a.Y_psi = 2e-7;
  a.D_psi = 1e-5;
  SpeciesParams b = a;
  b.mu_max = 1.5;
  b.K = 20.0;
  b.Y = 0.9;
  cfg.species = {a, b};
  cfg.substrates = {SubstrateParams{1e-5}};
  cfg.delta = 0.0;
  cfg.bulk.psi_star = {TraceDescriptor::constant(psi1), TraceDescriptor::constant(psi2)};
  cfg.bulk.s_star = {TraceDescriptor::constant(100.0)};
  cfg.stoichiometry.kind = Stoichiometry::Kind::Matrix;
  cfg.stoichiometry.growth_substrate = {0, 0};
  cfg.stoichiometry.coeffs = {{-1.0, -1.0}};
  cfg.numerics.N = 16;
  cfg.horizon = 0.1;
  return cfg;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

/// Max nodal error of the discrete solve of -D v'' = -q (constant sink)
/// against S* - (q L^2 / 2D)(1 - zeta^2), divided by S*.
inline double quadratic_error(std::size_t N, double q = 100.0, double L = 1e-3, double D = 1e-5,
                              double S_star = 100.0) {
  elliptic::EllipticProblem p;
  p.D = D;
  p.L = L;
  p.N = N;
  p.dirichlet_value = S_star;
  p.reaction = [q](std::size_t, double) { return elliptic::LocalRate{-q, 0.0}; };
  const auto sol = elliptic::solve(p, elliptic::NewtonControls{1e-13, 50, 30});
  double err = 0.0;
  for (std::size_t k = 0; k <= N; ++k) {
    const double zeta = static_cast<double>(k) / static_cast<double>(N);
    const double exact = S_star - q * L * L / (2.0 * D) * (1.0 - zeta * zeta);
    err = std::max(err, std::abs(sol.values[k] - exact));
  }
  return err / S_star;
}

/// Max nodal error of the linear screening solve -D v'' = -k v against
/// psi* cosh(z / w) / cosh(L / w), w = sqrt(D / k), divided by psi*.
inline double cosh_error(std::size_t N, double k = 1.25e7 * 100.0 / 101.0, double L = 1e-4,
                         double D = 1e-5, double psi_star = 100.0) {
  elliptic::EllipticProblem p;
  p.D = D;
  p.L = L;
  p.N = N;
  p.dirichlet_value = psi_star;
  p.linear_in_unknown = true;
  p.reaction = [k](std::size_t, double v) { return elliptic::LocalRate{-k * v, -k}; };
  const std::vector<double> zero(N + 1, 0.0);
  const auto sol = elliptic::solve(p, elliptic::NewtonControls{1e-9, 1, 0}, zero);
  const double w = std::sqrt(D / k);
  double err = 0.0;
  for (std::size_t j = 0; j <= N; ++j) {
    const double z = L * static_cast<double>(j) / static_cast<double>(N);
    // cosh(z/w)/cosh(L/w) written with exponentials of non-positive arguments.
    const double exact =
        psi_star * (std::exp((z - L) / w) + std::exp(-(z + L) / w)) / (1.0 + std::exp(-2.0 * L / w));
    err = std::max(err, std::abs(sol.values[j] - exact));
  }
  return err / psi_star;
}

}  // namespace biofilm::test
