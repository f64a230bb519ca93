#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "biofilm/config.hpp"

namespace biofilm::kinetics {

/// s/(K+s); negative s is treated as 0.
double monod(double s, double K);

/// d monod / ds, zero for s < 0.
double monod_slope(double s, double K);

/// Reaction rates at one point. All outputs are per-species or
/// per-substrate vectors in the order of the config.
struct RateBundle {
  std::vector<double> r_M;    ///< sessile growth [1/d]
  std::vector<double> r_col;  ///< colonization [1/d]
  std::vector<double> r_S;    ///< substrate conversion [g/m^3/d]
  std::vector<double> r_Psi;  ///< planktonic conversion [g/m^3/d]
  double G{0.0};              ///< velocity source sum_i (r_M,i + r_col,i) [1/d]
  bool clamped{false};        ///< a negative concentration was read as 0
};

std::vector<double> growth_rates(std::span<const double> f, std::span<const double> S,
                                 const ScenarioConfig& cfg);

/// r_S,j = sum_i coeffs[j][i] rho_i r_M,i / Y_i.
std::vector<double> substrate_rates(std::span<const double> r_M, const ScenarioConfig& cfg);
std::vector<double> substrate_rates(std::span<const double> f, std::span<const double> S,
                                    const ScenarioConfig& cfg);

std::vector<double> colonization_rates(std::span<const double> Psi, std::span<const double> S,
                                       const ScenarioConfig& cfg);

/// r_Psi,i = -(rho_i / Y_psi,i) r_i.
std::vector<double> planktonic_conversion_rates(std::span<const double> r_col,
                                                const ScenarioConfig& cfg);
std::vector<double> planktonic_conversion_rates(std::span<const double> Psi,
                                                std::span<const double> S,
                                                const ScenarioConfig& cfg);

/// Left-to-right sum of r_M,i + r_col,i.
double source_G(std::span<const double> r_M, std::span<const double> r_col);
double source_G(std::span<const double> f, std::span<const double> S,
                std::span<const double> Psi, const ScenarioConfig& cfg);

RateBundle evaluate(std::span<const double> f, std::span<const double> S,
                    std::span<const double> Psi, const ScenarioConfig& cfg);

/// Linear screening coefficient kappa_i(S) with r_Psi,i = -kappa_i * Psi_i.
double planktonic_sink_coefficient(std::size_t species, std::span<const double> S,
                                   const ScenarioConfig& cfg);

/// d r_S,j / d S_j at fixed f and other substrates; used by the Newton Jacobian.
double substrate_rate_slope(std::size_t substrate, std::span<const double> f,
                            std::span<const double> S, const ScenarioConfig& cfg);

}  // namespace biofilm::kinetics
