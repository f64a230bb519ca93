#include "biofilm/kinetics.hpp"

#include <algorithm>

namespace biofilm::kinetics {

double monod(double s, double K) {
  const double c = std::max(s, 0.0);
  return c / (K + c);
}

double monod_slope(double s, double K) {
  if (s < 0.0) return 0.0;
  const double d = K + s;
  return K / (d * d);
}

std::vector<double> growth_rates(std::span<const double> f, std::span<const double> S,
                                 const ScenarioConfig& cfg) {
  const auto& st = cfg.stoichiometry;
  std::vector<double> r(cfg.n_species());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& sp = cfg.species[i];
    r[i] = sp.mu_max * monod(S[st.growth_substrate[i]], sp.K) * std::max(f[i], 0.0);
  }
  return r;
}

std::vector<double> substrate_rates(std::span<const double> r_M, const ScenarioConfig& cfg) {
  const auto& coeffs = cfg.stoichiometry.coeffs;
  std::vector<double> r(cfg.n_substrates(), 0.0);
  for (std::size_t j = 0; j < r.size(); ++j)
    for (std::size_t i = 0; i < r_M.size(); ++i) {
      const double c = coeffs[j][i];
      if (c != 0.0) r[j] += c * r_M[i] / cfg.species[i].Y * cfg.species[i].rho;
    }
  return r;
}

std::vector<double> substrate_rates(std::span<const double> f, std::span<const double> S,
                                    const ScenarioConfig& cfg) {
  const auto r_M = growth_rates(f, S, cfg);
  return substrate_rates(r_M, cfg);
}

std::vector<double> colonization_rates(std::span<const double> Psi, std::span<const double> S,
                                       const ScenarioConfig& cfg) {
  const auto& st = cfg.stoichiometry;
  std::vector<double> r(cfg.n_species());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& sp = cfg.species[i];
    r[i] = sp.k_col / sp.rho * monod(S[st.growth_substrate[i]], sp.K) * std::max(Psi[i], 0.0);
  }
  return r;
}

std::vector<double> planktonic_conversion_rates(std::span<const double> r_col,
                                                const ScenarioConfig& cfg) {
  std::vector<double> r(r_col.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = -(cfg.species[i].rho / cfg.species[i].Y_psi) * r_col[i];
  return r;
}

std::vector<double> planktonic_conversion_rates(std::span<const double> Psi,
                                                std::span<const double> S,
                                                const ScenarioConfig& cfg) {
  const auto r_col = colonization_rates(Psi, S, cfg);
  return planktonic_conversion_rates(r_col, cfg);
}

double source_G(std::span<const double> r_M, std::span<const double> r_col) {
  double G = 0.0;
  for (std::size_t i = 0; i < r_M.size(); ++i) G += r_M[i] + r_col[i];
  return G;
}

double source_G(std::span<const double> f, std::span<const double> S,
                std::span<const double> Psi, const ScenarioConfig& cfg) {
  const auto r_M = growth_rates(f, S, cfg);
  const auto r_col = colonization_rates(Psi, S, cfg);
  return source_G(r_M, r_col);
}

RateBundle evaluate(std::span<const double> f, std::span<const double> S,
                    std::span<const double> Psi, const ScenarioConfig& cfg) {
  RateBundle b;
  b.r_M = growth_rates(f, S, cfg);
  b.r_col = colonization_rates(Psi, S, cfg);
  b.r_S = substrate_rates(b.r_M, cfg);
  b.r_Psi = planktonic_conversion_rates(b.r_col, cfg);
  b.G = source_G(b.r_M, b.r_col);
  auto negative = [](double v) { return v < 0.0; };
  b.clamped = std::any_of(f.begin(), f.end(), negative) ||
              std::any_of(S.begin(), S.end(), negative) ||
              std::any_of(Psi.begin(), Psi.end(), negative);
  return b;
}

double planktonic_sink_coefficient(std::size_t species, std::span<const double> S,
                                   const ScenarioConfig& cfg) {
  const auto& sp = cfg.species[species];
  const double m = monod(S[cfg.stoichiometry.growth_substrate[species]], sp.K);
  return sp.rho / sp.Y_psi * (sp.k_col / sp.rho) * m;
}

double substrate_rate_slope(std::size_t substrate, std::span<const double> f,
                            std::span<const double> S, const ScenarioConfig& cfg) {
  const auto& st = cfg.stoichiometry;
  double slope = 0.0;
  for (std::size_t i = 0; i < cfg.n_species(); ++i) {
    if (st.growth_substrate[i] != substrate) continue;
    const double c = st.coeffs[substrate][i];
    if (c == 0.0) continue;
    const auto& sp = cfg.species[i];
    slope += c * sp.rho / sp.Y * sp.mu_max * monod_slope(S[substrate], sp.K) *
             std::max(f[i], 0.0);
  }
  return slope;
}

}  // namespace biofilm::kinetics
