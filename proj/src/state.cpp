#include "biofilm/state.hpp"

#include <algorithm>
#include <cmath>

#include "biofilm/errors.hpp"
#include "biofilm/stepper.hpp"

namespace biofilm {

const char* to_string(Regime r) {
  return r == Regime::Attachment ? "attachment" : "detachment";
}

Regime classify_regime(double sigma_a, double sigma_d) {
  return sigma_a - sigma_d > 0.0 ? Regime::Attachment : Regime::Detachment;
}

std::vector<double> uniform_grid(std::size_t N) {
  std::vector<double> zeta(N + 1);
  for (std::size_t k = 0; k <= N; ++k) zeta[k] = static_cast<double>(k) / static_cast<double>(N);
  return zeta;
}

double constraint_drift(const Field& f) {
  if (f.empty()) return 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < f[0].size(); ++k) {
    double sum = 0.0;
    for (const auto& row : f) sum += row[k];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

BiofilmState initial_state(const ScenarioConfig& cfg) {
  const std::size_t N = cfg.numerics.N;
  const auto psi0 = cfg.bulk.psi_at(0.0);
  const auto s0 = cfg.bulk.s_at(0.0);
  if (!(attachment_flux(psi0, cfg) > 0.0))
    throw BiofilmError(ErrorKind::NoAttachment,
                       "no species attaches at t = 0; the biofilm cannot nucleate");
  const auto f0 = inflow_fractions(psi0, cfg);

  BiofilmState s;
  s.t = 0.0;
  s.L = cfg.numerics.L_eps;
  s.zeta = uniform_grid(N);
  for (double v : f0) s.f.emplace_back(N + 1, v);
  for (double v : s0) s.S.emplace_back(N + 1, v);
  for (double v : psi0) s.Psi.emplace_back(N + 1, v);
  s.u.assign(N + 1, 0.0);
  return s;
}

}  // namespace biofilm
