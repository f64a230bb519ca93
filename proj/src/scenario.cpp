#include "biofilm/scenario.hpp"

#include <cmath>
#include <cstdio>

#include "biofilm/errors.hpp"

namespace biofilm {

double psi3_ramp(double t, double t1, double psi30, RampVariant variant) {
  if (t <= t1) return 0.0;
  const double x = std::pow(t - t1, 10.0);
  const double d = variant == RampVariant::Printed ? std::pow(t1, 10.0 / t1) : std::pow(t1, 10.0);
  if (std::isinf(x)) return psi30;
  // Written as psi30 / (1 + d/x) so the rounded value never decreases in t.
  return psi30 / (1.0 + d / x);
}

const std::vector<std::string>& preset_ids() {
  static const std::vector<std::string> ids{"case1", "case2", "case3"};
  return ids;
}

CasePreset build_preset(const std::string& id, double t1, RampVariant variant) {
  if (id != "case1" && id != "case2" && id != "case3")
    throw BiofilmError(ErrorKind::UnknownPreset, "unknown preset '" + id + "'");
  if (!(t1 > 0.0)) throw BiofilmError(ErrorKind::InvalidConfig, "t1 must be > 0");

  CasePreset p;
  p.id = id;
  auto& cfg = p.cfg;

  const double mu[3] = {0.4, 1.5, 0.5};
  const double K[3] = {1.0, 20.0, 1.0};
  const double Y[3] = {0.4, 0.9, 0.9};
  const bool colonizing = id != "case1";
  for (int i = 0; i < 3; ++i) {
    SpeciesParams sp;
    sp.mu_max = mu[i];
    sp.K = K[i];
    sp.Y = Y[i];
    sp.rho = 5000.0;
    sp.v_a = 0.025;
    sp.k_col = colonizing ? 2.5 : 0.0;
    sp.Y_psi = 2e-7;
    sp.D_psi = 1e-5;
    cfg.species.push_back(sp);
  }
  if (id == "case3") cfg.species[2].v_a = 0.0;
  cfg.substrates.assign(3, SubstrateParams{1e-5});
  cfg.delta = 2000.0;
  cfg.stoichiometry = Stoichiometry::builtin3();

  cfg.bulk.psi_star = {TraceDescriptor::constant(100.0), TraceDescriptor::constant(100.0),
                       TraceDescriptor::ramp(t1, 100.0, variant)};
  cfg.bulk.s_star = {TraceDescriptor::constant(100.0), TraceDescriptor::constant(100.0),
                     TraceDescriptor::constant(0.0)};

  cfg.horizon = 10.0;
  cfg.snapshot_times = {0.25, 0.5, 1.0, 10.0};

  char buf[96];
  std::snprintf(buf, sizeof buf, "t1 = %g d is an assumed arrival time for species 3", t1);
  p.notes.emplace_back(buf);
  p.notes.emplace_back(variant == RampVariant::Printed
                           ? "ramp denominator uses t1^(10/t1) as printed"
                           : "ramp denominator uses the corrected t1^10");
  p.notes.emplace_back("bulk liquid is an infinite reservoir");
  p.notes.emplace_back("detachment sigma_d = delta L^2 active throughout the run");
  if (!colonizing) p.notes.emplace_back("colonization disabled (k_col = 0)");
  cfg.notes = p.notes;
  return p;
}

}  // namespace biofilm
