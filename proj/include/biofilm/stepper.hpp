#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "biofilm/config.hpp"
#include "biofilm/kinetics.hpp"
#include "biofilm/state.hpp"

namespace biofilm {

/// sigma_a = sum_i v_a,i psi*_i / rho_i  [m/d]
double attachment_flux(std::span<const double> psi_star, const ScenarioConfig& cfg);

/// sigma_d = delta L^2  [m/d]
double detachment_flux(double L, double delta);

/// Composition of freshly attached biomass, v_a,i psi*_i / sum_k v_a,k psi*_k.
/// The last component is 1 minus the others so the sum is exactly one.
/// Throws NoAttachment when no species attaches.
std::vector<double> inflow_fractions(std::span<const double> psi_star, const ScenarioConfig& cfg);

/// u(zeta_k) = L * integral_0^zeta_k G d zeta (cumulative trapezoid), u(0) = 0.
std::vector<double> compute_velocity(double L, std::span<const double> G);

struct BoundaryUpdate {
  double L_next{0.0};
  bool floored{false};  ///< explicit Euler went negative and was reset to 0
};

/// Explicit Euler on dL/dt = u(L) + sigma_a - sigma_d.
BoundaryUpdate advance_boundary(double L, double u_L, double sigma_a, double sigma_d, double dt);

/// Largest stable transport step ignoring the safety factor: (L/N) / max|u - zeta dL/dt|,
/// with the relative velocity taken at nodes and at cell faces. Infinite when
/// there is no relative motion.
double transport_time_bound(double L, double L_dot, std::span<const double> u,
                            std::span<const double> G);

struct BiomassUpdate {
  Field f;
  double drift{0.0};             ///< max |sum f - 1| before renormalization
  std::size_t clamped_nodes{0};  ///< nodes where a negative fraction was reset to 0
  std::size_t front_width{0};    ///< nodes inside the widest partially-filled front
};

/// Transport of volume fractions over one step on the moving normalized
/// grid. Finite-volume form of
///   d(L f_i)/dt + d((u - zeta dL/dt) f_i)/dzeta = L (r_M,i + r_col,i)
/// with dual cells around nodes. Face values are blends of the upwind and
/// downwind values with a weight common to all species, chosen as large as
/// local-bound preservation allows (anti-diffusive) or zero (plain upwind).
/// In the attachment regime the interface node is then set to the inflow
/// fractions; in detachment it is an outflow cell. Finally fractions are
/// clamped at 0 and renormalized.
///
/// Throws CflViolation when dt exceeds cfl * transport_time_bound and the
/// composition is not uniform.
BiomassUpdate advance_biomass(const BiofilmState& state,
                              std::span<const kinetics::RateBundle> rates,
                              std::span<const double> u, double L_next, double dt,
                              Regime regime, std::span<const double> inflow,
                              const NumericsConfig& numerics);

/// Largest count of consecutive nodes where some species sits strictly
/// between 1e-10 and half its maximum, over species that vanish somewhere.
std::size_t front_width(const Field& f);

struct StepDiagnostics {
  double dt_used{0.0};
  double cfl_bound{std::numeric_limits<double>::infinity()};
  double sum_f_drift{0.0};
  Regime regime{Regime::Attachment};
  double sigma_a{0.0};
  double sigma_d{0.0};
  double u_L{0.0};
  std::size_t clamped_nodes{0};
  std::size_t front_width{0};
  bool boundary_floored{false};
  bool planktonic_under_resolved{false};
};

struct StepResult {
  BiofilmState state;
  StepDiagnostics diagnostics;
};

/// Elliptic solves, rates, velocity, boundary and biomass update for one
/// step of length min(dt_max, cfl * cfl_bound, dt_limit).
StepResult step(const BiofilmState& state, const ScenarioConfig& cfg,
                double dt_limit = std::numeric_limits<double>::infinity());

/// Re-solves S, Psi and u so they are consistent with the state's f and L.
BiofilmState refresh(const BiofilmState& state, const ScenarioConfig& cfg);

/// Snapshot of a state whose S, Psi and u are already consistent.
Snapshot make_snapshot(const BiofilmState& state, const ScenarioConfig& cfg);

struct BoundaryRow {
  double t{0.0};
  double L{0.0};
  double sigma_a{0.0};
  double sigma_d{0.0};
  double u_L{0.0};
  Regime regime{Regime::Attachment};
};

/// Velocity profile on the normalized grid at one instant; used to trace
/// characteristics after a run.
struct VelocitySample {
  double t{0.0};
  double L{0.0};
  std::vector<double> u;
};

struct RunOutput {
  std::vector<Snapshot> snapshots;
  std::vector<BoundaryRow> boundary;
  std::vector<VelocitySample> trace;
  std::size_t steps{0};
  double max_drift{0.0};
  std::size_t max_front_width{0};
  std::size_t under_resolved_steps{0};
};

struct RunOptions {
  bool record_trace{true};
};

/// Integrates from t = 0 to the horizon, landing exactly on every snapshot time.
RunOutput run(const ScenarioConfig& cfg, const RunOptions& options = {});

}  // namespace biofilm
