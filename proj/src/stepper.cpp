#include "biofilm/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "biofilm/elliptic.hpp"
#include "biofilm/errors.hpp"

namespace biofilm {

double attachment_flux(std::span<const double> psi_star, const ScenarioConfig& cfg) {
  double sigma = 0.0;
  for (std::size_t i = 0; i < psi_star.size(); ++i)
    sigma += cfg.species[i].v_a * psi_star[i] / cfg.species[i].rho;
  return sigma;
}

double detachment_flux(double L, double delta) { return delta * L * L; }

std::vector<double> inflow_fractions(std::span<const double> psi_star, const ScenarioConfig& cfg) {
  const std::size_t n = psi_star.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cfg.species[i].v_a * psi_star[i];
  if (!(total > 0.0))
    throw BiofilmError(ErrorKind::NoAttachment, "attachment flux vanishes; no inflow composition");
  std::vector<double> f(n);
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    f[i] = cfg.species[i].v_a * psi_star[i] / total;
    partial += f[i];
  }
  f[n - 1] = 1.0 - partial;
  return f;
}

std::vector<double> compute_velocity(double L, std::span<const double> G) {
  const std::size_t N = G.size() - 1;
  const double dz = 1.0 / static_cast<double>(N);
  std::vector<double> u(N + 1);
  u[0] = 0.0;
  for (std::size_t k = 1; k <= N; ++k) u[k] = u[k - 1] + 0.5 * L * dz * (G[k - 1] + G[k]);
  return u;
}

BoundaryUpdate advance_boundary(double L, double u_L, double sigma_a, double sigma_d, double dt) {
  BoundaryUpdate b;
  b.L_next = L + dt * (u_L + sigma_a - sigma_d);
  if (b.L_next < 0.0) {
    b.L_next = 0.0;
    b.floored = true;
  }
  return b;
}

namespace {

// Relative (grid-frame) velocity at the right face of each dual cell; the
// last entry is the interface zeta = 1.
std::vector<double> face_velocities(double L, double L_dot, std::span<const double> u,
                                    std::span<const double> G) {
  const std::size_t N = u.size() - 1;
  const double dz = 1.0 / static_cast<double>(N);
  std::vector<double> w(N + 1);
  for (std::size_t j = 0; j < N; ++j) {
    const double u_face = u[j] + 0.5 * L * dz * G[j];
    w[j] = u_face - (static_cast<double>(j) + 0.5) * dz * L_dot;
  }
  w[N] = u[N] - L_dot;
  return w;
}

bool transport_is_trivial(const Field& f, Regime regime, std::span<const double> inflow) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f[i][0];
    if (std::any_of(f[i].begin(), f[i].end(), [v](double x) { return x != v; })) return false;
    if (regime == Regime::Attachment && !inflow.empty() && inflow[i] != v) return false;
  }
  return true;
}

}  // namespace

double transport_time_bound(double L, double L_dot, std::span<const double> u,
                            std::span<const double> G) {
  const std::size_t N = u.size() - 1;
  const double dz = 1.0 / static_cast<double>(N);
  double vmax = 0.0;
  for (std::size_t k = 0; k <= N; ++k)
    vmax = std::max(vmax, std::abs(u[k] - static_cast<double>(k) * dz * L_dot));
  for (double w : face_velocities(L, L_dot, u, G)) vmax = std::max(vmax, std::abs(w));
  if (vmax == 0.0) return std::numeric_limits<double>::infinity();
  return (L / static_cast<double>(N)) / vmax;
}

std::size_t front_width(const Field& f) {
  constexpr double kZero = 1e-10;
  std::size_t widest = 0;
  for (const auto& row : f) {
    const double mx = *std::max_element(row.begin(), row.end());
    const double mn = *std::min_element(row.begin(), row.end());
    if (mn > kZero || mx <= kZero) continue;
    std::size_t run = 0;
    for (double v : row) {
      if (v > kZero && v < 0.5 * mx) {
        widest = std::max(widest, ++run);
      } else {
        run = 0;
      }
    }
  }
  return widest;
}

BiomassUpdate advance_biomass(const BiofilmState& state,
                              std::span<const kinetics::RateBundle> rates,
                              std::span<const double> u, double L_next, double dt,
                              Regime regime, std::span<const double> inflow,
                              const NumericsConfig& numerics) {
  const std::size_t n = state.f.size();
  const std::size_t N = state.intervals();
  const double dz = 1.0 / static_cast<double>(N);
  const double L = state.L;
  const Field& f = state.f;

  BiomassUpdate out;
  if (L_next <= 0.0) {
    out.f = f;
    return out;
  }

  std::vector<double> G(N + 1);
  for (std::size_t k = 0; k <= N; ++k) G[k] = rates[k].G;
  const double L_dot = (L_next - L) / dt;

  const bool trivial = transport_is_trivial(f, regime, inflow);
  if (!trivial) {
    const double bound = transport_time_bound(L, L_dot, u, G);
    if (dt > numerics.cfl * bound * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "dt = " << dt << " exceeds cfl * bound = " << numerics.cfl * bound;
      throw BiofilmError(ErrorKind::CflViolation, os.str());
    }
  }

  const auto w = face_velocities(L, L_dot, u, G);
  auto cell_width = [&](std::size_t k) { return (k == 0 || k == N) ? 0.5 * dz : dz; };
  const bool has_inflow = !inflow.empty();
  auto boundary_value = [&](std::size_t i) { return has_inflow ? inflow[i] : f[i][N]; };

  // Face values: face j is the right face of cell j; face N is zeta = 1.
  Field F(N + 1, std::vector<double>(n, 0.0));
  const bool anti = numerics.transport == TransportScheme::AntiDiffusive;
  for (std::size_t j = 0; j < N; ++j) {
    if (w[j] == 0.0) continue;
    const bool rightward = w[j] > 0.0;
    const std::size_t up = rightward ? j : j + 1;
    const std::size_t down = rightward ? j + 1 : j;

    double theta = 0.0;
    if (anti) {
      // Inflow into the upwind cell through its other face.
      bool fed = false;
      double w_in = 0.0;
      if (rightward && j > 0 && w[j - 1] > 0.0) {
        fed = true;
        w_in = w[j - 1];
      } else if (!rightward && w[j + 1] < 0.0) {
        fed = true;
        w_in = -w[j + 1];
      }
      if (fed) {
        const double vol_next = L_next * cell_width(up);
        const double nu_out = dt * std::abs(w[j]) / vol_next;
        const double nu_in = dt * w_in / vol_next;
        theta = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double fu = f[i][up];
          const double fd = f[i][down];
          const double fn = rightward ? f[i][j - 1] : (j + 1 == N ? boundary_value(i) : f[i][j + 2]);
          const double lo_nb = std::min(fu, fn);
          const double hi_nb = std::max(fu, fn);
          const double slack = (1.0 - nu_in) / nu_out;
          const double d = fd - fu;
          double limit = 1.0;
          if (d > 0.0) limit = (fu - lo_nb) * slack / d;
          else if (d < 0.0) limit = (hi_nb - fu) * slack / (-d);
          theta = std::min(theta, limit);
        }
        theta = std::clamp(theta, 0.0, 1.0);
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      F[j][i] = f[i][up] + theta * (f[i][down] - f[i][up]);
  }
  for (std::size_t i = 0; i < n; ++i)
    F[N][i] = w[N] < 0.0 ? boundary_value(i) : f[i][N];

  out.f.assign(n, std::vector<double>(N + 1));
  for (std::size_t k = 0; k <= N; ++k) {
    const double vol = L * cell_width(k);
    const double vol_next = L_next * cell_width(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double in_left = k == 0 ? 0.0 : w[k - 1] * F[k - 1][i];
      const double out_right = w[k] * F[k][i];
      const double source = rates[k].r_M[i] + rates[k].r_col[i];
      out.f[i][k] = (vol * f[i][k] + dt * (in_left - out_right) + dt * vol * source) / vol_next;
    }
  }
  if (regime == Regime::Attachment && has_inflow)
    for (std::size_t i = 0; i < n; ++i) out.f[i][N] = inflow[i];

  out.drift = constraint_drift(out.f);
  for (std::size_t k = 0; k <= N; ++k) {
    bool clamped = false;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out.f[i][k] < 0.0) {
        out.f[i][k] = 0.0;
        clamped = true;
      }
      sum += out.f[i][k];
    }
    if (clamped) ++out.clamped_nodes;
    if (sum > 0.0)
      for (std::size_t i = 0; i < n; ++i) out.f[i][k] /= sum;
  }
  out.front_width = front_width(out.f);
  return out;
}

namespace {

std::vector<kinetics::RateBundle> node_rates(const BiofilmState& s, const ScenarioConfig& cfg) {
  const std::size_t n = cfg.n_species();
  const std::size_t m = cfg.n_substrates();
  std::vector<kinetics::RateBundle> rates;
  rates.reserve(s.nodes());
  std::vector<double> fk(n), Sk(m), Pk(n);
  for (std::size_t k = 0; k < s.nodes(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      fk[i] = s.f[i][k];
      Pk[i] = s.Psi[i][k];
    }
    for (std::size_t j = 0; j < m; ++j) Sk[j] = s.S[j][k];
    rates.push_back(kinetics::evaluate(fk, Sk, Pk, cfg));
  }
  return rates;
}

std::vector<double> G_of(std::span<const kinetics::RateBundle> rates) {
  std::vector<double> G;
  G.reserve(rates.size());
  for (const auto& r : rates) G.push_back(r.G);
  return G;
}

bool finite_field(const Field& f) {
  for (const auto& row : f)
    for (double v : row)
      if (!std::isfinite(v)) return false;
  return true;
}

std::vector<double> inflow_or_empty(double t, const ScenarioConfig& cfg) {
  const auto psi = cfg.bulk.psi_at(t);
  if (!(attachment_flux(psi, cfg) > 0.0)) return {};
  return inflow_fractions(psi, cfg);
}

}  // namespace

BiofilmState refresh(const BiofilmState& state, const ScenarioConfig& cfg) {
  BiofilmState s = state;
  if (!(s.L > 0.0)) return s;
  s.S = elliptic::solve_substrates(s, cfg);
  s.Psi = elliptic::solve_planktonic(s, cfg).Psi;
  const auto rates = node_rates(s, cfg);
  s.u = compute_velocity(s.L, G_of(rates));
  return s;
}

Snapshot make_snapshot(const BiofilmState& state, const ScenarioConfig& cfg) {
  Snapshot snap;
  snap.state = state;
  snap.sigma_a = attachment_flux(cfg.bulk.psi_at(state.t), cfg);
  snap.sigma_d = detachment_flux(state.L, cfg.delta);
  snap.u_L = state.u.back();
  snap.regime = classify_regime(snap.sigma_a, snap.sigma_d);
  return snap;
}

StepResult step(const BiofilmState& state, const ScenarioConfig& cfg, double dt_limit) {
  const auto& nm = cfg.numerics;
  StepResult res;
  auto& diag = res.diagnostics;

  diag.sigma_a = attachment_flux(cfg.bulk.psi_at(state.t), cfg);
  diag.sigma_d = detachment_flux(state.L, cfg.delta);
  diag.regime = classify_regime(diag.sigma_a, diag.sigma_d);

  BiofilmState work = state;
  work.S = elliptic::solve_substrates(state, cfg);
  auto plank = elliptic::solve_planktonic(work, cfg);
  work.Psi = std::move(plank.Psi);
  diag.planktonic_under_resolved = !plank.under_resolved.empty();

  const auto rates = node_rates(work, cfg);
  const auto G = G_of(rates);
  work.u = compute_velocity(work.L, G);
  diag.u_L = work.u.back();
  for (const auto& r : rates)
    if (r.clamped) ++diag.clamped_nodes;

  const double L_dot = diag.u_L + diag.sigma_a - diag.sigma_d;
  diag.cfl_bound = transport_time_bound(work.L, L_dot, work.u, G);

  double dt = std::min(nm.dt_max, dt_limit);
  auto inflow = inflow_or_empty(state.t + dt, cfg);
  if (!transport_is_trivial(work.f, diag.regime, inflow)) {
    dt = std::min(dt, nm.cfl * diag.cfl_bound);
    inflow = inflow_or_empty(state.t + dt, cfg);
  }
  if (!(dt > 0.0)) throw BiofilmError(ErrorKind::NumericalBlowup, "time step collapsed to zero");
  diag.dt_used = dt;

  const auto boundary = advance_boundary(work.L, diag.u_L, diag.sigma_a, diag.sigma_d, dt);
  diag.boundary_floored = boundary.floored;

  auto biomass = advance_biomass(work, rates, work.u, boundary.L_next, dt, diag.regime, inflow, nm);
  diag.sum_f_drift = biomass.drift;
  diag.clamped_nodes += biomass.clamped_nodes;
  diag.front_width = biomass.front_width;

  res.state = std::move(work);
  res.state.t = state.t + dt;
  res.state.L = boundary.L_next;
  res.state.f = std::move(biomass.f);

  if (!std::isfinite(res.state.L) || !finite_field(res.state.f) || !finite_field(res.state.S) ||
      !finite_field(res.state.Psi))
    throw BiofilmError(ErrorKind::NumericalBlowup, "non-finite value in state");
  return res;
}

RunOutput run(const ScenarioConfig& cfg, const RunOptions& options) {
  require_valid(cfg);
  RunOutput out;
  BiofilmState state = initial_state(cfg);

  const auto& snaps = cfg.snapshot_times;
  std::size_t next_snap = 0;
  while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) {
    out.snapshots.push_back(make_snapshot(state, cfg));
    ++next_snap;
  }

  auto record = [&](double t, double L, const StepDiagnostics& d, const std::vector<double>& u) {
    out.boundary.push_back({t, L, d.sigma_a, d.sigma_d, d.u_L, d.regime});
    if (options.record_trace) out.trace.push_back({t, L, u});
  };

  try {
    while (state.t < cfg.horizon) {
      const double target = next_snap < snaps.size() ? snaps[next_snap] : cfg.horizon;
      const double limit = target - state.t;
      auto res = step(state, cfg, limit);
      const auto& d = res.diagnostics;
      record(state.t, state.L, d, res.state.u);
      if (d.dt_used >= limit * (1.0 - 1e-12)) res.state.t = target;

      ++out.steps;
      out.max_drift = std::max(out.max_drift, d.sum_f_drift);
      out.max_front_width = std::max(out.max_front_width, d.front_width);
      if (d.planktonic_under_resolved) ++out.under_resolved_steps;
      state = std::move(res.state);

      if (next_snap < snaps.size() && state.t == snaps[next_snap]) {
        state = refresh(state, cfg);
        out.snapshots.push_back(make_snapshot(state, cfg));
        ++next_snap;
      }
    }
    // Closing boundary row at the horizon.
    const BiofilmState last = refresh(state, cfg);
    const auto snap = make_snapshot(last, cfg);
    StepDiagnostics d;
    d.sigma_a = snap.sigma_a;
    d.sigma_d = snap.sigma_d;
    d.u_L = snap.u_L;
    d.regime = snap.regime;
    record(last.t, last.L, d, last.u);
  } catch (const BiofilmError& e) {
    std::ostringstream os;
    os << e.what() << " (at t = " << state.t << " d)";
    throw BiofilmError(e.kind(), os.str());
  }
  return out;
}

}  // namespace biofilm
