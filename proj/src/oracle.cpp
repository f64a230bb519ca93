#include "biofilm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "biofilm/errors.hpp"
#include "biofilm/kinetics.hpp"

namespace biofilm::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sigma(t) = integral_0^t sigma_a(psi*(theta)) dtheta at every grid time,
// trapezoid with 16 sub-intervals per grid cell so ramps are resolved.
std::vector<double> cumulative_attachment(const ScenarioConfig& cfg, const CharField& g) {
  constexpr int kSub = 16;
  std::vector<double> out(g.n + 1, 0.0);
  for (std::size_t k = 1; k <= g.n; ++k) {
    const double ta = g.time(k - 1);
    const double h = (g.time(k) - ta) / kSub;
    double acc = 0.0;
    for (int q = 0; q < kSub; ++q) {
      const double l = attachment_flux(cfg.bulk.psi_at(ta + q * h), cfg);
      const double r = attachment_flux(cfg.bulk.psi_at(ta + (q + 1) * h), cfg);
      acc += 0.5 * h * (l + r);
    }
    out[k] = out[k - 1] + acc;
  }
  return out;
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

struct Distance {
  double scaled{0.0};
  double raw{0.0};
};

Distance distance(const CharField& u, const CharField& v) {
  Distance d;
  auto add = [&](std::span<const double> a, std::span<const double> b) {
    const double diff = sup_diff(a, b);
    const double scale = std::max(sup_norm(a), sup_norm(b));
    d.raw += diff;
    if (scale > 0.0) d.scaled += diff / scale;
  };
  for (std::size_t i = 0; i < u.x.size(); ++i) add(u.x[i], v.x[i]);
  for (std::size_t j = 0; j < u.s.size(); ++j) add(u.s[j], v.s[j]);
  for (std::size_t i = 0; i < u.psi.size(); ++i) add(u.psi[i], v.psi[i]);
  add(u.Lb, v.Lb);
  add(u.c, v.c);
  add(u.c_t0, v.c_t0);
  return d;
}

// One application of the integral map.
CharField apply_map(const ScenarioConfig& cfg, const CharField& old,
                    std::span<const double> Sigma) {
  const std::size_t n = old.n;
  const std::size_t ns = cfg.n_species();
  const std::size_t ms = cfg.n_substrates();
  const std::size_t cells = (n + 1) * (n + 1);
  const double h = old.dt();

  // Rates at every grid point of the old iterate.
  std::vector<std::vector<double>> F(ns, std::vector<double>(cells, 0.0));
  std::vector<std::vector<double>> rS(ms, std::vector<double>(cells, 0.0));
  std::vector<std::vector<double>> rPsi(ns, std::vector<double>(cells, 0.0));
  std::vector<double> G(cells, 0.0);
  std::vector<double> f(ns), S(ms), P(ns);
  for (std::size_t a = 0; a <= n; ++a) {
    for (std::size_t b = a; b <= n; ++b) {
      const std::size_t k = old.at(a, b);
      for (std::size_t i = 0; i < ns; ++i) {
        f[i] = old.x[i][k] / cfg.species[i].rho;
        P[i] = old.psi[i][k];
      }
      for (std::size_t j = 0; j < ms; ++j) S[j] = old.s[j][k];
      const auto r = kinetics::evaluate(f, S, P, cfg);
      G[k] = r.G;
      for (std::size_t i = 0; i < ns; ++i) {
        const double rho = cfg.species[i].rho;
        F[i][k] = rho * (r.r_M[i] + r.r_col[i]) - old.x[i][k] * r.G;
        rPsi[i][k] = r.r_Psi[i];
      }
      for (std::size_t j = 0; j < ms; ++j) rS[j][k] = r.r_S[j];
    }
  }

  CharField next = old;
  std::vector<double> X0(ns);

  for (std::size_t a = 0; a <= n; ++a) {
    const auto psi_a = cfg.bulk.psi_at(old.time(a));
    const auto f0 = inflow_fractions(psi_a, cfg);
    const double sigma_a = attachment_flux(psi_a, cfg);
    for (std::size_t i = 0; i < ns; ++i) X0[i] = cfg.species[i].rho * f0[i];

    // x along the characteristic born at t0 = t_a, and c_t0 on it.
    for (std::size_t i = 0; i < ns; ++i) {
      double acc = 0.0;
      next.x[i][old.at(a, a)] = X0[i];
      for (std::size_t b = a + 1; b <= n; ++b) {
        acc += 0.5 * h * (F[i][old.at(a, b - 1)] + F[i][old.at(a, b)]);
        next.x[i][old.at(a, b)] = X0[i] + acc;
      }
    }
    double acc = 0.0;
    next.c_t0[old.at(a, a)] = sigma_a;
    for (std::size_t b = a + 1; b <= n; ++b) {
      const std::size_t p = old.at(a, b - 1), q = old.at(a, b);
      acc += 0.5 * h * (G[p] * old.c_t0[p] + G[q] * old.c_t0[q]);
      next.c_t0[q] = sigma_a + acc;
    }
  }

  // U(a, theta) = integral_0^{t_a} G c_t0 (tau, theta) dtau: the velocity at
  // c(t_a, theta).
  std::vector<double> U(cells, 0.0);
  for (std::size_t th = 0; th <= n; ++th) {
    double acc = 0.0;
    for (std::size_t a = 1; a <= th; ++a) {
      const std::size_t p = old.at(a - 1, th), q = old.at(a, th);
      acc += 0.5 * h * (G[p] * old.c_t0[p] + G[q] * old.c_t0[q]);
      U[old.at(a, th)] = acc;
    }
  }

  next.Lb[0] = Sigma[0];
  double accL = 0.0;
  for (std::size_t a = 1; a <= n; ++a) {
    accL += 0.5 * h * (U[old.at(a - 1, a - 1)] + U[old.at(a, a)]);
    next.Lb[a] = Sigma[a] + accL;
  }
  for (std::size_t a = 0; a <= n; ++a) {
    double acc = 0.0;
    next.c[old.at(a, a)] = next.Lb[a];
    for (std::size_t b = a + 1; b <= n; ++b) {
      acc += 0.5 * h * (U[old.at(a, b - 1)] + U[old.at(a, b)]);
      next.c[old.at(a, b)] = next.Lb[a] + acc;
    }
  }

  // Elliptic fields: value(a, b) = bulk(b) + (1/D) int_{t_a}^{t_b} c_t0(theta, b)
  //                                 * int_0^theta r(tau, b) c_t0(tau, b) dtau dtheta.
  std::vector<double> inner(n + 1), outer(n + 1);
  auto elliptic = [&](const std::vector<double>& rate, double D, double bulk, std::size_t b,
                      std::vector<double>& dest) {
    inner[0] = 0.0;
    for (std::size_t th = 1; th <= b; ++th) {
      const std::size_t p = old.at(th - 1, b), q = old.at(th, b);
      inner[th] = inner[th - 1] + 0.5 * h * (rate[p] * old.c_t0[p] + rate[q] * old.c_t0[q]);
    }
    for (std::size_t th = 0; th <= b; ++th) outer[th] = old.c_t0[old.at(th, b)] * inner[th];
    double acc = 0.0;
    dest[old.at(b, b)] = bulk;
    for (std::size_t a = b; a-- > 0;) {
      acc += 0.5 * h * (outer[a] + outer[a + 1]);
      dest[old.at(a, b)] = bulk + acc / D;
    }
  };
  for (std::size_t b = 0; b <= n; ++b) {
    const double t = old.time(b);
    const auto s_bulk = cfg.bulk.s_at(t);
    const auto p_bulk = cfg.bulk.psi_at(t);
    for (std::size_t j = 0; j < ms; ++j)
      elliptic(rS[j], cfg.substrates[j].D, s_bulk[j], b, next.s[j]);
    for (std::size_t i = 0; i < ns; ++i)
      elliptic(rPsi[i], cfg.species[i].D_psi, p_bulk[i], b, next.psi[i]);
  }
  return next;
}

}  // namespace

CharField zeroth_iterate(const ScenarioConfig& cfg, double T, std::size_t grid_n) {
  if (!(T > 0.0)) throw BiofilmError(ErrorKind::InvalidConfig, "oracle horizon must be > 0");
  if (grid_n < 2) throw BiofilmError(ErrorKind::InvalidConfig, "oracle grid needs >= 2 intervals");
  const std::size_t ns = cfg.n_species();
  const std::size_t ms = cfg.n_substrates();
  const std::size_t cells = (grid_n + 1) * (grid_n + 1);

  CharField g;
  g.T = T;
  g.n = grid_n;
  g.x.assign(ns, std::vector<double>(cells, 0.0));
  g.s.assign(ms, std::vector<double>(cells, 0.0));
  g.psi.assign(ns, std::vector<double>(cells, 0.0));
  g.c.assign(cells, 0.0);
  g.c_t0.assign(cells, 0.0);
  g.Lb.assign(grid_n + 1, 0.0);

  for (std::size_t a = 0; a <= grid_n; ++a) {
    const auto psi_a = cfg.bulk.psi_at(g.time(a));
    if (!(attachment_flux(psi_a, cfg) > 0.0)) {
      std::ostringstream os;
      os << "sigma_a vanishes at t = " << g.time(a) << " inside the oracle window";
      throw BiofilmError(ErrorKind::NoAttachment, os.str());
    }
  }
  const auto Sigma = cumulative_attachment(cfg, g);
  for (std::size_t a = 0; a <= grid_n; ++a) {
    const auto psi_a = cfg.bulk.psi_at(g.time(a));
    const auto f0 = inflow_fractions(psi_a, cfg);
    const double sigma_a = attachment_flux(psi_a, cfg);
    g.Lb[a] = Sigma[a];
    for (std::size_t b = a; b <= grid_n; ++b) {
      const std::size_t k = g.at(a, b);
      const auto s_b = cfg.bulk.s_at(g.time(b));
      const auto p_b = cfg.bulk.psi_at(g.time(b));
      for (std::size_t i = 0; i < ns; ++i) {
        g.x[i][k] = cfg.species[i].rho * f0[i];
        g.psi[i][k] = p_b[i];
      }
      for (std::size_t j = 0; j < ms; ++j) g.s[j][k] = s_b[j];
      g.c[k] = Sigma[a];
      g.c_t0[k] = sigma_a;
    }
  }
  return g;
}

PicardResult picard_solve(const ScenarioConfig& cfg, double T, std::size_t grid_n,
                          const std::optional<CharField>& start) {
  PicardResult res;
  res.field = zeroth_iterate(cfg, T, grid_n);
  const auto Sigma = cumulative_attachment(cfg, res.field);
  if (start) {
    if (start->n != grid_n || start->T != T || start->x.size() != cfg.n_species() ||
        start->s.size() != cfg.n_substrates())
      throw BiofilmError(ErrorKind::InvalidConfig, "starting iterate does not match the grid");
    res.field = *start;
  }

  const std::size_t max_iter = cfg.numerics.picard_max_iter;
  std::size_t rising = 0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    CharField next = apply_map(cfg, res.field, Sigma);
    const Distance d = distance(next, res.field);
    res.field = std::move(next);
    if (!std::isfinite(d.scaled))
      throw BiofilmError(ErrorKind::NumericalBlowup, "Picard iterate is not finite");
    if (!res.history.empty() && d.scaled >= res.history.back()) {
      if (++rising >= 3) {
        std::ostringstream os;
        os << "Picard distance failed to decrease 3 times in a row (last " << d.scaled
           << "); the horizon is outside the contraction window";
        throw BiofilmError(ErrorKind::NonConvergence, os.str());
      }
    } else {
      rising = 0;
    }
    res.history.push_back(d.scaled);
    res.raw_history.push_back(d.raw);
    if (d.scaled < cfg.numerics.picard_tol) {
      res.converged = true;
      break;
    }
  }

  const auto& g = res.field;
  res.min_c_t0 = kInf;
  for (std::size_t a = 0; a <= g.n; ++a) {
    for (std::size_t b = a; b <= g.n; ++b) res.min_c_t0 = std::min(res.min_c_t0, g.c_t0[g.at(a, b)]);
    const double t = g.time(a);
    const double sigma_a = attachment_flux(cfg.bulk.psi_at(t), cfg);
    if (sigma_a - detachment_flux(g.Lb[a], cfg.delta) <= 0.0) {
      std::ostringstream os;
      os << "detachment regime reached at t = " << t << "; the oracle covers attachment only";
      throw BiofilmError(ErrorKind::OutOfDomain, os.str());
    }
  }
  return res;
}

double field_distance(const CharField& u, const CharField& v) { return distance(u, v).scaled; }

std::vector<double> contraction_ratios(std::span<const double> history) {
  std::vector<double> out;
  for (std::size_t k = 1; k < history.size(); ++k)
    out.push_back(history[k - 1] > 0.0 ? history[k] / history[k - 1] : 0.0);
  return out;
}

namespace {

double interp_u(const VelocitySample& v, double z) {
  if (!(v.L > 0.0)) return 0.0;
  const std::size_t N = v.u.size() - 1;
  const double x = std::clamp(z / v.L, 0.0, 1.0) * static_cast<double>(N);
  const std::size_t k = std::min(static_cast<std::size_t>(x), N - 1);
  const double w = x - static_cast<double>(k);
  return (1.0 - w) * v.u[k] + w * v.u[k + 1];
}

}  // namespace

std::vector<double> characteristic_trace(std::span<const VelocitySample> trace, double t0,
                                         std::span<const double> sample_times) {
  if (trace.size() < 2) throw BiofilmError(ErrorKind::OutOfDomain, "velocity trace is too short");
  const double t_lo = trace.front().t;
  const double t_hi = trace.back().t;
  auto out_of_domain = [&](double t) {
    std::ostringstream os;
    os << "time " << t << " outside stored traces [" << t_lo << ", " << t_hi << "]";
    throw BiofilmError(ErrorKind::OutOfDomain, os.str());
  };
  if (t0 < t_lo || t0 > t_hi) out_of_domain(t0);
  for (double t : sample_times)
    if (t < t0 || t > t_hi) out_of_domain(t);
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw BiofilmError(ErrorKind::OutOfDomain, "sample times must be ascending");

  // Interval q with trace[q].t <= t <= trace[q+1].t.
  auto interval = [&](double t) {
    auto it = std::upper_bound(trace.begin(), trace.end(), t,
                               [](double v, const VelocitySample& s) { return v < s.t; });
    std::size_t q = static_cast<std::size_t>(it - trace.begin());
    q = q == 0 ? 0 : q - 1;
    return std::min(q, trace.size() - 2);
  };
  auto weight = [&](std::size_t q, double t) {
    const double span = trace[q + 1].t - trace[q].t;
    return span > 0.0 ? (t - trace[q].t) / span : 0.0;
  };
  auto L_at = [&](std::size_t q, double t) {
    const double w = weight(q, t);
    return (1.0 - w) * trace[q].L + w * trace[q + 1].L;
  };
  auto u_at = [&](std::size_t q, double z, double t) {
    const double w = weight(q, t);
    return (1.0 - w) * interp_u(trace[q], z) + w * interp_u(trace[q + 1], z);
  };

  std::size_t q = interval(t0);
  double t = t0;
  double z = L_at(q, t0);
  std::vector<double> out;
  out.reserve(sample_times.size());

  for (double target : sample_times) {
    while (t < target) {
      q = interval(t);
      // Advance to the end of this trace interval or to the target.
      const double t_next = std::min(target, trace[q + 1].t);
      const double dt = t_next - t;
      const double k1 = u_at(q, z, t);
      const double z_pred = std::clamp(z + dt * k1, 0.0, L_at(q, t_next));
      const double k2 = u_at(q, z_pred, t_next);
      z = std::clamp(z + 0.5 * dt * (k1 + k2), 0.0, L_at(q, t_next));
      t = t_next;
    }
    out.push_back(z);
  }
  return out;
}

Box box_from_run(const ScenarioConfig& cfg, double T1) {
  if (!(T1 > 0.0)) throw BiofilmError(ErrorKind::InvalidConfig, "box window T1 must be > 0");
  const std::size_t ns = cfg.n_species();
  const std::size_t ms = cfg.n_substrates();

  ScenarioConfig c = cfg;
  c.horizon = T1;
  c.snapshot_times.clear();
  constexpr int kSnaps = 16;
  for (int k = 0; k <= kSnaps; ++k) c.snapshot_times.push_back(k == kSnaps ? T1 : T1 * k / kSnaps);
  const auto out = run(c, RunOptions{false});

  Box box;
  box.T1 = T1;
  box.h_x.assign(ns, 0.0);
  box.h_s.assign(ms, 0.0);
  box.h_psi.assign(ns, 0.0);
  double sigma_max = 0.0, G_max = 0.0, L_max = 0.0, dev_L = 0.0;
  double Sigma = 0.0, t_prev = 0.0, sigma_prev = 0.0;
  std::vector<double> psi_max(ns, 0.0), s_max(ms, 0.0);

  for (const auto& snap : out.snapshots) {
    const auto& st = snap.state;
    const auto psi = c.bulk.psi_at(st.t);
    const auto sb = c.bulk.s_at(st.t);
    const double sigma = attachment_flux(psi, c);
    Sigma += 0.5 * (st.t - t_prev) * (sigma + sigma_prev);
    t_prev = st.t;
    sigma_prev = sigma;
    sigma_max = std::max(sigma_max, sigma);
    L_max = std::max(L_max, st.L);
    dev_L = std::max(dev_L, std::abs(st.L - Sigma));
    const auto f0 = inflow_fractions(psi, c);
    for (std::size_t k = 0; k < st.nodes(); ++k) {
      std::vector<double> f(ns), S(ms), P(ns);
      for (std::size_t i = 0; i < ns; ++i) {
        f[i] = st.f[i][k];
        P[i] = st.Psi[i][k];
        const double rho = c.species[i].rho;
        box.h_x[i] = std::max(box.h_x[i], std::abs(rho * (st.f[i][k] - f0[i])));
        box.h_psi[i] = std::max(box.h_psi[i], std::abs(st.Psi[i][k] - psi[i]));
        psi_max[i] = std::max(psi_max[i], psi[i]);
      }
      for (std::size_t j = 0; j < ms; ++j) {
        S[j] = st.S[j][k];
        box.h_s[j] = std::max(box.h_s[j], std::abs(st.S[j][k] - sb[j]));
        s_max[j] = std::max(s_max[j], sb[j]);
      }
      G_max = std::max(G_max, std::abs(kinetics::source_G(f, S, P, c)));
    }
  }

  for (std::size_t i = 0; i < ns; ++i) {
    box.h_x[i] = std::max(2.0 * box.h_x[i], 1e-6 * c.species[i].rho);
    box.h_psi[i] = std::max(2.0 * box.h_psi[i], 1e-6 * std::max(1.0, psi_max[i]));
  }
  for (std::size_t j = 0; j < ms; ++j) box.h_s[j] = std::max(2.0 * box.h_s[j], 1e-6 * std::max(1.0, s_max[j]));
  box.h_L = std::max(2.0 * dev_L, 1e-12);
  box.h_c1 = std::max(2.0 * L_max, 1e-12);
  box.h_c2 = std::max(2.0 * sigma_max * std::expm1(G_max * T1), 1e-6 * sigma_max);
  return box;
}

double contraction_root(double a, double b) {
  if (a < 0.0 || b < 0.0) throw BiofilmError(ErrorKind::InvalidConfig, "a and b must be >= 0");
  if (a == 0.0) return b == 0.0 ? kInf : 1.0 / b;
  // 2 / (b + sqrt(b^2 + 4a)) avoids cancellation when b^2 >> a.
  return 2.0 / (b + std::sqrt(b * b + 4.0 * a));
}

ContractionEstimate estimate_contraction(const ScenarioConfig& cfg, const Box& box,
                                         std::size_t samples, std::uint64_t seed) {
  const std::size_t ns = cfg.n_species();
  const std::size_t ms = cfg.n_substrates();
  if (!(box.T1 > 0.0)) throw BiofilmError(ErrorKind::InvalidConfig, "box T1 must be > 0");
  if (box.h_x.size() != ns || box.h_s.size() != ms || box.h_psi.size() != ns)
    throw BiofilmError(ErrorKind::InvalidConfig, "box dimensions do not match the scenario");

  ContractionEstimate est;
  est.M_x.assign(ns, 0.0);
  est.M_s.assign(ms, 0.0);
  est.M_psi.assign(ns, 0.0);
  est.lambda_x.assign(ns, 0.0);
  est.lambda_s.assign(ms, 0.0);
  est.lambda_psi.assign(ns, 0.0);
  est.samples = samples;

  // Argument vector: x (ns), s (ms), psi (ns), c_t0 (1).
  const std::size_t nargs = 2 * ns + ms + 1;
  std::vector<double> width(nargs);
  for (std::size_t i = 0; i < ns; ++i) width[i] = box.h_x[i];
  for (std::size_t j = 0; j < ms; ++j) width[ns + j] = box.h_s[j];
  for (std::size_t i = 0; i < ns; ++i) width[ns + ms + i] = box.h_psi[i];
  width[nargs - 1] = box.h_c2;

  // Kernel values: F_i (ns), F_s (ms), F_psi (ns), G c_t0 (1).
  const std::size_t nk = 2 * ns + ms + 1;
  auto kernels = [&](std::span<const double> v, std::span<double> out) {
    std::vector<double> f(ns), S(ms), P(ns);
    for (std::size_t i = 0; i < ns; ++i) {
      f[i] = v[i] / cfg.species[i].rho;
      P[i] = v[ns + ms + i];
    }
    for (std::size_t j = 0; j < ms; ++j) S[j] = v[ns + j];
    const double ct = v[nargs - 1];
    const auto r = kinetics::evaluate(f, S, P, cfg);
    for (std::size_t i = 0; i < ns; ++i) {
      out[i] = cfg.species[i].rho * (r.r_M[i] + r.r_col[i]) - v[i] * r.G;
      out[ns + ms + i] = r.r_Psi[i] * ct * ct / cfg.species[i].D_psi;
    }
    for (std::size_t j = 0; j < ms; ++j) out[ns + j] = r.r_S[j] * ct * ct / cfg.substrates[j].D;
    out[nk - 1] = r.G * ct;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(nargs), vp(nargs), vm(nargs), F(nk), Fp(nk), Fm(nk);
  std::vector<double> M(nk, 0.0), lam(nk, 0.0);

  for (std::size_t k = 0; k < samples; ++k) {
    const double t0 = box.T1 * unit(rng);
    const double t = t0 + (box.T1 - t0) * unit(rng);
    const auto psi0 = cfg.bulk.psi_at(t0);
    const auto f0 = inflow_fractions(psi0, cfg);
    const double sigma = attachment_flux(psi0, cfg);
    const auto sb = cfg.bulk.s_at(t);
    const auto pb = cfg.bulk.psi_at(t);
    for (std::size_t i = 0; i < ns; ++i) v[i] = cfg.species[i].rho * f0[i];
    for (std::size_t j = 0; j < ms; ++j) v[ns + j] = sb[j];
    for (std::size_t i = 0; i < ns; ++i) v[ns + ms + i] = pb[i];
    v[nargs - 1] = sigma;
    for (std::size_t q = 0; q < nargs; ++q) v[q] += (2.0 * unit(rng) - 1.0) * width[q];

    kernels(v, F);
    for (std::size_t q = 0; q < nk; ++q) M[q] = std::max(M[q], std::abs(F[q]));
    for (std::size_t q = 0; q < nargs; ++q) {
      const double eps = 1e-6 * width[q];
      vp = v;
      vm = v;
      vp[q] += eps;
      vm[q] -= eps;
      kernels(vp, Fp);
      kernels(vm, Fm);
      for (std::size_t r = 0; r < nk; ++r)
        lam[r] = std::max(lam[r], std::abs(Fp[r] - Fm[r]) / (2.0 * eps));
    }
  }

  for (std::size_t i = 0; i < ns; ++i) {
    est.M_x[i] = M[i];
    est.lambda_x[i] = lam[i];
    est.M_psi[i] = M[ns + ms + i];
    est.lambda_psi[i] = lam[ns + ms + i];
  }
  for (std::size_t j = 0; j < ms; ++j) {
    est.M_s[j] = M[ns + j];
    est.lambda_s[j] = lam[ns + j];
  }
  // The boundary, position and slope kernels are all G * c_t0.
  est.M_L = est.M_c1 = est.M_c2 = M[nk - 1];
  est.lambda_L = est.lambda_c1 = est.lambda_c2 = lam[nk - 1];

  for (double l : est.lambda_s) est.a += l;
  for (double l : est.lambda_psi) est.a += l;
  est.a += est.lambda_L + 2.0 * est.lambda_c1;
  for (double l : est.lambda_x) est.b += l;
  est.b += est.lambda_c2;

  auto ratio = [](double h, double m) { return m > 0.0 ? h / m : kInf; };
  double caps = box.T1;
  for (std::size_t i = 0; i < ns; ++i) caps = std::min(caps, ratio(box.h_x[i], est.M_x[i]));
  for (std::size_t j = 0; j < ms; ++j) caps = std::min(caps, std::sqrt(ratio(box.h_s[j], est.M_s[j])));
  for (std::size_t i = 0; i < ns; ++i)
    caps = std::min(caps, std::sqrt(ratio(box.h_psi[i], est.M_psi[i])));
  caps = std::min(caps, std::sqrt(ratio(box.h_L, est.M_L)));
  caps = std::min(caps, std::sqrt(ratio(box.h_c1, 2.0 * est.M_c1)));
  caps = std::min(caps, ratio(box.h_c2, est.M_c2));

  est.T_caps = caps;
  est.T_root = contraction_root(est.a, est.b);
  est.unbounded_by_contraction = std::isinf(est.T_root);
  est.T_star = 0.99 * std::min(est.T_caps, est.T_root);
  return est;
}

CrossCheck cross_validate(const ScenarioConfig& cfg, const CharField& field) {
  const std::size_t n = field.n;
  const std::size_t ns = cfg.n_species();

  ScenarioConfig c = cfg;
  c.horizon = field.T;
  c.snapshot_times.clear();
  for (std::size_t b = 0; b <= n; ++b) c.snapshot_times.push_back(field.time(b));
  const auto out = run(c, RunOptions{true});
  if (out.snapshots.size() != n + 1)
    throw BiofilmError(ErrorKind::OutOfDomain, "stepper snapshots do not match the oracle grid");

  double x_err = 0.0, x_scale = 0.0, c_err = 0.0, c_scale = 0.0, L_err = 0.0, L_scale = 0.0;
  std::vector<double> times;
  for (std::size_t a = 0; a <= n; ++a) {
    const double La = out.snapshots[a].state.L;
    L_err = std::max(L_err, std::abs(La - field.Lb[a]));
    L_scale = std::max(L_scale, std::abs(field.Lb[a]));

    times.assign(c.snapshot_times.begin() + static_cast<std::ptrdiff_t>(a), c.snapshot_times.end());
    const auto path = characteristic_trace(out.trace, field.time(a), times);
    for (std::size_t b = a; b <= n; ++b) {
      const auto& st = out.snapshots[b].state;
      const double z = path[b - a];
      const std::size_t k = field.at(a, b);
      c_err = std::max(c_err, std::abs(z - field.c[k]));
      c_scale = std::max(c_scale, std::abs(field.c[k]));

      const std::size_t N = st.intervals();
      const double pos = st.L > 0.0 ? std::clamp(z / st.L, 0.0, 1.0) * static_cast<double>(N) : 0.0;
      const std::size_t node = std::min(static_cast<std::size_t>(pos), N - 1);
      const double w = pos - static_cast<double>(node);
      for (std::size_t i = 0; i < ns; ++i) {
        const double f = (1.0 - w) * st.f[i][node] + w * st.f[i][node + 1];
        const double x = cfg.species[i].rho * f;
        x_err = std::max(x_err, std::abs(x - field.x[i][k]));
        x_scale = std::max(x_scale, std::abs(field.x[i][k]));
      }
    }
  }
  CrossCheck cc;
  cc.x_rel = x_scale > 0.0 ? x_err / x_scale : x_err;
  cc.c_rel = c_scale > 0.0 ? c_err / c_scale : c_err;
  cc.L_rel = L_scale > 0.0 ? L_err / L_scale : L_err;
  return cc;
}

}  // namespace biofilm::oracle
