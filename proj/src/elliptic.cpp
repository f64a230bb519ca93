#include "biofilm/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biofilm/errors.hpp"
#include "biofilm/kinetics.hpp"

namespace biofilm::elliptic {

std::vector<double> tridiagonal_solve(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), x(n);
  constexpr double kPivotFloor = 1e-30;

  double pivot = diag[0];
  if (std::abs(pivot) < kPivotFloor)
    throw BiofilmError(ErrorKind::SingularJacobian, "zero pivot at row 0");
  c[0] = n > 1 ? upper[0] / pivot : 0.0;
  x[0] = rhs[0] / pivot;
  for (std::size_t k = 1; k < n; ++k) {
    pivot = diag[k] - lower[k] * c[k - 1];
    if (std::abs(pivot) < kPivotFloor)
      throw BiofilmError(ErrorKind::SingularJacobian, "zero pivot at row " + std::to_string(k));
    c[k] = k + 1 < n ? upper[k] / pivot : 0.0;
    x[k] = (rhs[k] - lower[k] * x[k - 1]) / pivot;
  }
  for (std::size_t k = n - 1; k-- > 0;) x[k] -= c[k] * x[k + 1];
  return x;
}

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Residual rows k = 0..N-1; values has N+1 entries with values[N] the
// Dirichlet value.
void fill_residual(const EllipticProblem& p, std::span<const double> v, std::span<double> out) {
  const std::size_t N = p.N;
  const double h = p.L / static_cast<double>(N);
  const double scale = h * h / p.D;
  for (std::size_t k = 0; k < N; ++k) {
    const double left = k == 0 ? v[1] : v[k - 1];
    const double lap = left - 2.0 * v[k] + v[k + 1];
    out[k] = -lap - scale * p.reaction(k, v[k]).rate;
  }
}

}  // namespace

std::vector<double> residual(const EllipticProblem& problem, std::span<const double> values) {
  std::vector<double> r(problem.N);
  fill_residual(problem, values, r);
  return r;
}

EllipticSolution solve(const EllipticProblem& p, const NewtonControls& ctl,
                       std::span<const double> guess) {
  const std::size_t N = p.N;
  const double h = p.L / static_cast<double>(N);
  const double scale = h * h / p.D;
  const double target = ctl.tol * std::max(1.0, p.dirichlet_value);

  EllipticSolution sol;
  if (guess.size() == N + 1) sol.values.assign(guess.begin(), guess.end());
  else sol.values.assign(N + 1, p.dirichlet_value);
  auto& v = sol.values;
  v[N] = p.dirichlet_value;

  std::vector<double> R(N), Rtrial(N), lower(N, -1.0), diag(N), upper(N, -1.0), rhs(N);
  std::vector<double> trial(N + 1);
  upper[0] = -2.0;

  fill_residual(p, v, R);
  double norm = inf_norm(R);
  const std::size_t max_iter = p.linear_in_unknown ? 1 : ctl.max_iter;

  while (norm > target) {
    if (sol.iterations >= max_iter) {
      if (p.linear_in_unknown) break;
      throw BiofilmError(ErrorKind::NonConvergence,
                         "elliptic Newton: " + std::to_string(sol.iterations) +
                             " iterations, residual " + std::to_string(norm));
    }
    ++sol.iterations;
    for (std::size_t k = 0; k < N; ++k) {
      diag[k] = 2.0 - scale * p.reaction(k, v[k]).slope;
      rhs[k] = -R[k];
    }
    const auto delta = tridiagonal_solve(lower, diag, upper, rhs);

    if (p.linear_in_unknown) {
      for (std::size_t k = 0; k < N; ++k) v[k] += delta[k];
      fill_residual(p, v, R);
      norm = inf_norm(R);
      break;
    }

    double alpha = 1.0;
    bool accepted = false;
    for (std::size_t halving = 0; halving <= ctl.max_halvings; ++halving) {
      for (std::size_t k = 0; k < N; ++k) trial[k] = v[k] + alpha * delta[k];
      trial[N] = v[N];
      fill_residual(p, trial, Rtrial);
      const double trial_norm = inf_norm(Rtrial);
      if (trial_norm < norm) {
        v.swap(trial);
        R.swap(Rtrial);
        norm = trial_norm;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw BiofilmError(ErrorKind::NonConvergence,
                         "elliptic Newton: line search stalled at residual " +
                             std::to_string(norm));
  }

  sol.residual_norm = norm;
  for (auto& x : v)
    if (x < 0.0) x = 0.0;
  v[N] = p.dirichlet_value;
  return sol;
}

Field solve_substrates(const BiofilmState& state, const ScenarioConfig& cfg) {
  const std::size_t n = cfg.n_species();
  const std::size_t m = cfg.n_substrates();
  const std::size_t N = state.intervals();
  const auto s_bulk = cfg.bulk.s_at(state.t);
  const auto& st = cfg.stoichiometry;
  NewtonControls ctl{cfg.numerics.newton_tol, cfg.numerics.newton_max_iter, 30};

  Field S = state.S;
  for (std::size_t j = 0; j < m; ++j) S[j][N] = s_bulk[j];

  // Per-node split of r_S,j into a frozen part and the terms of species that
  // grow on substrate j: r_S,j = fixed_k + sum_i a_{k,i} monod(S_j, K_i).
  struct Term {
    double K;
    std::vector<double> a;
  };
  std::vector<double> fixed(N + 1);
  std::vector<Term> terms;
  std::vector<double> node_S(m);

  auto build = [&](std::size_t j) {
    terms.clear();
    std::fill(fixed.begin(), fixed.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = st.coeffs[j][i];
      if (c == 0.0) continue;
      const auto& sp = cfg.species[i];
      const double w = c * sp.rho / sp.Y * sp.mu_max;
      if (st.growth_substrate[i] == j) {
        Term term{sp.K, std::vector<double>(N + 1)};
        for (std::size_t k = 0; k <= N; ++k) term.a[k] = w * std::max(state.f[i][k], 0.0);
        terms.push_back(std::move(term));
      } else {
        const std::size_t g = st.growth_substrate[i];
        for (std::size_t k = 0; k <= N; ++k)
          fixed[k] += w * kinetics::monod(S[g][k], sp.K) * std::max(state.f[i][k], 0.0);
      }
    }
  };

  auto problem_for = [&](std::size_t j) {
    EllipticProblem p;
    p.D = cfg.substrates[j].D;
    p.L = state.L;
    p.N = N;
    p.dirichlet_value = s_bulk[j];
    p.reaction = [&](std::size_t k, double s) {
      LocalRate lr{fixed[k], 0.0};
      for (const auto& term : terms) {
        lr.rate += term.a[k] * kinetics::monod(s, term.K);
        lr.slope += term.a[k] * kinetics::monod_slope(s, term.K);
      }
      return lr;
    };
    return p;
  };

  for (std::size_t sweep = 0; sweep < std::max<std::size_t>(ctl.max_iter, 2); ++sweep) {
    std::size_t newton_steps = 0;
    for (std::size_t j = 0; j < m; ++j) {
      build(j);
      auto sol = solve(problem_for(j), ctl, S[j]);
      newton_steps += sol.iterations;
      S[j] = std::move(sol.values);
    }
    if (newton_steps == 0) return S;  // every residual already met tolerance
  }
  throw BiofilmError(ErrorKind::NonConvergence, "substrate sweeps did not settle");
}

PlanktonicResult solve_planktonic(const BiofilmState& state, const ScenarioConfig& cfg) {
  const std::size_t n = cfg.n_species();
  const std::size_t m = cfg.n_substrates();
  const std::size_t N = state.intervals();
  const auto psi_bulk = cfg.bulk.psi_at(state.t);
  NewtonControls ctl{cfg.numerics.newton_tol, 1, 0};

  PlanktonicResult out;
  out.Psi.assign(n, std::vector<double>(N + 1, 0.0));
  std::vector<double> kappa(N + 1), node_S(m);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& sp = cfg.species[i];
    if (sp.k_col > 0.0) {
      const double width = std::sqrt(sp.D_psi * sp.Y_psi / sp.k_col);
      if (static_cast<double>(N) < state.L / (0.5 * width)) out.under_resolved.push_back(i);
    }
    if (psi_bulk[i] == 0.0) continue;  // homogeneous problem
    if (sp.k_col == 0.0) {
      std::fill(out.Psi[i].begin(), out.Psi[i].end(), psi_bulk[i]);
      continue;
    }
    for (std::size_t k = 0; k <= N; ++k) {
      for (std::size_t j = 0; j < m; ++j) node_S[j] = state.S[j][k];
      kappa[k] = kinetics::planktonic_sink_coefficient(i, node_S, cfg);
    }
    EllipticProblem p;
    p.D = sp.D_psi;
    p.L = state.L;
    p.N = N;
    p.dirichlet_value = psi_bulk[i];
    p.linear_in_unknown = true;
    p.reaction = [&](std::size_t k, double v) { return LocalRate{-kappa[k] * v, -kappa[k]}; };
    std::vector<double> zero(N + 1, 0.0);
    out.Psi[i] = solve(p, ctl, zero).values;
  }
  return out;
}

}  // namespace biofilm::elliptic
