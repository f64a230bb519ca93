#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "biofilm/config.hpp"
#include "biofilm/state.hpp"

namespace biofilm::elliptic {

/// Solves A x = rhs for tridiagonal A given by its three diagonals
/// (lower[0] and upper[n-1] are ignored). Thomas algorithm without pivoting;
/// throws SingularJacobian when a pivot falls below 1e-30 in magnitude.
std::vector<double> tridiagonal_solve(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Reaction value and its derivative with respect to the unknown at one node.
struct LocalRate {
  double rate{0.0};
  double slope{0.0};
};

/// -D v'' = reaction(k, v_k) on z in [0, L], v'(0) = 0, v(L) = dirichlet_value,
/// discretized on N uniform intervals with a ghost node at z = -h.
struct EllipticProblem {
  double D{1.0};
  double L{1.0};
  double dirichlet_value{0.0};
  std::size_t N{8};
  std::function<LocalRate(std::size_t node, double value)> reaction;
  bool linear_in_unknown{false};
};

struct EllipticSolution {
  std::vector<double> values;
  double residual_norm{0.0};  ///< scaled residual, g/m^3
  std::size_t iterations{0};
};

struct NewtonControls {
  double tol{1e-9};  ///< relative; the absolute target is tol * max(1, dirichlet_value)
  std::size_t max_iter{50};
  std::size_t max_halvings{30};
};

/// Damped Newton for nonlinear problems, a single tridiagonal solve when
/// `linear_in_unknown` is set. `guess` may be empty (then the Dirichlet
/// value is used everywhere).
EllipticSolution solve(const EllipticProblem& problem, const NewtonControls& controls,
                       std::span<const double> guess = {});

/// Scaled residual vector (h^2/D units) of a candidate solution.
std::vector<double> residual(const EllipticProblem& problem, std::span<const double> values);

/// Substrate profiles at frozen f. Substrates are solved in index order with
/// the others frozen at their latest values, sweeping until every residual
/// meets tolerance (one sweep plus a check for triangular networks).
Field solve_substrates(const BiofilmState& state, const ScenarioConfig& cfg);

struct PlanktonicResult {
  Field Psi;
  /// Species whose screening layer sqrt(D_psi Y_psi / k_col) is under-resolved
  /// by the grid, i.e. N < L / (0.5 * layer width).
  std::vector<std::size_t> under_resolved;
};

/// Planktonic profiles at frozen S (linear in Psi; one tridiagonal solve each).
PlanktonicResult solve_planktonic(const BiofilmState& state, const ScenarioConfig& cfg);

}  // namespace biofilm::elliptic
