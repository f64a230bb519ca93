#pragma once

#include <cstddef>
#include <vector>

#include "biofilm/config.hpp"

namespace biofilm {

/// Row-per-component nodal field: `values[c][k]` is component c at node k.
using Field = std::vector<std::vector<double>>;

/// Absolute tolerance on |sum_i f_i - 1| at every node.
inline constexpr double kConstraintTol = 1e-8;

enum class Regime { Attachment, Detachment };

const char* to_string(Regime r);

/// Attachment iff sigma_a - sigma_d > 0; ties go to Detachment.
Regime classify_regime(double sigma_a, double sigma_d);

/// Biofilm on the normalized grid zeta_k = k/N, z = zeta * L.
struct BiofilmState {
  double t{0.0};
  double L{0.0};
  std::vector<double> zeta;
  Field f;    ///< n x (N+1) volume fractions
  Field S;    ///< m x (N+1) substrate concentrations [g/m^3]
  Field Psi;  ///< n x (N+1) planktonic concentrations [g/m^3]
  std::vector<double> u;  ///< velocity [m/d]

  std::size_t nodes() const { return zeta.size(); }
  std::size_t intervals() const { return zeta.size() - 1; }
  double z(std::size_t k) const { return zeta[k] * L; }

  bool operator==(const BiofilmState&) const = default;
};

std::vector<double> uniform_grid(std::size_t N);

/// max over nodes of |sum_i f_i - 1|.
double constraint_drift(const Field& f);

struct Snapshot {
  BiofilmState state;
  double sigma_a{0.0};
  double sigma_d{0.0};
  double u_L{0.0};
  Regime regime{Regime::Attachment};
};

/// Seeded state at t = 0: L = L_eps, uniform inflow fractions, bulk values
/// for S and Psi, zero velocity. Throws NoAttachment if sigma_a(psi*(0)) = 0.
BiofilmState initial_state(const ScenarioConfig& cfg);

}  // namespace biofilm
