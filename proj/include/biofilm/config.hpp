#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace biofilm {

/// Sessile/planktonic parameters of one microbial species.
/// Units: rates 1/day, concentrations g/m^3, lengths m.
struct SpeciesParams {
  double mu_max{0.0};  ///< maximum specific growth rate [1/d]
  double K{1.0};       ///< half-saturation constant on its growth substrate [g/m^3]
  double Y{1.0};       ///< yield on the growth substrate [-]
  double rho{1.0};     ///< sessile density [g/m^3]
  double v_a{0.0};     ///< attachment velocity [m/d]
  double k_col{0.0};   ///< maximum colonization rate [1/d]
  double Y_psi{1.0};   ///< yield of sessile on planktonic biomass [-]
  double D_psi{1.0};   ///< planktonic diffusivity inside the biofilm [m^2/d]

  bool operator==(const SpeciesParams&) const = default;
};

struct SubstrateParams {
  double D{1.0};  ///< diffusivity inside the biofilm [m^2/d]

  bool operator==(const SubstrateParams&) const = default;
};

/// Which reading of the arrival ramp psi*(t) to use. `Printed` keeps the
/// denominator constant t1^(10/t1); `Corrected` uses t1^10.
enum class RampVariant { Printed, Corrected };

/// Closed-form description of a bulk-liquid concentration history.
struct TraceDescriptor {
  enum class Kind { Constant, Ramp, Table };

  Kind kind{Kind::Constant};
  double value{0.0};  ///< Constant: the value. Ramp: the plateau value.
  double t1{0.0};     ///< Ramp arrival time [d]
  RampVariant variant{RampVariant::Printed};
  std::vector<double> times;   ///< Table abscissae, strictly increasing
  std::vector<double> values;  ///< Table ordinates

  static TraceDescriptor constant(double v);
  static TraceDescriptor ramp(double t1, double plateau, RampVariant variant);
  static TraceDescriptor table(std::vector<double> times, std::vector<double> values);

  /// Value at time t; tables are linearly interpolated and held constant
  /// outside their range.
  double operator()(double t) const;

  bool operator==(const TraceDescriptor&) const = default;
};

struct BulkTraces {
  std::vector<TraceDescriptor> psi_star;  ///< one per species
  std::vector<TraceDescriptor> s_star;    ///< one per substrate

  std::vector<double> psi_at(double t) const;
  std::vector<double> s_at(double t) const;

  bool operator==(const BulkTraces&) const = default;
};

/// Reaction network. Species i grows on substrate `growth_substrate[i]`;
/// substrate j changes at rate sum_i coeffs[j][i] * rho_i r_M,i / Y_i.
struct Stoichiometry {
  enum class Kind { Builtin3, Matrix };

  Kind kind{Kind::Builtin3};
  std::vector<std::size_t> growth_substrate;
  std::vector<std::vector<double>> coeffs;  ///< m x n

  /// The three-species network: S1 -> f1 (producing S3), S2 -> f2, S3 -> f3.
  static Stoichiometry builtin3();

  bool operator==(const Stoichiometry&) const = default;
};

enum class TransportScheme { AntiDiffusive, Upwind };

struct NumericsConfig {
  std::size_t N{200};
  double dt_max{1e-3};
  double cfl{0.5};
  double L_eps{1e-9};
  double newton_tol{1e-9};
  std::size_t newton_max_iter{50};
  double picard_tol{1e-10};
  std::size_t picard_max_iter{200};
  TransportScheme transport{TransportScheme::AntiDiffusive};

  bool operator==(const NumericsConfig&) const = default;
};

struct ScenarioConfig {
  std::vector<SpeciesParams> species;
  std::vector<SubstrateParams> substrates;
  double delta{0.0};  ///< detachment coefficient [1/(m d)]
  BulkTraces bulk;
  Stoichiometry stoichiometry;
  NumericsConfig numerics;
  double horizon{1.0};
  std::vector<double> snapshot_times;
  std::vector<std::string> notes;  ///< free-form assumption notes, echoed in manifests

  std::size_t n_species() const { return species.size(); }
  std::size_t n_substrates() const { return substrates.size(); }

  bool operator==(const ScenarioConfig&) const = default;
};

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_config(const ScenarioConfig& cfg);

/// Throws BiofilmError(InvalidConfig) carrying the report text when invalid.
void require_valid(const ScenarioConfig& cfg);

/// Flat `section.key = value` text form. Key names are listed in README.md.
std::string serialize_config(const ScenarioConfig& cfg);
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

}  // namespace biofilm
