#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "biofilm/config.hpp"
#include "biofilm/stepper.hpp"

namespace biofilm::oracle {

/// Solution in characteristic coordinates on the triangle 0 <= t0 <= t <= T,
/// stored as dense (n+1) x (n+1) row-major arrays indexed [a * (n+1) + b] with
/// t0 = a * dt and t = b * dt. Entries with a > b are unused and kept at 0.
struct CharField {
  double T{0.0};
  std::size_t n{0};
  std::vector<std::vector<double>> x;    ///< sessile concentrations rho_i f_i  [g/m^3]
  std::vector<std::vector<double>> s;    ///< substrates  [g/m^3]
  std::vector<std::vector<double>> psi;  ///< planktonic concentrations  [g/m^3]
  std::vector<double> c;                 ///< characteristic position  [m]
  std::vector<double> c_t0;              ///< d c / d t0  [m/d]
  std::vector<double> Lb;                ///< interface position L(t0), n+1 entries  [m]

  double dt() const { return T / static_cast<double>(n); }
  double time(std::size_t k) const { return k == n ? T : static_cast<double>(k) * dt(); }
  std::size_t at(std::size_t a, std::size_t b) const { return a * (n + 1) + b; }
};

/// The iterate every Picard run starts from unless another is supplied:
/// x = X0(t0), s = S*(t), psi = psi*(t), L = c = Sigma(t0), c_t0 = sigma_a(t0).
CharField zeroth_iterate(const ScenarioConfig& cfg, double T, std::size_t grid_n);

struct PicardResult {
  CharField field;
  /// Distance between successive iterates, one entry per application of the
  /// map. Each field contributes its sup-norm change divided by its sup norm.
  std::vector<double> history;
  /// The same distances in the unscaled sum-of-sup-norms.
  std::vector<double> raw_history;
  bool converged{false};
  double min_c_t0{0.0};
};

/// Fixed-point iteration of the integral system with trapezoid quadrature on
/// the triangular grid. Stops when the distance drops below picard_tol or
/// after picard_max_iter applications.
///
/// Throws NoAttachment if sigma_a vanishes somewhere on [0, T],
/// NonConvergence if the distance fails to decrease three times in a row,
/// and OutOfDomain if the converged boundary enters the detachment regime.
PicardResult picard_solve(const ScenarioConfig& cfg, double T, std::size_t grid_n,
                          const std::optional<CharField>& start = std::nullopt);

/// Scaled distance used by picard_solve: per field, the sup-norm change
/// divided by the larger sup norm, summed over all fields.
double field_distance(const CharField& u, const CharField& v);

/// Observed contraction factors d_{k+1} / d_k of a history.
std::vector<double> contraction_ratios(std::span<const double> history);

/// Integrates dz/dt = u(z, t) from z = L(t0) through the recorded velocity
/// trace (Heun steps, u interpolated linearly in z and t) and returns z at
/// each requested time. Positions are kept inside [0, L(t)].
/// Throws OutOfDomain for times outside the trace or before t0.
std::vector<double> characteristic_trace(std::span<const VelocitySample> trace, double t0,
                                         std::span<const double> sample_times);

/// Half-widths of the admissible box around the zeroth iterate.
struct Box {
  double T1{0.0};
  std::vector<double> h_x;
  std::vector<double> h_s;
  std::vector<double> h_psi;
  double h_L{0.0};
  double h_c1{0.0};
  double h_c2{0.0};
};

/// Box sized from a stepper run on [0, T1]: twice the largest observed
/// departure of each quantity from its zeroth-iterate value, with small floors
/// so no width vanishes.
Box box_from_run(const ScenarioConfig& cfg, double T1);

struct ContractionEstimate {
  std::vector<double> M_x, M_s, M_psi;
  double M_L{0.0}, M_c1{0.0}, M_c2{0.0};
  std::vector<double> lambda_x, lambda_s, lambda_psi;
  double lambda_L{0.0}, lambda_c1{0.0}, lambda_c2{0.0};
  double a{0.0};
  double b{0.0};
  double T_caps{0.0};  ///< min(T1, h/M caps)
  double T_root{0.0};  ///< positive root of a T^2 + b T = 1 (infinite when a = b = 0)
  double T_star{0.0};  ///< 0.99 * min(T_caps, T_root)
  bool unbounded_by_contraction{false};
  std::size_t samples{0};

  double Lambda(double T) const { return a * T * T + b * T; }
};

/// Positive root of a T^2 + b T = 1 for a, b >= 0; +inf when both vanish.
double contraction_root(double a, double b);

/// Bounds M and Lipschitz constants lambda of the kernels estimated by
/// deterministic random sampling of the box (symmetric difference quotients
/// along every argument), assembled into a, b and the window T_star.
ContractionEstimate estimate_contraction(const ScenarioConfig& cfg, const Box& box,
                                         std::size_t samples = 20000,
                                         std::uint64_t seed = 20190501);

struct CrossCheck {
  double x_rel{0.0};  ///< sup |x_stepper - x_oracle| / sup |x_oracle|
  double c_rel{0.0};
  double L_rel{0.0};
};

/// Runs the stepper on [0, T] with snapshots on the oracle's time grid, maps
/// it into characteristic coordinates with characteristic_trace and compares
/// x, c and L against the oracle field.
CrossCheck cross_validate(const ScenarioConfig& cfg, const CharField& field);

}  // namespace biofilm::oracle
