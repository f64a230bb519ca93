#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "biofilm/config.hpp"
#include "biofilm/errors.hpp"
#include "biofilm/oracle.hpp"
#include "biofilm/output.hpp"
#include "biofilm/scenario.hpp"
#include "biofilm/stepper.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitUsage = 64;

int exit_code(biofilm::ErrorKind kind) {
  using biofilm::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::ParseError:
      return kExitInvalid;
    case ErrorKind::UnknownPreset:
      return kExitUsage;
    default:
      return kExitNumerical;
  }
}

biofilm::RampVariant parse_ramp(const std::string& s) {
  return s == "corrected" ? biofilm::RampVariant::Corrected : biofilm::RampVariant::Printed;
}

struct PresetArgs {
  std::string preset;
  double t1{0.2};
  std::string ramp{"printed"};

  void attach(CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--preset", preset, "case1 | case2 | case3");
    if (required) opt->required();
    cmd->add_option("--t1", t1, "arrival time of species 3 in the bulk [d]")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--ramp", ramp, "ramp denominator variant")
        ->check(CLI::IsMember({"printed", "corrected"}));
  }

  biofilm::CasePreset build() const { return biofilm::build_preset(preset, t1, parse_ramp(ramp)); }
};

void print_double(const char* name, double v) { std::printf("%s = %.10g\n", name, v); }

int cmd_run(const PresetArgs& p, const std::string& config, const std::string& out_dir,
            const std::string& transport) {
  biofilm::ScenarioConfig cfg;
  if (!config.empty()) {
    cfg = biofilm::load_config(config);
  } else if (!p.preset.empty()) {
    cfg = p.build().cfg;
  } else {
    std::cerr << "run: either --preset or --config is required\n";
    return kExitUsage;
  }
  if (!transport.empty())
    cfg.numerics.transport = transport == "upwind" ? biofilm::TransportScheme::Upwind
                                                   : biofilm::TransportScheme::AntiDiffusive;
  const auto report = biofilm::validate_config(cfg);
  if (!report.ok()) {
    std::cerr << report.to_string();
    return kExitInvalid;
  }
  const auto out = biofilm::run(cfg);
  const auto bundle = biofilm::emit(out, cfg, out_dir);
  std::printf("steps = %zu\n", out.steps);
  std::printf("snapshots = %zu\n", out.snapshots.size());
  if (!out.boundary.empty()) print_double("final_L", out.boundary.back().L);
  print_double("max_sum_f_drift", out.max_drift);
  std::printf("content_hash = %s\n", bundle.content_hash.c_str());
  if (out.under_resolved_steps > 0)
    std::fprintf(stderr,
                 "warning: planktonic boundary layer under-resolved on %zu steps; "
                 "Psi profiles near the interface are grid-limited\n",
                 out.under_resolved_steps);
  return kExitOk;
}

int cmd_oracle(const PresetArgs& p, double horizon, std::size_t grid) {
  const auto preset = p.build();
  const auto res = biofilm::oracle::picard_solve(preset.cfg, horizon, grid);
  std::printf("converged = %s\n", res.converged ? "yes" : "no");
  std::printf("iterations = %zu\n", res.history.size());
  for (std::size_t k = 0; k < res.history.size(); ++k)
    std::printf("distance[%zu] = %.6e\n", k + 1, res.history[k]);
  const auto ratios = biofilm::oracle::contraction_ratios(res.history);
  for (std::size_t k = 0; k < ratios.size(); ++k)
    std::printf("ratio[%zu] = %.6e\n", k + 2, ratios[k]);
  print_double("L_end", res.field.Lb.back());
  print_double("min_c_t0", res.min_c_t0);
  const auto cc = biofilm::oracle::cross_validate(preset.cfg, res.field);
  print_double("cross_x_rel", cc.x_rel);
  print_double("cross_c_rel", cc.c_rel);
  print_double("cross_L_rel", cc.L_rel);
  return res.converged ? kExitOk : kExitNumerical;
}

int cmd_window(const PresetArgs& p, double T1, std::size_t samples) {
  const auto preset = p.build();
  const auto box = biofilm::oracle::box_from_run(preset.cfg, T1);
  const auto est = biofilm::oracle::estimate_contraction(preset.cfg, box, samples);
  std::printf("samples = %zu\n", est.samples);
  print_double("T1", box.T1);
  for (std::size_t i = 0; i < est.M_x.size(); ++i)
    std::printf("M_%zu = %.6g  lambda_%zu = %.6g\n", i + 1, est.M_x[i], i + 1, est.lambda_x[i]);
  for (std::size_t j = 0; j < est.M_s.size(); ++j)
    std::printf("M_s%zu = %.6g  lambda_s%zu = %.6g\n", j + 1, est.M_s[j], j + 1, est.lambda_s[j]);
  for (std::size_t i = 0; i < est.M_psi.size(); ++i)
    std::printf("M_psi%zu = %.6g  lambda_psi%zu = %.6g\n", i + 1, est.M_psi[i], i + 1,
                est.lambda_psi[i]);
  std::printf("M_L = %.6g  lambda_L = %.6g\n", est.M_L, est.lambda_L);
  std::printf("M_c1 = %.6g  lambda_c1 = %.6g\n", est.M_c1, est.lambda_c1);
  std::printf("M_c2 = %.6g  lambda_c2 = %.6g\n", est.M_c2, est.lambda_c2);
  print_double("a", est.a);
  print_double("b", est.b);
  print_double("T_caps", est.T_caps);
  if (est.unbounded_by_contraction) std::printf("T_root = inf (unbounded by contraction)\n");
  else print_double("T_root", est.T_root);
  print_double("T_star", est.T_star);
  print_double("Lambda(T_star)", est.Lambda(est.T_star));
  return est.T_star > 0.0 && est.Lambda(est.T_star) < 1.0 ? kExitOk : kExitNumerical;
}

int cmd_validate(const std::string& path) {
  const auto cfg = biofilm::load_config(path);
  const auto report = biofilm::validate_config(cfg);
  if (report.ok()) {
    std::printf("ok\n");
    return kExitOk;
  }
  std::cerr << report.to_string();
  return kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-dimensional multispecies biofilm simulator"};
  app.require_subcommand(1);

  PresetArgs run_p, oracle_p, window_p;
  std::string config, out_dir, transport;
  auto* run = app.add_subcommand("run", "integrate a scenario and write CSV output");
  run_p.attach(run, false);
  run->add_option("--config", config, "scenario file (overrides --preset)");
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--transport", transport, "transport scheme")
      ->check(CLI::IsMember({"anti-diffusive", "upwind"}));

  double horizon = 0.02;
  std::size_t grid = 20;
  auto* orc = app.add_subcommand("oracle", "Picard solve in characteristic coordinates");
  oracle_p.attach(orc, true);
  orc->add_option("--horizon", horizon, "oracle horizon T_o [d]")->required()->check(CLI::PositiveNumber);
  orc->add_option("--grid", grid, "intervals per time axis")->required()->check(CLI::Range(2, 4000));

  double T1 = 0.02;
  std::size_t samples = 20000;
  auto* win = app.add_subcommand("window", "estimate the contraction window");
  window_p.attach(win, true);
  win->add_option("--window", T1, "T1, end of the sampled window [d]")->check(CLI::PositiveNumber);
  win->add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "check a scenario file");
  val->add_option("--config", validate_path, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_p, config, out_dir, transport);
    if (*orc) return cmd_oracle(oracle_p, horizon, grid);
    if (*win) return cmd_window(window_p, T1, samples);
    if (*val) return cmd_validate(validate_path);
  } catch (const biofilm::BiofilmError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  }
  return kExitUsage;
}
