#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "biofilm/errors.hpp"
#include "biofilm/output.hpp"
#include "biofilm/scenario.hpp"
#include "biofilm/stepper.hpp"

using namespace biofilm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("biofilm_test_" + name);
  fs::remove_all(p);
  return p;
}

ScenarioConfig small_case2() {
  auto cfg = build_preset("case2").cfg;
  cfg.numerics.N = 20;
  cfg.horizon = 0.3;
  cfg.snapshot_times = {0.1, 0.3};
  return cfg;
}

}  // namespace

TEST_CASE("arrival ramp") {
  for (auto v : {RampVariant::Printed, RampVariant::Corrected}) {
    CHECK(psi3_ramp(0.0, 0.2, 100.0, v) == 0.0);
    CHECK(psi3_ramp(0.2, 0.2, 100.0, v) == 0.0);
    double prev = 0.0;
    for (int q = 1; q <= 200; ++q) {
      const double val = psi3_ramp(0.2 + 0.01 * q, 0.2, 100.0, v);
      CHECK(val >= prev);
      CHECK(val <= 100.0);
      prev = val;
    }
  }
  // The printed denominator is ~1e-35, so strict growth is only resolvable
  // in double precision within ~1e-3 d of the arrival time.
  double prev = 0.0;
  for (int q = 1; q <= 200; ++q) {
    const double val = psi3_ramp(0.2 + 1e-5 * q, 0.2, 100.0, RampVariant::Printed);
    CHECK(val > prev);
    prev = val;
  }
  prev = 0.0;
  for (int q = 1; q <= 200; ++q) {
    const double val = psi3_ramp(0.2 + 0.01 * q, 0.2, 100.0, RampVariant::Corrected);
    CHECK(val > prev);
    CHECK(val < 100.0);
    prev = val;
  }
  // Corrected: d = t1^10, so the value at t = 2 t1 is exactly half the plateau.
  CHECK(psi3_ramp(0.4, 0.2, 100.0, RampVariant::Corrected) == doctest::Approx(50.0).epsilon(1e-12));
  // Printed: d = 0.2^50 ~ 1.1e-35, so 0.1 d after arrival the ramp is at its plateau.
  const double d = std::pow(0.2, 50.0);
  const double x = std::pow(0.1, 10.0);
  CHECK(psi3_ramp(0.3, 0.2, 100.0, RampVariant::Printed) ==
        doctest::Approx(100.0 * x / (d + x)).epsilon(1e-12));
  CHECK(psi3_ramp(0.2000001, 0.2, 100.0, RampVariant::Printed) > 0.0);
}

TEST_CASE("presets") {
  CHECK(preset_ids() == std::vector<std::string>{"case1", "case2", "case3"});
  for (const auto& id : preset_ids()) {
    const auto p = build_preset(id);
    CHECK(p.id == id);
    const auto& c = p.cfg;
    CHECK(validate_config(c).ok());
    REQUIRE(c.n_species() == 3);
    REQUIRE(c.n_substrates() == 3);
    CHECK(c.species[0].mu_max == 0.4);
    CHECK(c.species[1].mu_max == 1.5);
    CHECK(c.species[2].mu_max == 0.5);
    CHECK(c.species[1].K == 20.0);
    CHECK(c.species[0].Y == 0.4);
    CHECK(c.species[2].Y == 0.9);
    for (const auto& sp : c.species) CHECK(sp.rho == 5000.0);
    for (const auto& sb : c.substrates) CHECK(sb.D == 1e-5);
    CHECK(c.delta == 2000.0);
    CHECK(c.bulk.s_at(1.0) == std::vector<double>{100.0, 100.0, 0.0});
    CHECK(c.bulk.psi_at(0.1) == std::vector<double>{100.0, 100.0, 0.0});
    CHECK(c.bulk.psi_at(5.0)[2] == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(c.horizon == 10.0);
    CHECK(c.snapshot_times == std::vector<double>{0.25, 0.5, 1.0, 10.0});
    CHECK(c.notes == p.notes);
    CHECK_FALSE(p.notes.empty());
  }
  const auto c1 = build_preset("case1").cfg;
  for (const auto& sp : c1.species) CHECK(sp.k_col == 0.0);
  const auto c2 = build_preset("case2").cfg;
  for (const auto& sp : c2.species) {
    CHECK(sp.v_a > 0.0);
    CHECK(sp.k_col == 2.5);
    CHECK(sp.Y_psi == 2e-7);
    CHECK(sp.D_psi == 1e-5);
  }
  const auto c3 = build_preset("case3").cfg;
  CHECK(c3.species[2].v_a == 0.0);
  CHECK(c3.species[2].k_col > 0.0);
  CHECK(c3.species[0].v_a == 0.025);

  const auto shifted = build_preset("case1", 0.5, RampVariant::Corrected).cfg;
  CHECK(shifted.bulk.psi_at(0.5)[2] == 0.0);
  CHECK(shifted.bulk.psi_at(1.0)[2] == doctest::Approx(50.0).epsilon(1e-12));

  try {
    build_preset("case4");
    FAIL("expected UnknownPreset");
  } catch (const BiofilmError& e) {
    CHECK(e.kind() == ErrorKind::UnknownPreset);
  }
  CHECK_THROWS_AS(build_preset("case1", 0.0), BiofilmError);
}

TEST_CASE("preset round trip") {
  for (const auto& id : preset_ids()) {
    const auto cfg = build_preset(id).cfg;
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
}

TEST_CASE("formatting and hashing") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  // Published FNV-1a 64-bit test vectors.
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(fnv1a("bar", fnv1a("foo")) == fnv1a("foobar"));
}

TEST_CASE("emission") {
  SUBCASE("a run without snapshots writes only the boundary history and manifest") {
    auto cfg = small_case2();
    cfg.snapshot_times.clear();
    const auto out = run(cfg);
    const auto dir = scratch_dir("empty");
    const auto b = emit(out, cfg, dir.string());
    CHECK(b.profiles_path.empty());
    CHECK_FALSE(fs::exists(dir / "profiles.csv"));
    const auto text = slurp(b.boundary_path);
    CHECK(text.rfind("t,L,sigma_a,sigma_d,u_L,regime\n", 0) == 0);
    CHECK(fs::exists(b.manifest_path));
    CHECK(b.content_hash.size() == 16);
    fs::remove_all(dir);
  }
  SUBCASE("profiles, determinism and the manifest") {
    const auto cfg = small_case2();
    const auto out = run(cfg);
    const auto d1 = scratch_dir("a");
    const auto d2 = scratch_dir("b");
    const auto b1 = emit(out, cfg, d1.string());
    const auto b2 = emit(run(cfg), cfg, d2.string());
    CHECK(b1.content_hash == b2.content_hash);
    CHECK(slurp(b1.profiles_path) == slurp(b2.profiles_path));
    CHECK(slurp(b1.boundary_path) == slurp(b2.boundary_path));
    CHECK(slurp(b1.manifest_path) == slurp(b2.manifest_path));

    const auto profiles = slurp(b1.profiles_path);
    CHECK(profiles.rfind("t,zeta,z,f1,f2,f3,S1,S2,S3,Psi1,Psi2,Psi3\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : profiles) lines += c == '\n';
    CHECK(lines == 1 + 2 * 21);

    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a(profiles, fnv1a(slurp(b1.boundary_path)))));
    CHECK(b1.content_hash == hex);

    const auto manifest = slurp(b1.manifest_path);
    CHECK(manifest.find(b1.content_hash) != std::string::npos);
    for (const auto& note : cfg.notes) CHECK(manifest.find(note) != std::string::npos);
    CHECK(load_config(b1.manifest_path) == cfg);
    fs::remove_all(d1);
    fs::remove_all(d2);
  }
  SUBCASE("unwritable destination") {
    const auto cfg = small_case2();
    RunOutput out;
    const auto blocker = scratch_dir("blocker");
    std::ofstream(blocker.string()) << "x";
    try {
      emit(out, cfg, (blocker / "sub").string());
      FAIL("expected IoFailure");
    } catch (const BiofilmError& e) {
      CHECK(e.kind() == ErrorKind::IoFailure);
    }
    fs::remove_all(blocker);
  }
}
