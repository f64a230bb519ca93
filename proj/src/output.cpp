#include "biofilm/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "biofilm/errors.hpp"

namespace biofilm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string profiles_csv(const RunOutput& out, const ScenarioConfig& cfg) {
  std::string s = "t,zeta,z";
  for (std::size_t i = 1; i <= cfg.n_species(); ++i) s += ",f" + std::to_string(i);
  for (std::size_t j = 1; j <= cfg.n_substrates(); ++j) s += ",S" + std::to_string(j);
  for (std::size_t i = 1; i <= cfg.n_species(); ++i) s += ",Psi" + std::to_string(i);
  s += '\n';
  for (const auto& snap : out.snapshots) {
    const auto& st = snap.state;
    for (std::size_t k = 0; k < st.nodes(); ++k) {
      s += format_double(st.t) + ',' + format_double(st.zeta[k]) + ',' + format_double(st.z(k));
      for (const auto& row : st.f) s += ',' + format_double(row[k]);
      for (const auto& row : st.S) s += ',' + format_double(row[k]);
      for (const auto& row : st.Psi) s += ',' + format_double(row[k]);
      s += '\n';
    }
  }
  return s;
}

std::string boundary_csv(const RunOutput& out) {
  std::string s = "t,L,sigma_a,sigma_d,u_L,regime\n";
  for (const auto& r : out.boundary) {
    s += format_double(r.t) + ',' + format_double(r.L) + ',' + format_double(r.sigma_a) + ',' +
         format_double(r.sigma_d) + ',' + format_double(r.u_L) + ',' + to_string(r.regime) + '\n';
  }
  return s;
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw BiofilmError(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
  os << text;
  os.close();
  if (!os) throw BiofilmError(ErrorKind::IoFailure, "write to '" + path.string() + "' failed");
}

}  // namespace

OutputBundle emit(const RunOutput& out, const ScenarioConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw BiofilmError(ErrorKind::IoFailure, "cannot create '" + dir + "': " + ec.message());

  OutputBundle b;
  const std::string boundary = boundary_csv(out);
  std::string profiles;
  std::uint64_t h = fnv1a(boundary);
  if (!out.snapshots.empty()) {
    profiles = profiles_csv(out, cfg);
    h = fnv1a(profiles, h);
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  b.content_hash = hex;

  const fs::path root(dir);
  if (!out.snapshots.empty()) {
    b.profiles_path = (root / "profiles.csv").string();
    write_file(b.profiles_path, profiles);
  }
  b.boundary_path = (root / "boundary.csv").string();
  write_file(b.boundary_path, boundary);

  std::string m = "# run manifest\n";
  m += "# content_hash = " + b.content_hash + "\n";
  m += "# steps = " + std::to_string(out.steps) + "\n";
  m += "# snapshots = " + std::to_string(out.snapshots.size()) + "\n";
  m += "# max_sum_f_drift = " + format_double(out.max_drift) + "\n";
  m += "# max_front_width = " + std::to_string(out.max_front_width) + "\n";
  m += "# planktonic_under_resolved_steps = " + std::to_string(out.under_resolved_steps) + "\n";
  m += "#\n# assumptions\n";
  for (const auto& note : cfg.notes) m += "# - " + note + "\n";
  m += "#\n# configuration (loadable with --config)\n";
  m += serialize_config(cfg);
  b.manifest_path = (root / "manifest.txt").string();
  write_file(b.manifest_path, m);
  return b;
}

}  // namespace biofilm
