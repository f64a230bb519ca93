#include "biofilm/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "biofilm/errors.hpp"
#include "biofilm/scenario.hpp"

namespace biofilm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoAttachment: return "NoAttachment";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::NumericalBlowup: return "NumericalBlowup";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Bulk traces

TraceDescriptor TraceDescriptor::constant(double v) {
  TraceDescriptor d;
  d.kind = Kind::Constant;
  d.value = v;
  return d;
}

TraceDescriptor TraceDescriptor::ramp(double t1, double plateau, RampVariant variant) {
  TraceDescriptor d;
  d.kind = Kind::Ramp;
  d.value = plateau;
  d.t1 = t1;
  d.variant = variant;
  return d;
}

TraceDescriptor TraceDescriptor::table(std::vector<double> times, std::vector<double> values) {
  TraceDescriptor d;
  d.kind = Kind::Table;
  d.times = std::move(times);
  d.values = std::move(values);
  return d;
}

double TraceDescriptor::operator()(double t) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Ramp:
      return psi3_ramp(t, t1, value, variant);
    case Kind::Table: {
      if (times.empty()) return 0.0;
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t k = static_cast<std::size_t>(it - times.begin());
      const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
      return (1.0 - w) * values[k - 1] + w * values[k];
    }
  }
  return 0.0;
}

std::vector<double> BulkTraces::psi_at(double t) const {
  std::vector<double> out;
  out.reserve(psi_star.size());
  for (const auto& d : psi_star) out.push_back(d(t));
  return out;
}

std::vector<double> BulkTraces::s_at(double t) const {
  std::vector<double> out;
  out.reserve(s_star.size());
  for (const auto& d : s_star) out.push_back(d(t));
  return out;
}

Stoichiometry Stoichiometry::builtin3() {
  Stoichiometry s;
  s.kind = Kind::Builtin3;
  s.growth_substrate = {0, 1, 2};
  s.coeffs = {{-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, {1.0, 0.0, -1.0}};
  return s;
}

// ---------------------------------------------------------------------------
// Validation

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (const auto& v : violations) os << v.field << ": " << v.message << '\n';
  return os.str();
}

namespace {

void check_trace(const TraceDescriptor& d, const std::string& field,
                 std::vector<Violation>& out) {
  using Kind = TraceDescriptor::Kind;
  switch (d.kind) {
    case Kind::Constant:
      if (!(d.value >= 0.0)) out.push_back({field, "value must be >= 0"});
      break;
    case Kind::Ramp:
      if (!(d.t1 > 0.0)) out.push_back({field, "ramp t1 must be > 0"});
      if (!(d.value >= 0.0)) out.push_back({field, "ramp plateau must be >= 0"});
      break;
    case Kind::Table:
      if (d.times.empty() || d.times.size() != d.values.size()) {
        out.push_back({field, "table needs matching non-empty times and values"});
        break;
      }
      for (std::size_t k = 1; k < d.times.size(); ++k)
        if (!(d.times[k] > d.times[k - 1]))
          out.push_back({field, "table times must be strictly increasing"});
      for (double v : d.values)
        if (!(v >= 0.0)) out.push_back({field, "table values must be >= 0"});
      break;
  }
}

}  // namespace

ValidationReport validate_config(const ScenarioConfig& cfg) {
  std::vector<Violation> out;
  const std::size_t n = cfg.species.size();
  const std::size_t m = cfg.substrates.size();
  if (n < 1) out.push_back({"species", "need at least one species"});
  if (m < 1) out.push_back({"substrates", "need at least one substrate"});

  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = cfg.species[i];
    const std::string p = "species[" + std::to_string(i) + "].";
    if (!(s.mu_max >= 0.0)) out.push_back({p + "mu_max", "mu_max must be >= 0"});
    if (!(s.K > 0.0)) out.push_back({p + "K", "K must be > 0"});
    if (!(s.Y > 0.0)) out.push_back({p + "Y", "Y must be > 0"});
    if (!(s.rho > 0.0)) out.push_back({p + "rho", "rho must be > 0"});
    if (!(s.v_a >= 0.0)) out.push_back({p + "v_a", "v_a must be >= 0"});
    if (!(s.k_col >= 0.0)) out.push_back({p + "k_col", "k_col must be >= 0"});
    if (!(s.Y_psi > 0.0)) out.push_back({p + "Y_psi", "Y_psi must be > 0"});
    if (!(s.D_psi > 0.0)) out.push_back({p + "D_psi", "D_psi must be > 0"});
  }
  for (std::size_t j = 0; j < m; ++j)
    if (!(cfg.substrates[j].D > 0.0))
      out.push_back({"substrates[" + std::to_string(j) + "].D", "D must be > 0"});

  if (!(cfg.delta >= 0.0)) out.push_back({"delta", "delta must be >= 0"});
  if (!(cfg.horizon >= 0.0)) out.push_back({"horizon", "horizon must be >= 0"});

  if (cfg.bulk.psi_star.size() != n)
    out.push_back({"bulk.psi_star", "need one trace per species"});
  if (cfg.bulk.s_star.size() != m)
    out.push_back({"bulk.s_star", "need one trace per substrate"});
  for (std::size_t i = 0; i < cfg.bulk.psi_star.size(); ++i)
    check_trace(cfg.bulk.psi_star[i], "bulk.psi_star[" + std::to_string(i) + "]", out);
  for (std::size_t j = 0; j < cfg.bulk.s_star.size(); ++j)
    check_trace(cfg.bulk.s_star[j], "bulk.s_star[" + std::to_string(j) + "]", out);

  const auto& st = cfg.stoichiometry;
  if (st.growth_substrate.size() != n) {
    out.push_back({"stoichiometry.growth_substrate", "need one entry per species"});
  } else {
    for (auto g : st.growth_substrate)
      if (g >= m) out.push_back({"stoichiometry.growth_substrate", "substrate index out of range"});
  }
  if (st.coeffs.size() != m ||
      std::any_of(st.coeffs.begin(), st.coeffs.end(),
                  [n](const auto& row) { return row.size() != n; }))
    out.push_back({"stoichiometry.coeffs", "coefficient matrix must be m x n"});

  const auto& nm = cfg.numerics;
  if (nm.N < 8) out.push_back({"numerics.N", "N must be >= 8"});
  if (!(nm.dt_max > 0.0)) out.push_back({"numerics.dt_max", "dt_max must be > 0"});
  if (!(nm.cfl > 0.0 && nm.cfl <= 1.0)) out.push_back({"numerics.cfl", "cfl must be in (0, 1]"});
  if (!(nm.L_eps > 0.0)) out.push_back({"numerics.L_eps", "L_eps must be > 0"});
  if (!(nm.newton_tol > 0.0)) out.push_back({"numerics.newton_tol", "newton_tol must be > 0"});
  if (nm.newton_max_iter < 1)
    out.push_back({"numerics.newton_max_iter", "newton_max_iter must be >= 1"});
  if (!(nm.picard_tol > 0.0)) out.push_back({"numerics.picard_tol", "picard_tol must be > 0"});
  if (nm.picard_max_iter < 1)
    out.push_back({"numerics.picard_max_iter", "picard_max_iter must be >= 1"});

  for (std::size_t k = 0; k < cfg.snapshot_times.size(); ++k) {
    const double t = cfg.snapshot_times[k];
    if (!(t >= 0.0 && t <= cfg.horizon))
      out.push_back({"snapshot_times", "snapshot outside horizon"});
    if (k > 0 && !(t > cfg.snapshot_times[k - 1]))
      out.push_back({"snapshot_times", "snapshot times must be sorted ascending"});
  }
  return ValidationReport{std::move(out)};
}

void require_valid(const ScenarioConfig& cfg) {
  const auto report = validate_config(cfg);
  if (!report.ok()) throw BiofilmError(ErrorKind::InvalidConfig, report.to_string());
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ", ";
    out += fmt(xs[k]);
  }
  return out;
}

template <typename F>
std::string join_species(const ScenarioConfig& cfg, F field) {
  std::vector<double> xs;
  for (const auto& s : cfg.species) xs.push_back(field(s));
  return join(xs);
}

const char* variant_name(RampVariant v) {
  return v == RampVariant::Printed ? "printed" : "corrected";
}

std::string trace_text(const TraceDescriptor& d) {
  switch (d.kind) {
    case TraceDescriptor::Kind::Constant:
      return "constant(" + fmt(d.value) + ")";
    case TraceDescriptor::Kind::Ramp:
      return "ramp(t1=" + fmt(d.t1) + "; plateau=" + fmt(d.value) +
             "; variant=" + variant_name(d.variant) + ")";
    case TraceDescriptor::Kind::Table: {
      std::string s = "table(";
      for (std::size_t k = 0; k < d.times.size(); ++k) {
        if (k) s += "; ";
        s += fmt(d.times[k]) + ":" + fmt(d.values[k]);
      }
      return s + ")";
    }
  }
  return {};
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw BiofilmError(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, std::size_t line) {
  const std::string t = trim(text);
  if (t.empty()) parse_fail(line, "empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) parse_fail(line, "bad number '" + t + "'");
  return v;
}

std::size_t parse_count(const std::string& text, std::size_t line) {
  const double v = parse_double(text, line);
  if (v < 0 || v != std::floor(v)) parse_fail(line, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::vector<double> parse_list(const std::string& text, std::size_t line) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, line));
  return out;
}

RampVariant parse_variant(const std::string& s, std::size_t line) {
  if (s == "printed") return RampVariant::Printed;
  if (s == "corrected") return RampVariant::Corrected;
  parse_fail(line, "unknown ramp variant '" + s + "'");
}

TraceDescriptor parse_trace(const std::string& text, std::size_t line) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')') parse_fail(line, "bad trace '" + t + "'");
  const std::string kind = trim(t.substr(0, open));
  const std::string body = t.substr(open + 1, t.size() - open - 2);

  std::vector<std::string> parts;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ';')) parts.push_back(trim(item));

  if (kind == "constant") {
    if (parts.size() != 1) parse_fail(line, "constant() takes one value");
    return TraceDescriptor::constant(parse_double(parts[0], line));
  }
  if (kind == "ramp") {
    std::map<std::string, std::string> kv;
    for (const auto& p : parts) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) parse_fail(line, "ramp() arguments are key=value");
      kv[trim(p.substr(0, eq))] = trim(p.substr(eq + 1));
    }
    if (!kv.count("t1") || !kv.count("plateau")) parse_fail(line, "ramp() needs t1 and plateau");
    const RampVariant v = kv.count("variant") ? parse_variant(kv["variant"], line)
                                               : RampVariant::Printed;
    return TraceDescriptor::ramp(parse_double(kv["t1"], line), parse_double(kv["plateau"], line),
                                 v);
  }
  if (kind == "table") {
    std::vector<double> ts, vs;
    for (const auto& p : parts) {
      const auto colon = p.find(':');
      if (colon == std::string::npos) parse_fail(line, "table() entries are time:value");
      ts.push_back(parse_double(p.substr(0, colon), line));
      vs.push_back(parse_double(p.substr(colon + 1), line));
    }
    return TraceDescriptor::table(std::move(ts), std::move(vs));
  }
  parse_fail(line, "unknown trace kind '" + kind + "'");
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "# biofilm scenario\n";
  os << "species.count = " << cfg.species.size() << '\n';
  os << "species.mu_max = " << join_species(cfg, [](auto& s) { return s.mu_max; }) << '\n';
  os << "species.K = " << join_species(cfg, [](auto& s) { return s.K; }) << '\n';
  os << "species.Y = " << join_species(cfg, [](auto& s) { return s.Y; }) << '\n';
  os << "species.rho = " << join_species(cfg, [](auto& s) { return s.rho; }) << '\n';
  os << "species.v_a = " << join_species(cfg, [](auto& s) { return s.v_a; }) << '\n';
  os << "species.k_col = " << join_species(cfg, [](auto& s) { return s.k_col; }) << '\n';
  os << "species.Y_psi = " << join_species(cfg, [](auto& s) { return s.Y_psi; }) << '\n';
  os << "species.D_psi = " << join_species(cfg, [](auto& s) { return s.D_psi; }) << '\n';

  std::vector<double> dj;
  for (const auto& s : cfg.substrates) dj.push_back(s.D);
  os << "substrates.count = " << cfg.substrates.size() << '\n';
  os << "substrates.D = " << join(dj) << '\n';

  os << "model.delta = " << fmt(cfg.delta) << '\n';
  if (cfg.stoichiometry.kind == Stoichiometry::Kind::Builtin3) {
    os << "model.stoichiometry = builtin3\n";
  } else {
    os << "model.stoichiometry = matrix\n";
    std::vector<double> gs;
    for (auto g : cfg.stoichiometry.growth_substrate) gs.push_back(static_cast<double>(g + 1));
    os << "stoichiometry.growth_substrate = " << join(gs) << '\n';
    std::vector<double> flat;
    for (const auto& row : cfg.stoichiometry.coeffs) flat.insert(flat.end(), row.begin(), row.end());
    os << "stoichiometry.coeffs = " << join(flat) << '\n';
  }

  for (std::size_t i = 0; i < cfg.bulk.psi_star.size(); ++i)
    os << "bulk.psi_star." << i + 1 << " = " << trace_text(cfg.bulk.psi_star[i]) << '\n';
  for (std::size_t j = 0; j < cfg.bulk.s_star.size(); ++j)
    os << "bulk.s_star." << j + 1 << " = " << trace_text(cfg.bulk.s_star[j]) << '\n';

  const auto& nm = cfg.numerics;
  os << "numerics.N = " << nm.N << '\n';
  os << "numerics.dt_max = " << fmt(nm.dt_max) << '\n';
  os << "numerics.cfl = " << fmt(nm.cfl) << '\n';
  os << "numerics.L_eps = " << fmt(nm.L_eps) << '\n';
  os << "numerics.newton_tol = " << fmt(nm.newton_tol) << '\n';
  os << "numerics.newton_max_iter = " << nm.newton_max_iter << '\n';
  os << "numerics.picard_tol = " << fmt(nm.picard_tol) << '\n';
  os << "numerics.picard_max_iter = " << nm.picard_max_iter << '\n';
  os << "numerics.transport = "
     << (nm.transport == TransportScheme::AntiDiffusive ? "antidiffusive" : "upwind") << '\n';

  os << "run.horizon = " << fmt(cfg.horizon) << '\n';
  os << "run.snapshot_times = " << join(cfg.snapshot_times) << '\n';
  for (std::size_t k = 0; k < cfg.notes.size(); ++k)
    os << "meta.note." << k + 1 << " = " << cfg.notes[k] << '\n';
  return os.str();
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  cfg.stoichiometry = Stoichiometry::builtin3();

  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  std::istringstream is(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (kv.count(key)) parse_fail(lineno, "duplicate key '" + key + "'");
    kv[key] = {trim(line.substr(eq + 1)), lineno};
  }

  auto take = [&](const std::string& key) -> std::optional<std::pair<std::string, std::size_t>> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };

  std::size_t n = 0, m = 0;
  if (auto v = take("species.count")) n = parse_count(v->first, v->second);
  if (auto v = take("substrates.count")) m = parse_count(v->first, v->second);
  cfg.species.resize(n);
  cfg.substrates.resize(m);

  auto species_list = [&](const std::string& key, double SpeciesParams::*member) {
    auto v = take(key);
    if (!v) return;
    const auto xs = parse_list(v->first, v->second);
    if (xs.size() != n) parse_fail(v->second, key + " needs " + std::to_string(n) + " values");
    for (std::size_t i = 0; i < n; ++i) cfg.species[i].*member = xs[i];
  };
  species_list("species.mu_max", &SpeciesParams::mu_max);
  species_list("species.K", &SpeciesParams::K);
  species_list("species.Y", &SpeciesParams::Y);
  species_list("species.rho", &SpeciesParams::rho);
  species_list("species.v_a", &SpeciesParams::v_a);
  species_list("species.k_col", &SpeciesParams::k_col);
  species_list("species.Y_psi", &SpeciesParams::Y_psi);
  species_list("species.D_psi", &SpeciesParams::D_psi);

  if (auto v = take("substrates.D")) {
    const auto xs = parse_list(v->first, v->second);
    if (xs.size() != m) parse_fail(v->second, "substrates.D needs " + std::to_string(m) + " values");
    for (std::size_t j = 0; j < m; ++j) cfg.substrates[j].D = xs[j];
  }

  if (auto v = take("model.delta")) cfg.delta = parse_double(v->first, v->second);
  if (auto v = take("model.stoichiometry")) {
    if (v->first == "builtin3") {
      cfg.stoichiometry = Stoichiometry::builtin3();
    } else if (v->first == "matrix") {
      cfg.stoichiometry = Stoichiometry{};
      cfg.stoichiometry.kind = Stoichiometry::Kind::Matrix;
      auto g = take("stoichiometry.growth_substrate");
      auto c = take("stoichiometry.coeffs");
      if (!g || !c) parse_fail(v->second, "matrix stoichiometry needs growth_substrate and coeffs");
      for (double x : parse_list(g->first, g->second)) {
        if (x < 1 || x != std::floor(x)) parse_fail(g->second, "growth_substrate is 1-based");
        cfg.stoichiometry.growth_substrate.push_back(static_cast<std::size_t>(x) - 1);
      }
      const auto flat = parse_list(c->first, c->second);
      if (flat.size() != n * m) parse_fail(c->second, "coeffs needs m*n values");
      cfg.stoichiometry.coeffs.assign(m, std::vector<double>(n));
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) cfg.stoichiometry.coeffs[j][i] = flat[j * n + i];
    } else {
      parse_fail(v->second, "unknown stoichiometry '" + v->first + "'");
    }
  }

  cfg.bulk.psi_star.assign(n, TraceDescriptor::constant(0.0));
  cfg.bulk.s_star.assign(m, TraceDescriptor::constant(0.0));
  for (std::size_t i = 0; i < n; ++i)
    if (auto v = take("bulk.psi_star." + std::to_string(i + 1)))
      cfg.bulk.psi_star[i] = parse_trace(v->first, v->second);
  for (std::size_t j = 0; j < m; ++j)
    if (auto v = take("bulk.s_star." + std::to_string(j + 1)))
      cfg.bulk.s_star[j] = parse_trace(v->first, v->second);

  auto& nm = cfg.numerics;
  if (auto v = take("numerics.N")) nm.N = parse_count(v->first, v->second);
  if (auto v = take("numerics.dt_max")) nm.dt_max = parse_double(v->first, v->second);
  if (auto v = take("numerics.cfl")) nm.cfl = parse_double(v->first, v->second);
  if (auto v = take("numerics.L_eps")) nm.L_eps = parse_double(v->first, v->second);
  if (auto v = take("numerics.newton_tol")) nm.newton_tol = parse_double(v->first, v->second);
  if (auto v = take("numerics.newton_max_iter"))
    nm.newton_max_iter = parse_count(v->first, v->second);
  if (auto v = take("numerics.picard_tol")) nm.picard_tol = parse_double(v->first, v->second);
  if (auto v = take("numerics.picard_max_iter"))
    nm.picard_max_iter = parse_count(v->first, v->second);
  if (auto v = take("numerics.transport")) {
    if (v->first == "antidiffusive") nm.transport = TransportScheme::AntiDiffusive;
    else if (v->first == "upwind") nm.transport = TransportScheme::Upwind;
    else parse_fail(v->second, "unknown transport scheme '" + v->first + "'");
  }

  if (auto v = take("run.horizon")) cfg.horizon = parse_double(v->first, v->second);
  if (auto v = take("run.snapshot_times")) cfg.snapshot_times = parse_list(v->first, v->second);

  for (std::size_t k = 1;; ++k) {
    auto v = take("meta.note." + std::to_string(k));
    if (!v) break;
    cfg.notes.push_back(v->first);
  }

  if (!kv.empty()) {
    const auto& [key, val] = *kv.begin();
    parse_fail(val.second, "unknown key '" + key + "'");
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BiofilmError(ErrorKind::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace biofilm
