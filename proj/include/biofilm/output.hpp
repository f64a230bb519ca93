#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biofilm/config.hpp"
#include "biofilm/stepper.hpp"

namespace biofilm {

struct OutputBundle {
  std::string profiles_path;  ///< empty when the run has no snapshots
  std::string boundary_path;
  std::string manifest_path;
  std::string content_hash;   ///< 16 hex digits, FNV-1a over the CSV bytes
};

/// `%.17g` rendering used for every float written to disk.
std::string format_double(double v);

/// CSV text of all snapshots: header `t,zeta,z,f1..fn,S1..Sm,Psi1..Psin`,
/// then one row per node per snapshot.
std::string profiles_csv(const RunOutput& out, const ScenarioConfig& cfg);

/// CSV text of the boundary history: header `t,L,sigma_a,sigma_d,u_L,regime`.
std::string boundary_csv(const RunOutput& out);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed = 14695981039346656037ULL);

/// Writes profiles.csv (only when there are snapshots), boundary.csv and
/// manifest.txt into `dir`, creating it if needed. The manifest echoes the
/// configuration, the content hash and every assumption note; everything but
/// the configuration is commented out, so it loads back as a scenario file.
/// Throws IoFailure naming the path that could not be written.
OutputBundle emit(const RunOutput& out, const ScenarioConfig& cfg, const std::string& dir);

}  // namespace biofilm
