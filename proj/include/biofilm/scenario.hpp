#pragma once

#include <string>
#include <vector>

#include "biofilm/config.hpp"

namespace biofilm {

/// Arrival ramp of a late planktonic species:
///   psi30 * x / (d + x),  x = (t - t1)^10,
/// zero for t <= t1. `Printed` uses d = t1^(10/t1), `Corrected` d = t1^10.
double psi3_ramp(double t, double t1, double psi30, RampVariant variant);

struct CasePreset {
  std::string id;
  ScenarioConfig cfg;
  std::vector<std::string> notes;
};

/// Preset ids accepted by build_preset.
const std::vector<std::string>& preset_ids();

/// Builds one of the three reference scenarios:
///   case1  attachment only, no colonization
///   case2  attachment and colonization for every species
///   case3  like case2 but species 3 cannot attach (v_a,3 = 0)
/// Throws UnknownPreset for any other id.
CasePreset build_preset(const std::string& id, double t1 = 0.2,
                        RampVariant variant = RampVariant::Printed);

}  // namespace biofilm
