#pragma once

// Turns a validated SystemSpec into a live system and a controller. Shared
// by the command layer and the python module.

#include <map>
#include <optional>
#include <string>

#include "deltabk/config.hpp"
#include "deltabk/synthesis.hpp"
#include "deltabk/systems.hpp"

namespace deltabk {

struct BuiltSystem {
  std::string kind;  // "strict-feedback" | "gain-normalized cascade"
  std::optional<StrictFeedbackSystem> strict;
  std::optional<ParametricStrictFeedbackSystem> parametric;
  Box box;
  int n = 0;
};

// Defaults overlaid with the named entries; unknown names are rejected.
GeneratorParameters generator_params(
    const std::map<std::string, double>& overrides);

BuiltSystem build_system(const SystemSpec& spec);

SynthesizedController make_controller(const BuiltSystem& bs, double lambda);

}  // namespace deltabk
