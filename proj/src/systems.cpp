#include "deltabk/systems.hpp"

#include <cmath>

namespace deltabk {

StrictFeedbackSystem generator_system(const GeneratorParameters& p) {
  if (p.Vs * p.G_gen == 0.0)
    throw ConfigError("generator requires Vs*G_gen to be nonzero");
  if (p.I == 0.0) throw ConfigError("generator requires I to be nonzero");
  if (p.Kc == 0.0) throw ConfigError("generator requires Kc to be nonzero");
  const std::map<std::string, double> params = {
      {"E", p.E},     {"F", p.F},       {"G_gen", p.G_gen}, {"I", p.I},
      {"J", p.J},     {"Vs", p.Vs},     {"Kc", p.Kc},
      {"delta0", p.delta0}, {"eq0", p.eq0}, {"Pm0", p.Pm0}};
  const Box box{{{-0.8, 0.8}, {-1.0, 1.0}, {-1.0, 1.0}}};
  return StrictFeedbackSystem::create(
      3,
      {"0", "-E*x2 + F*Pm0 + Vs*G_gen*eq0*sin(delta0 + x1)",
       "-I*x3 + J*Vs*sin(delta0 + x1)*x2 - I*eq0"},
      {"1", "Vs*G_gen*sin(delta0 + x1)", "I*Kc"}, params, box);
}

ParametricStrictFeedbackSystem scalar_demo() {
  return ParametricStrictFeedbackSystem::create(1, {"0"}, {}, "1", {},
                                                Box{{{-1.0, 1.0}}});
}

ParametricStrictFeedbackSystem two_state_demo() {
  return ParametricStrictFeedbackSystem::create(
      2, {"sin(x1)", "0"}, {1.0}, "1", {},
      Box{{{-1.0, 1.0}, {-1.0, 1.0}}});
}

}  // namespace deltabk
