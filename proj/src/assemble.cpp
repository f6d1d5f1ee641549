#include "deltabk/assemble.hpp"

namespace deltabk {

GeneratorParameters generator_params(
    const std::map<std::string, double>& overrides) {
  GeneratorParameters p;
  for (const auto& [name, v] : overrides) {
    if (name == "E")
      p.E = v;
    else if (name == "F")
      p.F = v;
    else if (name == "G_gen")
      p.G_gen = v;
    else if (name == "I")
      p.I = v;
    else if (name == "J")
      p.J = v;
    else if (name == "Vs")
      p.Vs = v;
    else if (name == "Kc")
      p.Kc = v;
    else if (name == "delta0")
      p.delta0 = v;
    else if (name == "eq0")
      p.eq0 = v;
    else if (name == "Pm0")
      p.Pm0 = v;
    else
      throw ConfigError("unknown generator parameter '" + name + "'");
  }
  return p;
}

BuiltSystem build_system(const SystemSpec& spec) {
  BuiltSystem out;
  if (!spec.builtin.empty()) {
    if (spec.builtin == "generator") {
      out.strict = generator_system(generator_params(spec.params));
      out.kind = "strict-feedback";
    } else if (spec.builtin == "scalar-demo") {
      out.parametric = scalar_demo();
      out.kind = "gain-normalized cascade";
    } else if (spec.builtin == "two-state-demo") {
      out.parametric = two_state_demo();
      out.kind = "gain-normalized cascade";
    } else {
      throw ConfigError("unknown builtin system '" + spec.builtin + "'");
    }
  } else if (spec.strict) {
    out.strict = StrictFeedbackSystem::create(spec.n, spec.h, spec.g,
                                              spec.params, spec.box);
    out.kind = "strict-feedback";
  } else {
    if (spec.g.size() != 1)
      throw ConfigError("gain-normalized system needs exactly one g");
    out.parametric = ParametricStrictFeedbackSystem::create(
        spec.n, spec.h, spec.b, spec.g[0], spec.params, spec.box);
    out.kind = "gain-normalized cascade";
  }
  if (out.strict) {
    out.box = out.strict->box;
    out.n = out.strict->n;
  } else {
    out.box = out.parametric->box;
    out.n = out.parametric->n;
  }
  return out;
}

SynthesizedController make_controller(const BuiltSystem& bs, double lambda) {
  return bs.strict ? strict_feedback_controller(*bs.strict, lambda)
                   : synthesize(*bs.parametric, lambda);
}

}  // namespace deltabk
