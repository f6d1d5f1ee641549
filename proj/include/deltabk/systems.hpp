#pragma once

// Built-in example systems.

#include "deltabk/model.hpp"

namespace deltabk {

// Composite constants of the three-state synchronous generator model
// (excitation control through an amplifier of gain Kc). Signs matter:
// Vs*G_gen and I*Kc are input-channel gains and must stay nonzero, and
// sin(delta0 + x1) must stay nonzero on the validity box.
struct GeneratorParameters {
  double E = 1.0;
  double F = 1.0;
  double G_gen = -1.0;
  double I = 1.0;
  double J = 1.0;
  double Vs = 1.0;
  double Kc = 1.0;
  double delta0 = 3.14159265358979323846 / 3.0;
  double eq0 = 1.0;
  double Pm0 = 1.0;
};

// Three-state generator in strict-feedback form: power-angle deviation x1,
// rotor speed x2, quadrature-axis voltage deviation x3.
StrictFeedbackSystem generator_system(const GeneratorParameters& p = {});

// One-state integrator fixture: h1 = 0, g = 1 on [-1, 1].
ParametricStrictFeedbackSystem scalar_demo();

// Two-state fixture with one nonlinearity: h1 = sin(x1), b1 = 1, h2 = 0,
// g = 1 on [-1, 1]^2.
ParametricStrictFeedbackSystem two_state_demo();

}  // namespace deltabk
