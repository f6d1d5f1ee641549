#pragma once

// Fixed-step trajectory integration and trajectory-pair distance checks.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "deltabk/expr.hpp"
#include "deltabk/model.hpp"
#include "deltabk/synthesis.hpp"

namespace deltabk {

// A scalar input signal: either a piecewise-constant schedule
// [(t_i, v_i)] with t_0 = 0, strictly increasing times, and value v_i held
// on [t_i, t_{i+1}), or an expression in the single variable t.
class InputSignal {
 public:
  static InputSignal constant(double value);
  static InputSignal schedule(std::vector<std::pair<double, double>> steps);
  static InputSignal expression(const std::string& text);

  double at(double t) const;
  bool piecewise_constant() const { return !expr_; }
  const std::vector<std::pair<double, double>>& steps() const {
    return steps_;
  }
  const std::string& text() const { return text_; }

  // Largest |this - other| over [0, t_end]: exact via merged breakpoints
  // when both signals are schedules, sampled on the step grid otherwise.
  double sup_difference(const InputSignal& other, double t_end,
                        double h) const;

 private:
  std::vector<std::pair<double, double>> steps_{{0.0, 0.0}};
  ExprPtr expr_;
  CompiledExpr compiled_;
  std::string text_;
};

struct TrajectoryRecord {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<Eigen::VectorXd> states;  // one per recorded grid point
  std::vector<double> inputs;           // signal value at each grid time
  // Escape handling: a computed state that is non-finite (or whose step
  // failed to evaluate) is not recorded; a finite state outside the escape
  // box is recorded, then integration stops. escape_step is the first grid
  // index that is invalid (or the index of the out-of-box state).
  bool escaped = false;
  int escape_step = -1;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string config_digest;

  double time(int k) const { return t0 + h * k; }
  int points() const { return static_cast<int>(states.size()); }
};

struct IntegrateOptions {
  std::optional<Box> escape_box;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string config_digest;
};

// Classical fixed-step 4th-order Runge-Kutta. t_end must be a whole number
// of steps h; schedule breakpoints must sit on the step grid so every step
// lies inside one constant piece (held at the step's left endpoint).
// Expression signals are evaluated at the stage times.
TrajectoryRecord integrate(const VectorField& f, const Eigen::VectorXd& x0,
                           const InputSignal& signal, double t_end, double h,
                           const IntegrateOptions& opts = {});

struct PairCheckReport {
  std::string kind;  // "decay" (shared input) or "bound" (differing inputs)
  TrajectoryRecord first;
  TrajectoryRecord second;
  std::vector<double> distance;  // psi-distance at each grid time
  std::vector<double> envelope;  // reference curve, no slack applied
  double d0 = 0.0;
  double sup_input_difference = 0.0;  // 0 for kind "decay"
  double worst_equality_gap = 0.0;    // kind "decay": max |d - envelope|
  double worst_bound_margin = 0.0;    // min(envelope + slack - d)
  double eps_equality = 0.0;          // absolute gap allowance applied
  double eps_integration = 0.0;
  bool pass = false;
};

// Shared-input pair: checks the exponential decay as an equality,
// |d(t) - e^{-lambda t / 2} d(0)| <= eps_equality_rel * d(0), and as the
// one-sided bound d(t) <= e^{-lambda t / 2} d(0) (1 + eps_integration).
PairCheckReport gas_decay_check(const SynthesizedController& ctrl,
                                const VectorField& f_closed,
                                const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& x0b,
                                const InputSignal& signal, double t_end,
                                double h, double eps_equality_rel = 1e-6,
                                double eps_integration = 1e-6);

// Differing-input pair: checks
// d(t) <= e^{-lambda t / 2} d(0)
//         + (2/lambda) (1 - e^{-lambda t / 2}) sup|u - u'|
//         + eps_integration.
PairCheckReport iss_bound_check(const SynthesizedController& ctrl,
                                const VectorField& f_closed,
                                const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& x0b,
                                const InputSignal& signal,
                                const InputSignal& signal_b, double t_end,
                                double h, double eps_integration = 1e-6);

// Header t,x1,...,xn,u; one row per grid point; %.17g; LF line endings.
std::string export_csv(const TrajectoryRecord& record);

// Inverse of export_csv for the grid, states, and inputs (metadata is not
// carried by the CSV). Single-row files parse with h = 0.
TrajectoryRecord parse_csv(const std::string& text);

}  // namespace deltabk
