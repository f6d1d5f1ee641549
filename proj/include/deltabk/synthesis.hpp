#pragma once

#include <memory>
#include <optional>

#include "deltabk/model.hpp"

namespace deltabk {

// Invertible change of state coordinates, evaluable over nested duals.
struct CoordinateChange {
  std::function<ScalarVec(const ScalarVec&)> forward;
  std::function<ScalarVec(const ScalarVec&)> inverse;
};

// Riemannian metric candidate as a field of symmetric matrices.
struct MetricField {
  enum class Provenance { recursive, psi_jacobian, pullback, identity };
  int n = 0;
  Provenance provenance = Provenance::identity;
  std::function<ScalarMat(const ScalarVec&)> eval;
  Eigen::MatrixXd at(const Eigen::VectorXd& x) const;
  static MetricField identity(int n);
};

// Product of the recursive design: virtual controls, stage controls, the full
// feedback law, and the flattening map psi, all as closures over nested duals
// (derivatives of earlier stages are taken on demand, never symbolically).
struct SynthesizedController {
  int n = 0;
  double lambda = 2.0;
  ParametricField field;  // the cascade-form field the design ran on

  // phi[l] is the l-th virtual control, l = 0..n-1; phi[0] is identically 0.
  std::vector<ScalarFn> phi;
  // kseq[l-1] is the l-th stage control k_l, l = 1..n. Stage controls never
  // read the external input; it enters only through `control`.
  std::vector<ScalarFn> kseq;

  // Set when the design went through a gain-normalizing change of
  // coordinates; `control`, `psi` and `lyapunov` then accept states of the
  // original system and map them first.
  std::optional<CoordinateChange> coordinate_map;
  VectorField native_field;  // the field `control` actually drives

  // u = (k_n(x) - h_n(x)) / g(x) + uhat / g(x), in native coordinates.
  DualScalar control(const ScalarVec& x, const DualScalar& uhat) const;
  double control(const Eigen::VectorXd& x, double uhat) const;

  // psi composed with the coordinate map when one is present.
  ScalarVec psi(const ScalarVec& x) const;
  Eigen::VectorXd psi(const Eigen::VectorXd& x) const;

  // V(x) = |psi(x)|^2 / 2; decays as dV/dt = -lambda V under zero input.
  DualScalar lyapunov(const ScalarVec& x) const;
  double lyapunov(const Eigen::VectorXd& x) const;
};

// Runs the recursive design on a cascade-form field. lambda is the decay
// rate of the closed loop (squared distances contract at rate lambda).
SynthesizedController synthesize(const ParametricField& pf, double lambda);
SynthesizedController synthesize(const ParametricStrictFeedbackSystem& sys,
                                 double lambda);

// Normalizes the gains of a strict-feedback system, synthesizes on the
// transformed field, and wraps the result so it drives the original system:
// u = k(phi(x), uhat), with the metric available as the pullback.
SynthesizedController strict_feedback_controller(const StrictFeedbackSystem& sys,
                                                 double lambda);

// psi in the synthesis coordinates: [x1, x2 - phi_1(x), .., x_n - phi_{n-1}(x)].
ScalarVec psi_map(const SynthesizedController& ctrl, const ScalarVec& x);

// The metric built by the same recursion that produced the controller.
MetricField metric_recursive(const SynthesizedController& ctrl);
// The same matrix as J_psi^T J_psi; psi is an isometry onto flat space, so
// both constructions agree and det = 1.
MetricField metric_from_psi(const SynthesizedController& ctrl);
// (map^* G)(x) = J_map(x)^T G(map(x)) J_map(x). Throws DomainError where the
// map's Jacobian is singular.
MetricField pullback_metric(const MetricField& metric,
                            const CoordinateChange& map);
// Metric in the controller's native coordinates: the pullback when a
// coordinate map is present, the recursive metric otherwise.
MetricField native_metric(const SynthesizedController& ctrl);

// Distance induced by the flattening map: |psi(x) - psi(x2)| in native
// coordinates. Along closed-loop trajectory pairs with shared input it
// decays exactly at rate lambda/2.
double riemannian_distance(const SynthesizedController& ctrl,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& x2);

// Closed loop in native coordinates with the external input as the new
// input channel.
VectorField closed_loop(const SynthesizedController& ctrl);

// Closed loop of the cascade-form field the recursion ran on, bypassing any
// coordinate map. Coincides with closed_loop when no map is present.
VectorField synthesis_closed_loop(const SynthesizedController& ctrl);

}  // namespace deltabk
