#include "deltabk/synthesis.hpp"

#include <cmath>

namespace deltabk {

Eigen::MatrixXd MetricField::at(const Eigen::VectorXd& x) const {
  return eval(to_scalars(x)).primal();
}

MetricField MetricField::identity(int n) {
  return MetricField{n, Provenance::identity, [n](const ScalarVec&) {
                       ScalarMat m = ScalarMat::zero(n, n);
                       for (int i = 0; i < n; ++i) m(i, i) = DualScalar(1.0);
                       return m;
                     }};
}

namespace {

// Shared state the stage closures hang onto. The virtual controls are
// defined mutually recursively through this block; entries are filled in
// stage order, and phi[l] only ever reads entries below l.
struct Stages {
  ParametricField field;
  double lambda = 2.0;
  std::vector<ScalarFn> phi;

  // f_j for j <= n-1; these components never read the input.
  DualScalar drift(int j, const ScalarVec& x) const {
    return field.h(j, x) + DualScalar(field.b[static_cast<std::size_t>(j - 1)]) *
                               x[static_cast<std::size_t>(j)];
  }

  // k_l = -b_{l-1} (x_{l-1} - phi_{l-2})
  //       - (lambda/2) (x_l - phi_{l-1})
  //       + sum_{j<l} d(phi_{l-1})/dx_j * f_j
  // with the conventions b_0 = 0, x_0 = 0, phi_{-1} = phi_0 = 0 taken
  // literally. phi_{l-1} only reads x_1..x_{l-1}, so the sum stops at l-1.
  DualScalar stage(int l, const ScalarVec& x) const {
    const double b_prev =
        l >= 2 ? field.b[static_cast<std::size_t>(l - 2)] : 0.0;
    const DualScalar x_prev = l >= 2 ? x[static_cast<std::size_t>(l - 2)]
                                     : DualScalar(0.0);
    const DualScalar phi_prev2 =
        l >= 3 ? phi[static_cast<std::size_t>(l - 2)](x) : DualScalar(0.0);
    DualScalar acc =
        DualScalar(-b_prev) * (x_prev - phi_prev2) -
        DualScalar(lambda / 2.0) *
            (x[static_cast<std::size_t>(l - 1)] -
             phi[static_cast<std::size_t>(l - 1)](x));
    const ScalarFn& prev = phi[static_cast<std::size_t>(l - 1)];
    for (int j = 1; j <= l - 1; ++j)
      acc = acc + seeded_partial(prev, x, j - 1) * drift(j, x);
    return acc;
  }
};

}  // namespace

SynthesizedController synthesize(const ParametricField& pf, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (pf.n < 1) throw ConfigError("field order must be at least 1");
  for (double bl : pf.b)
    if (bl == 0.0)
      throw ConfigError("interconnection gains must be nonzero");

  const int n = pf.n;
  auto st = std::make_shared<Stages>();
  st->field = pf;
  st->lambda = lambda;
  st->phi.resize(static_cast<std::size_t>(n));
  st->phi[0] = [](const ScalarVec&) { return DualScalar(0.0); };

  SynthesizedController ctrl;
  ctrl.n = n;
  ctrl.lambda = lambda;
  ctrl.field = pf;
  for (int l = 1; l <= n; ++l) {
    ctrl.kseq.push_back(
        [st, l](const ScalarVec& x) { return st->stage(l, x); });
    if (l < n) {
      const double bl = pf.b[static_cast<std::size_t>(l - 1)];
      st->phi[static_cast<std::size_t>(l)] =
          [st, l, bl](const ScalarVec& x) {
            return (st->stage(l, x) - st->field.h(l, x)) / DualScalar(bl);
          };
    }
  }
  ctrl.phi = st->phi;
  ctrl.native_field = vector_field(pf);
  return ctrl;
}

SynthesizedController synthesize(const ParametricStrictFeedbackSystem& sys,
                                 double lambda) {
  return synthesize(ParametricField::from_system(sys), lambda);
}

SynthesizedController strict_feedback_controller(
    const StrictFeedbackSystem& sys, double lambda) {
  SynthesizedController ctrl = synthesize(to_parametric(sys), lambda);
  auto sp = std::make_shared<const StrictFeedbackSystem>(sys);
  ctrl.coordinate_map = CoordinateChange{
      [sp](const ScalarVec& x) { return transform_coordinates(*sp, x); },
      [sp](const ScalarVec& y) { return invert_coordinates(*sp, y); }};
  ctrl.native_field = vector_field(sys);
  return ctrl;
}

DualScalar SynthesizedController::control(const ScalarVec& x,
                                          const DualScalar& uhat) const {
  const ScalarVec& y = coordinate_map ? coordinate_map->forward(x) : x;
  const DualScalar g = field.g(y);
  if (g.primal() == 0.0 || !std::isfinite(g.primal()))
    throw DomainError("input gain vanishes; the control law is undefined here");
  return (kseq[static_cast<std::size_t>(n - 1)](y) - field.h(n, y)) / g +
         uhat / g;
}

double SynthesizedController::control(const Eigen::VectorXd& x,
                                      double uhat) const {
  return control(to_scalars(x), DualScalar(uhat)).primal();
}

ScalarVec SynthesizedController::psi(const ScalarVec& x) const {
  return psi_map(*this, coordinate_map ? coordinate_map->forward(x) : x);
}

Eigen::VectorXd SynthesizedController::psi(const Eigen::VectorXd& x) const {
  return primals(psi(to_scalars(x)));
}

DualScalar SynthesizedController::lyapunov(const ScalarVec& x) const {
  const ScalarVec z = psi(x);
  DualScalar acc(0.0);
  for (const DualScalar& zi : z) acc = acc + zi * zi;
  return DualScalar(0.5) * acc;
}

double SynthesizedController::lyapunov(const Eigen::VectorXd& x) const {
  return lyapunov(to_scalars(x)).primal();
}

ScalarVec psi_map(const SynthesizedController& ctrl, const ScalarVec& x) {
  ScalarVec z;
  z.reserve(static_cast<std::size_t>(ctrl.n));
  for (int l = 1; l <= ctrl.n; ++l)
    z.push_back(x[static_cast<std::size_t>(l - 1)] -
                ctrl.phi[static_cast<std::size_t>(l - 1)](x));
  return z;
}

MetricField metric_recursive(const SynthesizedController& ctrl) {
  auto phi = std::make_shared<std::vector<ScalarFn>>(ctrl.phi);
  const int n = ctrl.n;
  return MetricField{
      n, MetricField::Provenance::recursive, [phi, n](const ScalarVec& x) {
        ScalarMat G = ScalarMat::zero(1, 1);
        G(0, 0) = DualScalar(1.0);
        for (int l = 2; l <= n; ++l) {
          // Row vector of partials of phi_{l-1} in its l-1 arguments.
          const ScalarFn& prev = (*phi)[static_cast<std::size_t>(l - 1)];
          ScalarVec w;
          w.reserve(static_cast<std::size_t>(l - 1));
          for (int j = 1; j <= l - 1; ++j)
            w.push_back(seeded_partial(prev, x, j - 1));
          ScalarMat next = ScalarMat::zero(l, l);
          for (int i = 0; i < l - 1; ++i)
            for (int j = 0; j < l - 1; ++j)
              next(i, j) = G(i, j) + w[static_cast<std::size_t>(i)] *
                                         w[static_cast<std::size_t>(j)];
          for (int i = 0; i < l - 1; ++i) {
            next(i, l - 1) = -w[static_cast<std::size_t>(i)];
            next(l - 1, i) = -w[static_cast<std::size_t>(i)];
          }
          next(l - 1, l - 1) = DualScalar(1.0);
          G = next;
        }
        return G;
      }};
}

MetricField metric_from_psi(const SynthesizedController& ctrl) {
  auto sp = std::make_shared<const SynthesizedController>(ctrl);
  const int n = ctrl.n;
  const VectorFn psi_fn = [sp](const ScalarVec& x) { return psi_map(*sp, x); };
  return MetricField{
      n, MetricField::Provenance::psi_jacobian,
      [psi_fn, n](const ScalarVec& x) {
        const ScalarMat J = seeded_jacobian(psi_fn, x);
        ScalarMat G = ScalarMat::zero(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j <= i; ++j) {
            DualScalar acc(0.0);
            for (int k = 0; k < n; ++k) acc = acc + J(k, i) * J(k, j);
            G(i, j) = acc;
            G(j, i) = acc;
          }
        return G;
      }};
}

MetricField pullback_metric(const MetricField& metric,
                            const CoordinateChange& map) {
  const int n = metric.n;
  auto base = std::make_shared<const MetricField>(metric);
  auto fwd = map.forward;
  return MetricField{
      n, MetricField::Provenance::pullback, [base, fwd, n](const ScalarVec& x) {
        const ScalarMat T = seeded_jacobian(fwd, x);
        const double det = T.primal().determinant();
        if (det == 0.0 || !std::isfinite(det))
          throw DomainError(
              "pullback at a point where the coordinate change is singular");
        const ScalarMat Gy = base->eval(fwd(x));
        ScalarMat out = ScalarMat::zero(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j <= i; ++j) {
            DualScalar acc(0.0);
            for (int r = 0; r < n; ++r)
              for (int c = 0; c < n; ++c)
                acc = acc + T(r, i) * Gy(r, c) * T(c, j);
            out(i, j) = acc;
            out(j, i) = acc;
          }
        return out;
      }};
}

MetricField native_metric(const SynthesizedController& ctrl) {
  if (ctrl.coordinate_map)
    return pullback_metric(metric_recursive(ctrl), *ctrl.coordinate_map);
  return metric_recursive(ctrl);
}

double riemannian_distance(const SynthesizedController& ctrl,
                           const Eigen::VectorXd& x,
                           const Eigen::VectorXd& x2) {
  return (ctrl.psi(x) - ctrl.psi(x2)).norm();
}

VectorField closed_loop(const SynthesizedController& ctrl) {
  auto sp = std::make_shared<const SynthesizedController>(ctrl);
  return VectorField{ctrl.n, [sp](const ScalarVec& x, const DualScalar& uhat) {
                       return sp->native_field.f(x, sp->control(x, uhat));
                     }};
}

VectorField synthesis_closed_loop(const SynthesizedController& ctrl) {
  auto sp = std::make_shared<const SynthesizedController>(ctrl);
  const VectorField vf = vector_field(ctrl.field);
  return VectorField{
      ctrl.n, [sp, vf](const ScalarVec& x, const DualScalar& uhat) {
        const DualScalar g = sp->field.g(x);
        if (g.primal() == 0.0 || !std::isfinite(g.primal()))
          throw DomainError(
              "input gain vanishes; the control law is undefined here");
        const DualScalar u =
            (sp->kseq.back()(x) - sp->field.h(sp->n, x)) / g + uhat / g;
        return vf.f(x, u);
      }};
}

}  // namespace deltabk
