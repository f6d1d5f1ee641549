#include "deltabk/verify.hpp"

#include <cmath>
#include <limits>

#include "deltabk/sampling.hpp"

namespace deltabk {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& A) {
  return 0.5 * (A + A.transpose());
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(A),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error("symmetric eigenvalue solve failed");
  return es.eigenvalues();
}

// NaN is sticky in the worst-case reductions: once a sample produces NaN the
// aggregate stays NaN rather than letting later finite values mask it.
void take_max(WorstCase& w, double v, const Eigen::VectorXd& x, double u) {
  if (std::isnan(w.value)) return;
  if (std::isnan(v) || v > w.value) w = {v, x, u};
}

void take_min(WorstCase& w, double v, const Eigen::VectorXd& x, double u) {
  if (std::isnan(w.value)) return;
  if (std::isnan(v) || v < w.value) w = {v, x, u};
}

// Metric value and its derivative along dir in one lifted evaluation.
struct MetricAlong {
  Eigen::MatrixXd value;
  Eigen::MatrixXd directional;
};

MetricAlong metric_along(const MetricField& G, const ScalarVec& x,
                         const Eigen::VectorXd& dir) {
  const int level = ambient_depth(x) + 1;
  ScalarVec lifted;
  lifted.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    lifted.push_back(DualScalar::with_derivative(
        x[i], DualScalar(dir[static_cast<int>(i)]), level));
  const ScalarMat Gl = G.eval(lifted);
  MetricAlong out;
  out.value.resize(G.n, G.n);
  out.directional.resize(G.n, G.n);
  for (int i = 0; i < G.n; ++i)
    for (int j = 0; j < G.n; ++j) {
      const DualScalar& e = Gl(i, j);
      out.value(i, j) = e.value_part(level).primal();
      out.directional(i, j) = e.derivative_part(level).primal();
    }
  return out;
}

Eigen::VectorXd input_direction(const VectorField& f, const ScalarVec& x,
                                double u) {
  const int level = ambient_depth(x) + 1;
  const DualScalar lifted =
      DualScalar::with_derivative(DualScalar(u), DualScalar(1.0), level);
  const ScalarVec fx = f.f(x, lifted);
  Eigen::VectorXd B(f.n);
  for (int i = 0; i < f.n; ++i)
    B[i] = fx[static_cast<std::size_t>(i)].derivative_part(level).primal();
  return B;
}

}  // namespace

double state_defect(const VectorField& f, const MetricField& G, double lambda,
                    const Eigen::VectorXd& x, double u) {
  const ScalarVec xs = to_scalars(x);
  const DualScalar us(u);
  const VectorFn frozen = [&f, &us](const ScalarVec& p) { return f.f(p, us); };
  const Eigen::MatrixXd J = seeded_jacobian(frozen, xs).primal();
  const Eigen::VectorXd flow = primals(f.f(xs, us));
  const MetricAlong m = metric_along(G, xs, flow);
  const Eigen::MatrixXd A = J.transpose() * m.value + m.value * J +
                            m.directional + lambda * m.value;
  return sym_eigenvalues(A).maxCoeff();
}

double input_defect(const VectorField& f, const MetricField& G,
                    double /*lambda*/, double alpha, const Eigen::VectorXd& x,
                    double u) {
  const ScalarVec xs = to_scalars(x);
  const Eigen::VectorXd B = input_direction(f, xs, u);
  const Eigen::MatrixXd Gx = symmetrize(G.eval(xs).primal());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gx);
  if (es.info() != Eigen::Success)
    throw Error("symmetric eigenvalue solve failed");
  // A negative metric eigenvalue has no real square root; the NaN margin is
  // deliberate and counts as a failure downstream.
  const Eigen::MatrixXd root = es.operatorSqrt();
  const Eigen::VectorXd w = root * B;
  const Eigen::MatrixXd M = w * w.transpose();
  return alpha * alpha - 4.0 * sym_eigenvalues(M).maxCoeff();
}

PositiveDefiniteResult positive_definite(const MetricField& G,
                                         const Eigen::VectorXd& x,
                                         double tol_pd) {
  const double mineig = sym_eigenvalues(G.at(x)).minCoeff();
  return {mineig > tol_pd, mineig};
}

double lyapunov_value(const SynthesizedController& ctrl,
                      const Eigen::VectorXd& x) {
  return ctrl.lyapunov(x);
}

DefectResult check_point(const VectorField& f, const MetricField& G,
                         double lambda, double alpha, const Eigen::VectorXd& x,
                         double u, const Tolerances& tol) {
  DefectResult r;
  r.point = x;
  r.input = u;
  r.max_eigenvalue_state_defect = state_defect(f, G, lambda, x, u);
  r.input_margin = input_defect(f, G, lambda, alpha, x, u);
  r.metric_min_eigenvalue = positive_definite(G, x, tol.pd).min_eigenvalue;
  r.pass = r.max_eigenvalue_state_defect <= tol.state &&
           r.input_margin >= -tol.input;
  return r;
}

VerificationReport verify_region(const VectorField& f, const MetricField& G,
                                 double lambda, double alpha, const Box& box,
                                 int samples, std::uint64_t seed,
                                 const std::array<double, 2>& input_range,
                                 const Tolerances& tol) {
  if (samples < 1) throw ConfigError("sample count must be at least 1");
  if (!(lambda > 0.0)) throw ConfigError("contraction rate must be positive");
  if (!(alpha >= 0.0)) throw ConfigError("input gain alpha must be nonnegative");
  if (!(input_range[0] <= input_range[1]))
    throw ConfigError("input range out of order");
  const int n = box.dim();

  VerificationReport rep;
  rep.n = n;
  rep.lambda = lambda;
  rep.alpha = alpha;
  rep.samples = samples;
  rep.seed = seed;
  rep.box = box;
  rep.input_range = input_range;
  rep.tol = tol;
  rep.worst_state_defect.value = -std::numeric_limits<double>::infinity();
  rep.worst_input_margin.value = std::numeric_limits<double>::infinity();
  rep.min_metric_eigenvalue.value = std::numeric_limits<double>::infinity();

  HaltonSampler sampler(n + 1, seed);
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd unit = sampler.next();
    const Eigen::VectorXd x = box.at(unit.head(n));
    const double u =
        input_range[0] + unit[n] * (input_range[1] - input_range[0]);
    const DefectResult r = check_point(f, G, lambda, alpha, x, u, tol);

    if (!(r.max_eigenvalue_state_defect <= tol.state)) ++rep.state_failures;
    if (!(r.input_margin >= -tol.input)) ++rep.input_failures;
    if (!(r.metric_min_eigenvalue > tol.pd)) ++rep.metric_failures;

    take_max(rep.worst_state_defect, r.max_eigenvalue_state_defect, x, u);
    take_min(rep.worst_input_margin, r.input_margin, x, u);
    take_min(rep.min_metric_eigenvalue, r.metric_min_eigenvalue, x, u);
  }

  rep.state_pass = rep.state_failures == 0;
  rep.input_pass = rep.input_failures == 0;
  rep.metric_pass = rep.metric_failures == 0;
  rep.pass = rep.state_pass && rep.input_pass && rep.metric_pass;
  return rep;
}

}  // namespace deltabk
