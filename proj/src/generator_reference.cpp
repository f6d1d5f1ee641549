#include "deltabk/generator_reference.hpp"

#include <cmath>

#include "deltabk/errors.hpp"

namespace deltabk {

double reference_control(const GeneratorParameters& p,
                         const Eigen::Vector3d& eta, double uhat) {
  const double s = std::sin(p.delta0 + eta[0]);
  const double c = std::cos(p.delta0 + eta[0]);
  if (s == 0.0)
    throw DomainError("reference control undefined where sin(delta0 + y1) "
                      "vanishes");
  const double gain = p.I * p.Kc * p.Vs * p.G_gen * s;
  const double bracket =
      (-5.0 + 3.0 * p.E - p.E * p.E) * eta[1] - 3.0 * eta[0] +
      (p.E - 3.0 + p.I) * eta[2] + (p.E - 3.0) * p.F * p.Pm0 +
      (p.E - 3.0 + p.I) * p.Vs * p.G_gen * p.eq0 * s -
      p.Vs * p.G_gen * p.eq0 * c * eta[1] -
      p.J * p.Vs * p.Vs * p.G_gen * s * s * eta[1] -
      (c / s) * eta[1] * eta[2];
  return bracket / gain + uhat / gain;
}

Eigen::Matrix3d reference_metric(const GeneratorParameters& p,
                                 const Eigen::Vector3d& y) {
  const double ct = p.Vs * p.G_gen * p.eq0 * std::cos(p.delta0 + y[0]);
  Eigen::Matrix3d m;
  m(0, 0) = 2.0 + (2.0 + ct) * (2.0 + ct);
  m(0, 1) = -2.0 * p.E + 5.0 - (p.E - 2.0) * ct;
  m(0, 2) = 2.0 + ct;
  m(1, 0) = m(0, 1);
  m(1, 1) = (p.E - 2.0) * (p.E - 2.0) + 1.0;
  m(1, 2) = 2.0 - p.E;
  m(2, 0) = m(0, 2);
  m(2, 1) = m(1, 2);
  m(2, 2) = 1.0;
  return m;
}

Eigen::Vector3d reference_field(const GeneratorParameters& p,
                                const Eigen::Vector3d& x, double u) {
  const double s = std::sin(p.delta0 + x[0]);
  Eigen::Vector3d f;
  f[0] = x[1];
  f[1] = -p.E * x[1] + p.F * p.Pm0 + p.Vs * p.G_gen * p.eq0 * s +
         p.Vs * p.G_gen * s * x[2];
  f[2] = -p.I * x[2] + p.J * p.Vs * s * x[1] - p.I * p.eq0 + p.I * p.Kc * u;
  return f;
}

Eigen::Vector3d reference_transformed_field(const GeneratorParameters& p,
                                            const Eigen::Vector3d& y,
                                            double u) {
  const double s = std::sin(p.delta0 + y[0]);
  const double c = std::cos(p.delta0 + y[0]);
  if (s == 0.0)
    throw DomainError("transformed field undefined where sin(delta0 + y1) "
                      "vanishes");
  Eigen::Vector3d f;
  f[0] = y[1];
  f[1] = -p.E * y[1] + p.F * p.Pm0 + p.Vs * p.G_gen * p.eq0 * s + y[2];
  f[2] = -p.I * p.Vs * p.G_gen * p.eq0 * s +
         p.J * p.Vs * p.Vs * p.G_gen * s * s * y[1] - p.I * y[2] +
         (c / s) * y[1] * y[2] + p.I * p.Kc * p.Vs * p.G_gen * s * u;
  return f;
}

Eigen::Vector3d reference_transform(const GeneratorParameters& p,
                                    const Eigen::Vector3d& x) {
  Eigen::Vector3d y;
  y[0] = x[0];
  y[1] = x[1];
  y[2] = p.Vs * p.G_gen * std::sin(p.delta0 + x[0]) * x[2];
  return y;
}

Eigen::Matrix3d reference_transform_jacobian(const GeneratorParameters& p,
                                             const Eigen::Vector3d& x) {
  Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
  t(0, 0) = 1.0;
  t(1, 1) = 1.0;
  t(2, 0) = p.Vs * p.G_gen * std::cos(p.delta0 + x[0]) * x[2];
  t(2, 2) = p.Vs * p.G_gen * std::sin(p.delta0 + x[0]);
  return t;
}

double reference_phi1(const GeneratorParameters&, double y1) { return -y1; }

double reference_phi2(const GeneratorParameters& p, double y1, double y2) {
  return -2.0 * y1 + (p.E - 2.0) * y2 - p.F * p.Pm0 -
         p.Vs * p.G_gen * p.eq0 * std::sin(p.delta0 + y1);
}

}  // namespace deltabk
