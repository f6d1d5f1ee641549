#pragma once

// Shared helpers for the test suites.
//
// The finite-difference routines here are deliberately independent of the
// library's autodiff: they are the oracle the AD results are judged against,
// so they must not share code with it.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testsupport {

using RealFn = std::function<double(const Eigen::VectorXd&)>;
using RealVecFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central difference, O(h^2).
inline double fd_partial(const RealFn& f, const Eigen::VectorXd& x, int i,
                         double h = 1e-5) {
  Eigen::VectorXd a = x, b = x;
  a[i] += h;
  b[i] -= h;
  return (f(a) - f(b)) / (2.0 * h);
}

inline Eigen::VectorXd fd_gradient(const RealFn& f, const Eigen::VectorXd& x,
                                   double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) g[i] = fd_partial(f, x, i, h);
  return g;
}

inline Eigen::MatrixXd fd_jacobian(const RealVecFn& f, const Eigen::VectorXd& x,
                                   double h = 1e-5) {
  Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    Eigen::VectorXd a = x, b = x;
    a[j] += h;
    b[j] -= h;
    J.col(j) = (f(a) - f(b)) / (2.0 * h);
  }
  return J;
}

// Four-point second-order central stencil; symmetric by construction.
inline Eigen::MatrixXd fd_hessian(const RealFn& f, const Eigen::VectorXd& x,
                                  double h = 1e-4) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  const double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    H(i, i) = (f(a) - 2.0 * f0 + f(b)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      const double v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

// Deterministic uniform sampling of an axis-aligned box. Mersenne Twister
// rather than the library's Halton stream so test points are not correlated
// with the points the library itself checks.
class BoxSampler {
 public:
  BoxSampler(std::vector<std::array<double, 2>> bounds, std::uint64_t seed)
      : bounds_(std::move(bounds)), rng_(seed) {}

  Eigen::VectorXd next() {
    Eigen::VectorXd x(static_cast<int>(bounds_.size()));
    for (int i = 0; i < x.size(); ++i) {
      std::uniform_real_distribution<double> d(bounds_[static_cast<size_t>(i)][0],
                                               bounds_[static_cast<size_t>(i)][1]);
      x[i] = d(rng_);
    }
    return x;
  }

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng_);
  }

 private:
  std::vector<std::array<double, 2>> bounds_;
  std::mt19937_64 rng_;
};

inline double rel_err(double got, double want) {
  const double scale = std::max(1.0, std::abs(want));
  return std::abs(got - want) / scale;
}

inline double matrix_rel_err(const Eigen::MatrixXd& got,
                             const Eigen::MatrixXd& want) {
  const double scale = std::max(1.0, want.norm());
  return (got - want).norm() / scale;
}

}  // namespace testsupport
