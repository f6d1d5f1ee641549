#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "deltabk/dual.hpp"

namespace deltabk {

using ScalarVec = std::vector<DualScalar>;
using ScalarFn = std::function<DualScalar(const ScalarVec&)>;
using VectorFn = std::function<ScalarVec(const ScalarVec&)>;

// Deepest level present in the arguments. New derivative scopes open one
// level above this, which is the nesting discipline that keeps them apart.
int ambient_depth(const ScalarVec& args);

// Derivative of f at x in the direction `dir`, staying at the scalar level so
// calls nest (the result still carries any outer levels of x). `dir` entries
// must not be deeper than the ambient depth of x.
DualScalar seeded_directional(const ScalarFn& f, const ScalarVec& x,
                              const ScalarVec& dir);
// Partial derivative with respect to coordinate j (0-based).
DualScalar seeded_partial(const ScalarFn& f, const ScalarVec& x, int j);
// All n partials.
ScalarVec seeded_gradient(const ScalarFn& f, const ScalarVec& x);

// Dense matrix of scalars, for Jacobians and metric values that still carry
// derivative levels.
struct ScalarMat {
  int rows = 0, cols = 0;
  ScalarVec a;
  static ScalarMat zero(int r, int c) {
    return ScalarMat{r, c, ScalarVec(static_cast<std::size_t>(r * c))};
  }
  DualScalar& operator()(int i, int j) {
    return a[static_cast<std::size_t>(i * cols + j)];
  }
  const DualScalar& operator()(int i, int j) const {
    return a[static_cast<std::size_t>(i * cols + j)];
  }
  Eigen::MatrixXd primal() const;
};

// Jacobian of F at x, one seeded pass per column; stays at the scalar level
// so results nest under outer derivative scopes.
ScalarMat seeded_jacobian(const VectorFn& F, const ScalarVec& x);

// Double-level entry points.
double directional_derivative(const ScalarFn& f, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& dir);
Eigen::VectorXd gradient(const ScalarFn& f, const Eigen::VectorXd& x);
// m x n, rows follow F's components.
Eigen::MatrixXd jacobian(const VectorFn& F, const Eigen::VectorXd& x);
// Symmetrized: (H + H^T)/2 of the nested-derivative matrix.
Eigen::MatrixXd hessian(const ScalarFn& f, const Eigen::VectorXd& x);

// Conversions.
ScalarVec to_scalars(const Eigen::VectorXd& x);
Eigen::VectorXd primals(const ScalarVec& x);

}  // namespace deltabk
