#include "deltabk/autodiff.hpp"

#include <algorithm>

namespace deltabk {

int ambient_depth(const ScalarVec& args) {
  int d = 0;
  for (const auto& a : args) d = std::max(d, a.depth());
  return d;
}

DualScalar seeded_directional(const ScalarFn& f, const ScalarVec& x,
                              const ScalarVec& dir) {
  const int level = std::max(ambient_depth(x), ambient_depth(dir)) + 1;
  ScalarVec lifted;
  lifted.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    lifted.push_back(DualScalar::with_derivative(x[i], dir[i], level));
  return f(lifted).derivative_part(level);
}

DualScalar seeded_partial(const ScalarFn& f, const ScalarVec& x, int j) {
  const int level = ambient_depth(x) + 1;
  ScalarVec lifted;
  lifted.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    lifted.push_back(DualScalar::with_derivative(
        x[i], static_cast<int>(i) == j ? 1.0 : 0.0, level));
  return f(lifted).derivative_part(level);
}

ScalarVec seeded_gradient(const ScalarFn& f, const ScalarVec& x) {
  ScalarVec g;
  g.reserve(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    g.push_back(seeded_partial(f, x, static_cast<int>(j)));
  return g;
}

Eigen::MatrixXd ScalarMat::primal() const {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = (*this)(i, j).primal();
  return m;
}

ScalarMat seeded_jacobian(const VectorFn& F, const ScalarVec& x) {
  const int n = static_cast<int>(x.size());
  const int level = ambient_depth(x) + 1;
  ScalarMat J;
  for (int j = 0; j < n; ++j) {
    ScalarVec lifted;
    lifted.reserve(x.size());
    for (int i = 0; i < n; ++i)
      lifted.push_back(DualScalar::with_derivative(
          x[static_cast<std::size_t>(i)], i == j ? 1.0 : 0.0, level));
    const ScalarVec col = F(lifted);
    if (J.rows == 0) J = ScalarMat::zero(static_cast<int>(col.size()), n);
    for (std::size_t i = 0; i < col.size(); ++i)
      J(static_cast<int>(i), j) = col[i].derivative_part(level);
  }
  return J;
}

ScalarVec to_scalars(const Eigen::VectorXd& x) {
  ScalarVec out;
  out.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out.emplace_back(x[i]);
  return out;
}

Eigen::VectorXd primals(const ScalarVec& x) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = x[i].primal();
  return out;
}

double directional_derivative(const ScalarFn& f, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& dir) {
  return seeded_directional(f, to_scalars(x), to_scalars(dir)).primal();
}

Eigen::VectorXd gradient(const ScalarFn& f, const Eigen::VectorXd& x) {
  const ScalarVec xs = to_scalars(x);
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    g[j] = seeded_partial(f, xs, static_cast<int>(j)).primal();
  return g;
}

Eigen::MatrixXd jacobian(const VectorFn& F, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  const ScalarVec xs = to_scalars(x);
  Eigen::MatrixXd J;
  for (int j = 0; j < n; ++j) {
    const int level = 1;  // xs is depth 0
    ScalarVec lifted;
    lifted.reserve(xs.size());
    for (int i = 0; i < n; ++i)
      lifted.push_back(
          DualScalar::with_derivative(xs[i], i == j ? 1.0 : 0.0, level));
    const ScalarVec col = F(lifted);
    if (J.size() == 0) J.resize(static_cast<Eigen::Index>(col.size()), n);
    for (std::size_t i = 0; i < col.size(); ++i)
      J(static_cast<Eigen::Index>(i), j) =
          col[i].derivative_part(level).primal();
  }
  return J;
}

Eigen::MatrixXd hessian(const ScalarFn& f, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  const ScalarVec xs = to_scalars(x);
  for (int j = 0; j < n; ++j) {
    const ScalarFn dj = [&f, j](const ScalarVec& p) {
      return seeded_partial(f, p, j);
    };
    for (int i = 0; i < n; ++i) H(i, j) = seeded_partial(dj, xs, i).primal();
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace deltabk
