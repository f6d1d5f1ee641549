#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deltabk/autodiff.hpp"
#include "deltabk/expr.hpp"

namespace deltabk {

// Axis-aligned region of interest. Sampled checks and verification draw
// their points from here; it is a working region, not an invariant set.
struct Box {
  std::vector<std::array<double, 2>> bounds;  // {lo, hi} per coordinate
  int dim() const { return static_cast<int>(bounds.size()); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd center() const;
  Eigen::VectorXd at(const Eigen::VectorXd& unit) const;  // unit cube -> box
};

// A controlled vector field, evaluable over nested duals so callers can
// differentiate through it.
struct VectorField {
  int n = 0;
  std::function<ScalarVec(const ScalarVec& x, const DualScalar& u)> f;
  ScalarVec operator()(const ScalarVec& x, const DualScalar& u) const {
    return f(x, u);
  }
  Eigen::VectorXd at(const Eigen::VectorXd& x, double u) const;
};

// Single-input system in cascade form with constant interconnection gains:
//
//   dx_l = h_l(x_1..x_l) + b_l * x_{l+1}        l = 1..n-1
//   dx_n = h_n(x_1..x_n) + g(x) * u
//
// Coordinates are named x1..xn; params are extra named constants.
struct ParametricStrictFeedbackSystem {
  int n = 0;
  std::vector<ExprPtr> h;              // h_1..h_n
  std::vector<double> b;               // b_1..b_{n-1}, all nonzero
  ExprPtr g;
  std::map<std::string, double> params;
  Box box;

  // Parses and validates: sizes, the triangular dependency rule
  // (h_l only sees x1..xl), nonzero b, and g nonzero on sampled box points.
  static ParametricStrictFeedbackSystem create(
      int n, const std::vector<std::string>& h, const std::vector<double>& b,
      const std::string& g, const std::map<std::string, double>& params,
      const Box& box);

  DualScalar h_at(int l, const ScalarVec& x) const;  // l is 1-based
  DualScalar g_at(const ScalarVec& x) const;

 private:
  std::vector<CompiledExpr> ch_;
  CompiledExpr cg_;
  ScalarVec slot_template_;  // x slots zeroed, param slots filled
  friend struct SystemCompiler;
};

// Single-input system in strict-feedback form with state-dependent gains:
//
//   dx_l = h_l(x_1..x_l) + g_l(x_1..x_l) * x_{l+1}   l = 1..n-1
//   dx_n = h_n(x_1..x_n) + g_n(x_1..x_n) * u
struct StrictFeedbackSystem {
  int n = 0;
  std::vector<ExprPtr> h;  // h_1..h_n
  std::vector<ExprPtr> g;  // g_1..g_n, each nonzero on sampled box points
  std::map<std::string, double> params;
  Box box;

  static StrictFeedbackSystem create(int n, const std::vector<std::string>& h,
                                     const std::vector<std::string>& g,
                                     const std::map<std::string, double>& params,
                                     const Box& box);

  DualScalar h_at(int l, const ScalarVec& x) const;
  DualScalar g_at(int l, const ScalarVec& x) const;

 private:
  std::vector<CompiledExpr> ch_, cg_;
  ScalarVec slot_template_;
  friend struct SystemCompiler;
};

VectorField vector_field(const ParametricStrictFeedbackSystem& sys);
VectorField vector_field(const StrictFeedbackSystem& sys);

// The gain-scaling change of coordinates that normalizes a strict-feedback
// system's interconnection gains to one:
//
//   y_1 = x_1,   y_l = (g_1(x) * ... * g_{l-1}(x)) * x_l
ScalarVec transform_coordinates(const StrictFeedbackSystem& sys,
                                const ScalarVec& x);
Eigen::VectorXd transform_coordinates(const StrictFeedbackSystem& sys,
                                      const Eigen::VectorXd& x);
// Inverse by forward substitution; throws DomainError where a gain vanishes.
ScalarVec invert_coordinates(const StrictFeedbackSystem& sys,
                             const ScalarVec& y);
Eigen::VectorXd invert_coordinates(const StrictFeedbackSystem& sys,
                                   const Eigen::VectorXd& y);

// A cascade-form field given by closures instead of expressions. This is the
// shape the synthesis recursion consumes: it covers expression-defined
// systems and numerically transformed ones alike.
struct ParametricField {
  int n = 0;
  std::vector<double> b;  // interconnection gains, 1-based b[l-1]
  std::function<DualScalar(int l, const ScalarVec& x)> h;  // l is 1-based
  std::function<DualScalar(const ScalarVec& x)> g;
  Box box;

  static ParametricField from_system(const ParametricStrictFeedbackSystem& sys);
};

VectorField vector_field(const ParametricField& pf);

// Pushes a strict-feedback system through the gain-normalizing coordinate
// change, numerically: f'(y, u) = J_phi(x) * f(x, u) at x = phi^{-1}(y), with
// the Jacobian taken by forward-mode differentiation. The result has all
// interconnection gains exactly 1 and keeps the source box as its sampling
// region (y1 = x1 and the gains are order one there).
ParametricField to_parametric(const StrictFeedbackSystem& sys);

}  // namespace deltabk
