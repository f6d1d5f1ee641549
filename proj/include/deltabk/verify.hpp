#pragma once

// Pointwise contraction checks and their aggregation over sampled regions.
//
// The state check evaluates the largest eigenvalue of
//   A(x,u) = (df/dx)^T G + G (df/dx) + D_f G + lambda G,
// where D_f G is the derivative of the metric along the flow. A(x,u)
// nonpositive-definite means G-lengths of state variations shrink at rate
// lambda at (x,u).
//
// The input check evaluates  margin = alpha^2 - 4 lambda_max(G^{1/2} B B^T
// G^{1/2})  with B = df/du. For all variation pairs (X, Y), the bilinear
// bound  2 Y^T B^T G X <= -X^T A X + alpha (X^T G X)^{1/2} |Y|  holds iff
// the state check passes and the margin is nonnegative: the left side and
// the alpha term are both linear in |Y|, so boundedness as |Y| grows forces
// 2 |B^T G X| <= alpha (X^T G X)^{1/2}, whose worst X is the top eigenvector
// of G^{1/2} B B^T G^{1/2}; Cauchy-Schwarz gives the converse. See
// docs/verification.md for the full argument.

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "deltabk/model.hpp"
#include "deltabk/synthesis.hpp"

namespace deltabk {

// All thresholds are implementation policy (f64 noise allowances), not part
// of the certified mathematics; reports carry them alongside the results.
struct Tolerances {
  double state = 1e-7;  // ceiling on the largest state-check eigenvalue
  double input = 1e-9;  // allowed shortfall of the input margin below 0
  double pd = 1e-10;    // floor on the smallest metric eigenvalue
};

struct DefectResult {
  Eigen::VectorXd point;
  double input = 0.0;
  double max_eigenvalue_state_defect = 0.0;
  double input_margin = 0.0;
  double metric_min_eigenvalue = 0.0;
  bool pass = false;  // state defect <= tol.state and margin >= -tol.input
};

struct PositiveDefiniteResult {
  bool pass = false;
  double min_eigenvalue = 0.0;
};

struct WorstCase {
  double value = 0.0;
  Eigen::VectorXd point;
  double input = 0.0;
};

struct VerificationReport {
  std::string frame = "native";  // coordinate frame the checks ran in
  int n = 0;
  double lambda = 0.0;
  double alpha = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  Box box;
  std::array<double, 2> input_range{-1.0, 1.0};
  Tolerances tol;

  WorstCase worst_state_defect;   // max over samples
  WorstCase worst_input_margin;   // min over samples
  WorstCase min_metric_eigenvalue;  // min over samples
  int state_failures = 0;
  int input_failures = 0;
  int metric_failures = 0;
  bool state_pass = false;
  bool input_pass = false;
  bool metric_pass = false;
  bool pass = false;
};

double state_defect(const VectorField& f, const MetricField& G, double lambda,
                    const Eigen::VectorXd& x, double u);

double input_defect(const VectorField& f, const MetricField& G, double lambda,
                    double alpha, const Eigen::VectorXd& x, double u);

PositiveDefiniteResult positive_definite(const MetricField& G,
                                         const Eigen::VectorXd& x,
                                         double tol_pd = Tolerances{}.pd);

// 0.5 |psi(x)|^2; nonnegative, zero exactly on the psi zero set.
double lyapunov_value(const SynthesizedController& ctrl,
                      const Eigen::VectorXd& x);

DefectResult check_point(const VectorField& f, const MetricField& G,
                         double lambda, double alpha, const Eigen::VectorXd& x,
                         double u, const Tolerances& tol = {});

// Deterministic seeded low-discrepancy sweep of box x input_range. Check
// failures are recorded in the report, never thrown; evaluation errors
// (domain violations inside the box) do propagate.
VerificationReport verify_region(const VectorField& f, const MetricField& G,
                                 double lambda, double alpha, const Box& box,
                                 int samples, std::uint64_t seed,
                                 const std::array<double, 2>& input_range =
                                     {-1.0, 1.0},
                                 const Tolerances& tol = {});

}  // namespace deltabk
