#pragma once

#include <cmath>
#include <memory>

#include "deltabk/errors.hpp"

namespace deltabk {

namespace detail {
struct DualNode;
}

// Forward-mode scalar whose infinitesimal levels nest dynamically.
//
// Depth 0 is a plain double. Depth d > 0 carries a value part and a
// derivative part, both living at depths strictly below d. Arithmetic between
// operands of different depth treats the shallower one as a constant of the
// deeper level. That structural rule is what keeps simultaneous derivative
// scopes separate: every new differentiation (see autodiff.hpp) wraps its
// arguments one level above everything already in scope, so two scopes can
// never share a level.
//
// Immutable after construction; copies are cheap (shared nodes).
class DualScalar {
 public:
  DualScalar() = default;
  DualScalar(double v) : v_(v) {}  // NOLINT: implicit by design, literals flow in

  // Builds a scalar at `level` with the given value and derivative parts.
  // `level` must be strictly greater than the depth of both parts; autodiff
  // picks it as one plus the ambient depth of the whole argument list. An
  // exact-zero derivative collapses to the value part, so constants stay
  // shallow no matter how often they are lifted.
  static DualScalar with_derivative(const DualScalar& value,
                                    const DualScalar& derivative, int level);

  int depth() const;
  // Value component all the way down to depth 0.
  double primal() const { return v_; }
  // Value/derivative parts observed at the given level. A scalar shallower
  // than `level` is a constant there: its value part is itself, its
  // derivative part is zero.
  DualScalar value_part(int level) const;
  DualScalar derivative_part(int level) const;
  // Every component finite?
  bool finite() const;

  friend DualScalar operator+(const DualScalar& a, const DualScalar& b);
  friend DualScalar operator-(const DualScalar& a, const DualScalar& b);
  friend DualScalar operator*(const DualScalar& a, const DualScalar& b);
  friend DualScalar operator/(const DualScalar& a, const DualScalar& b);
  friend DualScalar operator-(const DualScalar& a);

  DualScalar& operator+=(const DualScalar& b) { return *this = *this + b; }
  DualScalar& operator-=(const DualScalar& b) { return *this = *this - b; }
  DualScalar& operator*=(const DualScalar& b) { return *this = *this * b; }
  DualScalar& operator/=(const DualScalar& b) { return *this = *this / b; }

  friend DualScalar sin(const DualScalar& a);
  friend DualScalar cos(const DualScalar& a);
  friend DualScalar tan(const DualScalar& a);
  friend DualScalar cot(const DualScalar& a);
  friend DualScalar exp(const DualScalar& a);
  friend DualScalar log(const DualScalar& a);
  friend DualScalar sqrt(const DualScalar& a);
  friend DualScalar abs(const DualScalar& a);
  // Integer exponents (detected on a depth-0, integral b) use binary
  // exponentiation and accept any base; otherwise requires a positive base.
  friend DualScalar pow(const DualScalar& a, const DualScalar& b);

 private:
  DualScalar(double v, std::shared_ptr<const detail::DualNode> n)
      : v_(v), n_(std::move(n)) {}
  static DualScalar make(DualScalar value, DualScalar derivative, int level);

  double v_ = 0.0;  // cached primal; the authoritative value when n_ is null
  std::shared_ptr<const detail::DualNode> n_;  // null at depth 0
};

namespace detail {
struct DualNode {
  DualScalar val;
  DualScalar dot;
  int depth;
};
}  // namespace detail

}  // namespace deltabk
