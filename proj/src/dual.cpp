#include "deltabk/dual.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace deltabk {

namespace {

std::string describe(const char* what, double at) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s (argument value %.17g)", what, at);
  return buf;
}

}  // namespace

int DualScalar::depth() const { return n_ ? n_->depth : 0; }

DualScalar DualScalar::make(DualScalar value, DualScalar derivative, int level) {
  if (derivative.n_ == nullptr && derivative.v_ == 0.0) return value;
  double primal = value.v_;
  return DualScalar(primal,
                    std::make_shared<const detail::DualNode>(detail::DualNode{
                        std::move(value), std::move(derivative), level}));
}

DualScalar DualScalar::with_derivative(const DualScalar& value,
                                       const DualScalar& derivative,
                                       int level) {
  return make(value, derivative, level);
}

DualScalar DualScalar::value_part(int level) const {
  if (n_ && n_->depth == level) return n_->val;
  return *this;
}

DualScalar DualScalar::derivative_part(int level) const {
  if (n_ && n_->depth == level) return n_->dot;
  return DualScalar(0.0);
}

bool DualScalar::finite() const {
  if (!n_) return std::isfinite(v_);
  return n_->val.finite() && n_->dot.finite();
}

DualScalar operator+(const DualScalar& a, const DualScalar& b) {
  if (!a.n_ && !b.n_) return DualScalar(a.v_ + b.v_);
  const int d = std::max(a.depth(), b.depth());
  return DualScalar::make(a.value_part(d) + b.value_part(d),
                          a.derivative_part(d) + b.derivative_part(d), d);
}

DualScalar operator-(const DualScalar& a, const DualScalar& b) {
  if (!a.n_ && !b.n_) return DualScalar(a.v_ - b.v_);
  const int d = std::max(a.depth(), b.depth());
  return DualScalar::make(a.value_part(d) - b.value_part(d),
                          a.derivative_part(d) - b.derivative_part(d), d);
}

DualScalar operator*(const DualScalar& a, const DualScalar& b) {
  if (!a.n_ && !b.n_) return DualScalar(a.v_ * b.v_);
  const int d = std::max(a.depth(), b.depth());
  const DualScalar av = a.value_part(d), ad = a.derivative_part(d);
  const DualScalar bv = b.value_part(d), bd = b.derivative_part(d);
  return DualScalar::make(av * bv, av * bd + ad * bv, d);
}

DualScalar operator/(const DualScalar& a, const DualScalar& b) {
  if (!a.n_ && !b.n_) return DualScalar(a.v_ / b.v_);
  const int d = std::max(a.depth(), b.depth());
  const DualScalar av = a.value_part(d), ad = a.derivative_part(d);
  const DualScalar bv = b.value_part(d), bd = b.derivative_part(d);
  const DualScalar q = av / bv;
  return DualScalar::make(q, (ad - q * bd) / bv, d);
}

DualScalar operator-(const DualScalar& a) {
  if (!a.n_) return DualScalar(-a.v_);
  const int d = a.depth();
  return DualScalar::make(-a.value_part(d), -a.derivative_part(d), d);
}

DualScalar sin(const DualScalar& a) {
  if (!a.n_) return DualScalar(std::sin(a.v_));
  const int d = a.depth();
  const DualScalar av = a.value_part(d);
  return DualScalar::make(sin(av), cos(av) * a.derivative_part(d), d);
}

DualScalar cos(const DualScalar& a) {
  if (!a.n_) return DualScalar(std::cos(a.v_));
  const int d = a.depth();
  const DualScalar av = a.value_part(d);
  return DualScalar::make(cos(av), -sin(av) * a.derivative_part(d), d);
}

DualScalar tan(const DualScalar& a) {
  if (std::cos(a.primal()) == 0.0)
    throw DomainError(describe("tan at a zero of cos", a.primal()));
  return sin(a) / cos(a);
}

DualScalar cot(const DualScalar& a) {
  if (std::sin(a.primal()) == 0.0)
    throw DomainError(describe("cot at a zero of sin", a.primal()));
  return cos(a) / sin(a);
}

DualScalar exp(const DualScalar& a) {
  if (!a.n_) return DualScalar(std::exp(a.v_));
  const int d = a.depth();
  const DualScalar ev = exp(a.value_part(d));
  return DualScalar::make(ev, ev * a.derivative_part(d), d);
}

DualScalar log(const DualScalar& a) {
  if (a.primal() <= 0.0)
    throw DomainError(describe("ln of a nonpositive value", a.primal()));
  if (!a.n_) return DualScalar(std::log(a.v_));
  const int d = a.depth();
  const DualScalar av = a.value_part(d);
  return DualScalar::make(log(av), a.derivative_part(d) / av, d);
}

DualScalar sqrt(const DualScalar& a) {
  if (a.primal() < 0.0)
    throw DomainError(describe("sqrt of a negative value", a.primal()));
  if (!a.n_) return DualScalar(std::sqrt(a.v_));
  if (a.primal() == 0.0)
    throw DomainError(describe("derivative of sqrt at 0", a.primal()));
  const int d = a.depth();
  const DualScalar s = sqrt(a.value_part(d));
  return DualScalar::make(s, a.derivative_part(d) / (DualScalar(2.0) * s), d);
}

DualScalar abs(const DualScalar& a) {
  const double p = a.primal();
  if (p > 0.0) return a;
  if (p < 0.0) return -a;
  if (a.depth() > 0)
    throw DomainError("abs is not differentiable at 0");
  return DualScalar(0.0);
}

namespace {

// Binary exponentiation over DualScalar. Used for the depth-0 path too so
// value components match bit for bit between plain and dual evaluation.
DualScalar powi(const DualScalar& a, long e) {
  if (e < 0) return DualScalar(1.0) / powi(a, -e);
  DualScalar acc(1.0);
  DualScalar base = a;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    base = base * base;
    e >>= 1;
  }
  return acc;
}

}  // namespace

DualScalar pow(const DualScalar& a, const DualScalar& b) {
  if (b.depth() == 0) {
    const double e = b.primal();
    if (std::isfinite(e) && e == std::nearbyint(e) && std::fabs(e) <= 1024.0)
      return powi(a, static_cast<long>(e));
  }
  if (a.primal() <= 0.0)
    throw DomainError(describe(
        "pow with a non-integer exponent needs a positive base", a.primal()));
  return exp(b * log(a));
}

}  // namespace deltabk
