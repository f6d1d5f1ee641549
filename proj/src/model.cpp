#include "deltabk/model.hpp"

#include <cstdio>
#include <memory>
#include <sstream>

#include "deltabk/sampling.hpp"

namespace deltabk {

bool Box::contains(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (!(x[i] >= bounds[i][0] && x[i] <= bounds[i][1])) return false;
  return true;
}

Eigen::VectorXd Box::center() const {
  Eigen::VectorXd c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = 0.5 * (bounds[i][0] + bounds[i][1]);
  return c;
}

Eigen::VectorXd Box::at(const Eigen::VectorXd& unit) const {
  Eigen::VectorXd x(dim());
  for (int i = 0; i < dim(); ++i)
    x[i] = bounds[i][0] + unit[i] * (bounds[i][1] - bounds[i][0]);
  return x;
}

Eigen::VectorXd VectorField::at(const Eigen::VectorXd& x, double u) const {
  return primals(f(to_scalars(x), DualScalar(u)));
}

namespace {

std::string coord_name(int i) { return "x" + std::to_string(i); }

std::string point_str(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x[i]);
    os << (i ? ", " : "") << buf;
  }
  os << ")";
  return os.str();
}

}  // namespace

// Shared build/validate logic for both system kinds.
struct SystemCompiler {
  int n;
  const std::map<std::string, double>& params;
  const Box& box;
  std::vector<std::string> slots;  // x1..xn then params
  ScalarVec slot_template;

  SystemCompiler(int n_, const std::map<std::string, double>& params_,
                 const Box& box_)
      : n(n_), params(params_), box(box_) {
    if (n < 1) throw ConfigError("system order must be at least 1");
    if (n > 8) throw ConfigError("system order is limited to 8");
    if (box.dim() != n)
      throw ConfigError("box must give bounds for every coordinate");
    for (int i = 0; i < n; ++i)
      if (!(box.bounds[i][0] <= box.bounds[i][1]))
        throw ConfigError("box bounds out of order for " + coord_name(i + 1));
    for (int i = 1; i <= n; ++i) slots.push_back(coord_name(i));
    for (const auto& [name, value] : params) {
      for (int i = 1; i <= n; ++i)
        if (name == coord_name(i))
          throw ConfigError("parameter '" + name +
                            "' collides with a coordinate name");
      slots.push_back(name);
    }
    slot_template.assign(slots.size(), DualScalar(0.0));
    std::size_t k = static_cast<std::size_t>(n);
    for (const auto& [name, value] : params) slot_template[k++] = value;
  }

  // Parses `text` and enforces the triangular rule: only x1..x`limit` plus
  // parameters may appear.
  std::pair<ExprPtr, CompiledExpr> build(const std::string& text, int limit,
                                         const std::string& what) {
    ExprPtr e;
    try {
      e = parse_expression(text);
    } catch (const SyntaxError& err) {
      throw ConfigError(what + ": " + err.what());
    }
    for (const std::string& v : free_variables(*e)) {
      bool ok = params.count(v) > 0;
      for (int i = 1; i <= limit && !ok; ++i) ok = (v == coord_name(i));
      if (!ok) {
        bool is_coord = false;
        for (int i = 1; i <= n; ++i)
          if (v == coord_name(i)) is_coord = true;
        if (is_coord)
          throw ConfigError(what + " references " + v +
                            "; only x1..x" + std::to_string(limit) +
                            " may appear there");
        throw ConfigError(what + " references unknown name '" + v + "'");
      }
    }
    CompiledExpr c;
    try {
      c = CompiledExpr::compile(*e, slots);
    } catch (const UnboundVariableError& err) {
      throw ConfigError(what + ": " + err.what());
    }
    return {e, c};
  }

  // Checks an already-compiled gain against zero on sampled box points.
  void check_nonzero(const CompiledExpr& c, const std::string& what) const {
    ScalarVec scratch = slot_template;
    const Eigen::VectorXd half = Eigen::VectorXd::Constant(n, 0.5);
    for (unsigned s = 0; s <= 64; ++s) {
      const Eigen::VectorXd x =
          box.at(s == 0 ? half : halton_point(s - 1, n));
      for (int i = 0; i < n; ++i) scratch[static_cast<std::size_t>(i)] = x[i];
      double value;
      try {
        value = c.eval(scratch).primal();
      } catch (const Error& err) {
        throw ConfigError(what + " fails to evaluate at " + point_str(x) +
                          ": " + err.what());
      }
      if (value == 0.0 || !std::isfinite(value))
        throw ConfigError(what + " vanishes at sampled point " + point_str(x));
    }
  }
};

namespace {

DualScalar eval_slots(const CompiledExpr& c, const ScalarVec& tmpl, int n,
                      const ScalarVec& x) {
  thread_local ScalarVec scratch;
  scratch.assign(tmpl.begin(), tmpl.end());
  for (int i = 0; i < n; ++i)
    scratch[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
  return c.eval(scratch);
}

}  // namespace

ParametricStrictFeedbackSystem ParametricStrictFeedbackSystem::create(
    int n, const std::vector<std::string>& h, const std::vector<double>& b,
    const std::string& g, const std::map<std::string, double>& params,
    const Box& box) {
  SystemCompiler sc(n, params, box);
  if (static_cast<int>(h.size()) != n)
    throw ConfigError("expected " + std::to_string(n) + " drift expressions");
  if (static_cast<int>(b.size()) != n - 1)
    throw ConfigError("expected " + std::to_string(n - 1) +
                      " interconnection gains");
  for (int l = 0; l < n - 1; ++l)
    if (b[static_cast<std::size_t>(l)] == 0.0)
      throw ConfigError("interconnection gain b" + std::to_string(l + 1) +
                        " must be nonzero");
  ParametricStrictFeedbackSystem sys;
  sys.n = n;
  sys.b = b;
  sys.params = params;
  sys.box = box;
  for (int l = 1; l <= n; ++l) {
    auto [e, c] = sc.build(h[static_cast<std::size_t>(l - 1)], l,
                           "h" + std::to_string(l));
    sys.h.push_back(e);
    sys.ch_.push_back(c);
  }
  auto [ge, gc] = sc.build(g, n, "g");
  sys.g = ge;
  sys.cg_ = gc;
  sc.check_nonzero(sys.cg_, "input gain g");
  sys.slot_template_ = sc.slot_template;
  return sys;
}

DualScalar ParametricStrictFeedbackSystem::h_at(int l,
                                                const ScalarVec& x) const {
  return eval_slots(ch_[static_cast<std::size_t>(l - 1)], slot_template_, n, x);
}

DualScalar ParametricStrictFeedbackSystem::g_at(const ScalarVec& x) const {
  return eval_slots(cg_, slot_template_, n, x);
}

StrictFeedbackSystem StrictFeedbackSystem::create(
    int n, const std::vector<std::string>& h, const std::vector<std::string>& g,
    const std::map<std::string, double>& params, const Box& box) {
  SystemCompiler sc(n, params, box);
  if (static_cast<int>(h.size()) != n)
    throw ConfigError("expected " + std::to_string(n) + " drift expressions");
  if (static_cast<int>(g.size()) != n)
    throw ConfigError("expected " + std::to_string(n) + " gain expressions");
  StrictFeedbackSystem sys;
  sys.n = n;
  sys.params = params;
  sys.box = box;
  for (int l = 1; l <= n; ++l) {
    auto [he, hc] = sc.build(h[static_cast<std::size_t>(l - 1)], l,
                             "h" + std::to_string(l));
    sys.h.push_back(he);
    sys.ch_.push_back(hc);
    auto [ge, gc] = sc.build(g[static_cast<std::size_t>(l - 1)], l,
                             "g" + std::to_string(l));
    sys.g.push_back(ge);
    sys.cg_.push_back(gc);
    sc.check_nonzero(gc, "gain g" + std::to_string(l));
  }
  sys.slot_template_ = sc.slot_template;
  return sys;
}

DualScalar StrictFeedbackSystem::h_at(int l, const ScalarVec& x) const {
  return eval_slots(ch_[static_cast<std::size_t>(l - 1)], slot_template_, n, x);
}

DualScalar StrictFeedbackSystem::g_at(int l, const ScalarVec& x) const {
  return eval_slots(cg_[static_cast<std::size_t>(l - 1)], slot_template_, n, x);
}

VectorField vector_field(const ParametricStrictFeedbackSystem& sys) {
  auto sp = std::make_shared<const ParametricStrictFeedbackSystem>(sys);
  return VectorField{
      sys.n, [sp](const ScalarVec& x, const DualScalar& u) {
        ScalarVec f;
        f.reserve(static_cast<std::size_t>(sp->n));
        for (int l = 1; l < sp->n; ++l)
          f.push_back(sp->h_at(l, x) +
                      DualScalar(sp->b[static_cast<std::size_t>(l - 1)]) *
                          x[static_cast<std::size_t>(l)]);
        f.push_back(sp->h_at(sp->n, x) + sp->g_at(x) * u);
        return f;
      }};
}

VectorField vector_field(const StrictFeedbackSystem& sys) {
  auto sp = std::make_shared<const StrictFeedbackSystem>(sys);
  return VectorField{
      sys.n, [sp](const ScalarVec& x, const DualScalar& u) {
        ScalarVec f;
        f.reserve(static_cast<std::size_t>(sp->n));
        for (int l = 1; l < sp->n; ++l)
          f.push_back(sp->h_at(l, x) +
                      sp->g_at(l, x) * x[static_cast<std::size_t>(l)]);
        f.push_back(sp->h_at(sp->n, x) + sp->g_at(sp->n, x) * u);
        return f;
      }};
}

VectorField vector_field(const ParametricField& pf) {
  auto sp = std::make_shared<const ParametricField>(pf);
  return VectorField{
      pf.n, [sp](const ScalarVec& x, const DualScalar& u) {
        ScalarVec f;
        f.reserve(static_cast<std::size_t>(sp->n));
        for (int l = 1; l < sp->n; ++l)
          f.push_back(sp->h(l, x) +
                      DualScalar(sp->b[static_cast<std::size_t>(l - 1)]) *
                          x[static_cast<std::size_t>(l)]);
        f.push_back(sp->h(sp->n, x) + sp->g(x) * u);
        return f;
      }};
}

ScalarVec transform_coordinates(const StrictFeedbackSystem& sys,
                                const ScalarVec& x) {
  ScalarVec y;
  y.reserve(static_cast<std::size_t>(sys.n));
  y.push_back(x[0]);
  DualScalar prod(1.0);
  for (int l = 2; l <= sys.n; ++l) {
    prod = prod * sys.g_at(l - 1, x);
    y.push_back(prod * x[static_cast<std::size_t>(l - 1)]);
  }
  return y;
}

Eigen::VectorXd transform_coordinates(const StrictFeedbackSystem& sys,
                                      const Eigen::VectorXd& x) {
  return primals(transform_coordinates(sys, to_scalars(x)));
}

ScalarVec invert_coordinates(const StrictFeedbackSystem& sys,
                             const ScalarVec& y) {
  ScalarVec x(static_cast<std::size_t>(sys.n), DualScalar(0.0));
  x[0] = y[0];
  DualScalar prod(1.0);
  for (int l = 2; l <= sys.n; ++l) {
    // g_{l-1} only reads x1..x_{l-1}, which are recovered already.
    prod = prod * sys.g_at(l - 1, x);
    if (prod.primal() == 0.0 || !std::isfinite(prod.primal()))
      throw DomainError("coordinate change is singular: gain product "
                        "vanishes while inverting y" + std::to_string(l));
    x[static_cast<std::size_t>(l - 1)] = y[static_cast<std::size_t>(l - 1)] / prod;
  }
  return x;
}

Eigen::VectorXd invert_coordinates(const StrictFeedbackSystem& sys,
                                   const Eigen::VectorXd& y) {
  return primals(invert_coordinates(sys, to_scalars(y)));
}

ParametricField ParametricField::from_system(
    const ParametricStrictFeedbackSystem& sys) {
  auto sp = std::make_shared<const ParametricStrictFeedbackSystem>(sys);
  ParametricField pf;
  pf.n = sys.n;
  pf.b = sys.b;
  pf.box = sys.box;
  pf.h = [sp](int l, const ScalarVec& x) { return sp->h_at(l, x); };
  pf.g = [sp](const ScalarVec& x) { return sp->g_at(x); };
  return pf;
}

namespace {

// Component l of the gain-normalizing map, as a differentiable closure.
DualScalar map_component(const StrictFeedbackSystem& sys, int l,
                         const ScalarVec& x) {
  DualScalar prod(1.0);
  for (int i = 1; i < l; ++i) prod = prod * sys.g_at(i, x);
  return prod * x[static_cast<std::size_t>(l - 1)];
}

// f_j(x, u) for the strict-feedback field; j <= n-1 never reads u.
DualScalar strict_component(const StrictFeedbackSystem& sys, int j,
                            const ScalarVec& x, const DualScalar& u) {
  if (j < sys.n)
    return sys.h_at(j, x) + sys.g_at(j, x) * x[static_cast<std::size_t>(j)];
  return sys.h_at(sys.n, x) + sys.g_at(sys.n, x) * u;
}

}  // namespace

ParametricField to_parametric(const StrictFeedbackSystem& sys) {
  auto sp = std::make_shared<const StrictFeedbackSystem>(sys);
  ParametricField pf;
  pf.n = sys.n;
  pf.b.assign(static_cast<std::size_t>(sys.n - 1), 1.0);
  pf.box = sys.box;
  // Row l of the map Jacobian dotted with f_1..f_l, all at x = phi^{-1}(y).
  const auto pushforward = [sp](int l, const ScalarVec& y,
                                const DualScalar& u) {
    const ScalarVec x = invert_coordinates(*sp, y);
    const ScalarFn component = [sp, l](const ScalarVec& p) {
      return map_component(*sp, l, p);
    };
    DualScalar val(0.0);
    for (int j = 1; j <= l; ++j)
      val = val + seeded_partial(component, x, j - 1) *
                      strict_component(*sp, j, x, u);
    return val;
  };
  pf.h = [pushforward, n = sys.n](int l, const ScalarVec& y) {
    const DualScalar val = pushforward(l, y, DualScalar(0.0));
    if (l < n) return val - y[static_cast<std::size_t>(l)];
    return val;
  };
  pf.g = [pushforward, n = sys.n](const ScalarVec& y) {
    // Derivative of the pushed-forward last component in u, seeded one level
    // above everything in scope.
    const int level = ambient_depth(y) + 1;
    const DualScalar u =
        DualScalar::with_derivative(DualScalar(0.0), DualScalar(1.0), level);
    return pushforward(n, y, u).derivative_part(level);
  };
  return pf;
}

}  // namespace deltabk
