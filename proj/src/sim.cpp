#include "deltabk/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace deltabk {

InputSignal InputSignal::constant(double value) {
  if (!std::isfinite(value))
    throw ConfigError("input signal value must be finite");
  InputSignal s;
  s.steps_ = {{0.0, value}};
  return s;
}

InputSignal InputSignal::schedule(
    std::vector<std::pair<double, double>> steps) {
  if (steps.empty())
    throw ConfigError("schedule must contain at least one entry");
  if (steps.front().first != 0.0)
    throw ConfigError("schedule must start at t = 0");
  for (const auto& [t, v] : steps)
    if (!std::isfinite(t) || !std::isfinite(v))
      throw ConfigError("schedule entries must be finite");
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (!(steps[i].first > steps[i - 1].first))
      throw ConfigError("schedule times must be strictly increasing");
  InputSignal s;
  s.steps_ = std::move(steps);
  return s;
}

InputSignal InputSignal::expression(const std::string& text) {
  ExprPtr e;
  try {
    e = parse_expression(text);
  } catch (const SyntaxError& err) {
    throw ConfigError(std::string("input signal: ") + err.what());
  }
  for (const std::string& v : free_variables(*e))
    if (v != "t")
      throw ConfigError("input signal may only reference t; found '" + v +
                        "'");
  InputSignal s;
  s.expr_ = e;
  s.compiled_ = CompiledExpr::compile(*e, {"t"});
  s.text_ = text;
  return s;
}

double InputSignal::at(double t) const {
  if (expr_) {
    const ScalarVec slot{DualScalar(t)};
    return compiled_.eval(slot).primal();
  }
  double v = steps_.front().second;
  for (const auto& [ti, vi] : steps_) {
    if (ti <= t)
      v = vi;
    else
      break;
  }
  return v;
}

double InputSignal::sup_difference(const InputSignal& other, double t_end,
                                   double h) const {
  double sup = 0.0;
  const auto consider = [&](double t) {
    if (t < 0.0 || t > t_end) return;
    sup = std::max(sup, std::abs(at(t) - other.at(t)));
  };
  if (piecewise_constant() && other.piecewise_constant()) {
    // Both signals are constant between merged breakpoints, so checking the
    // breakpoints themselves is exact.
    consider(0.0);
    for (const auto& [t, v] : steps_) consider(t);
    for (const auto& [t, v] : other.steps_) consider(t);
    return sup;
  }
  if (!(h > 0.0)) throw ConfigError("step size must be positive");
  const long long steps = std::llround(t_end / h);
  for (long long k = 0; k <= steps; ++k) {
    consider(h * static_cast<double>(k));
    if (k < steps) consider(h * static_cast<double>(k) + 0.5 * h);
  }
  return sup;
}

namespace {

long long step_count(double t_end, double h) {
  if (!(h > 0.0)) throw ConfigError("step size must be positive");
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  const long long steps = std::llround(t_end / h);
  if (std::abs(t_end - static_cast<double>(steps) * h) >
      1e-9 * std::max(1.0, std::abs(t_end)))
    throw ConfigError("t_end must be a whole number of steps of size h");
  return steps;
}

// Schedule discontinuities must land on grid points so each step lies
// inside one constant piece.
void check_alignment(const InputSignal& sig, double t_end, double h) {
  if (!sig.piecewise_constant()) return;
  for (const auto& [t, v] : sig.steps()) {
    if (t > t_end) break;
    const long long k = std::llround(t / h);
    if (std::abs(t - static_cast<double>(k) * h) >
        1e-9 * std::max(1.0, std::abs(t))) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", t);
      throw ConfigError(std::string("schedule breakpoint t = ") + buf +
                        " is not on the integration grid");
    }
  }
}

}  // namespace

TrajectoryRecord integrate(const VectorField& f, const Eigen::VectorXd& x0,
                           const InputSignal& signal, double t_end, double h,
                           const IntegrateOptions& opts) {
  const long long steps = step_count(t_end, h);
  check_alignment(signal, t_end, h);
  if (opts.escape_box && opts.escape_box->dim() != f.n)
    throw ConfigError("escape box dimension does not match the system");

  TrajectoryRecord rec;
  rec.h = h;
  rec.lambda = opts.lambda;
  rec.seed = opts.seed;
  rec.config_digest = opts.config_digest;
  rec.states.reserve(static_cast<std::size_t>(steps) + 1);
  rec.inputs.reserve(static_cast<std::size_t>(steps) + 1);

  Eigen::VectorXd x = x0;
  rec.states.push_back(x);
  rec.inputs.push_back(signal.at(0.0));
  if (!x.allFinite() || (opts.escape_box && !opts.escape_box->contains(x))) {
    rec.escaped = true;
    rec.escape_step = 0;
    return rec;
  }

  const bool pc = signal.piecewise_constant();
  for (long long k = 0; k < steps; ++k) {
    const double t = h * static_cast<double>(k);
    Eigen::VectorXd xn;
    bool failed = false;
    try {
      const double u0 = signal.at(t);
      const double um = pc ? u0 : signal.at(t + 0.5 * h);
      const double u1 = pc ? u0 : signal.at(t + h);
      const Eigen::VectorXd s1 = f.at(x, u0);
      const Eigen::VectorXd s2 = f.at(x + 0.5 * h * s1, um);
      const Eigen::VectorXd s3 = f.at(x + 0.5 * h * s2, um);
      const Eigen::VectorXd s4 = f.at(x + h * s3, u1);
      xn = x + (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
    } catch (const DomainError&) {
      failed = true;
    }
    if (failed || !xn.allFinite()) {
      rec.escaped = true;
      rec.escape_step = static_cast<int>(k) + 1;
      return rec;
    }
    x = xn;
    rec.states.push_back(x);
    rec.inputs.push_back(signal.at(h * static_cast<double>(k + 1)));
    if (opts.escape_box && !opts.escape_box->contains(x)) {
      rec.escaped = true;
      rec.escape_step = static_cast<int>(k) + 1;
      return rec;
    }
  }
  return rec;
}

namespace {

PairCheckReport pair_check(const SynthesizedController& ctrl,
                           const VectorField& f_closed,
                           const Eigen::VectorXd& x0,
                           const Eigen::VectorXd& x0b, const InputSignal& sa,
                           const InputSignal& sb, bool equality_kind,
                           double t_end, double h, double eps_eq_rel,
                           double eps_int) {
  PairCheckReport rep;
  rep.kind = equality_kind ? "decay" : "bound";
  rep.first = integrate(f_closed, x0, sa, t_end, h);
  rep.second = integrate(f_closed, x0b, sb, t_end, h);
  if (rep.first.escaped || rep.second.escaped)
    throw DomainError("trajectory escaped during a pair check");

  const double lambda = ctrl.lambda;
  rep.d0 = riemannian_distance(ctrl, x0, x0b);
  rep.sup_input_difference =
      equality_kind ? 0.0 : sa.sup_difference(sb, t_end, h);
  rep.eps_integration = eps_int;
  rep.eps_equality = equality_kind ? eps_eq_rel * rep.d0 : 0.0;

  const int m = rep.first.points();
  rep.distance.reserve(static_cast<std::size_t>(m));
  rep.envelope.reserve(static_cast<std::size_t>(m));
  double worst_gap = 0.0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < m; ++k) {
    const double t = rep.first.time(k);
    const double decay = std::exp(-0.5 * lambda * t);
    const double d = riemannian_distance(
        ctrl, rep.first.states[static_cast<std::size_t>(k)],
        rep.second.states[static_cast<std::size_t>(k)]);
    double env = decay * rep.d0;
    double allowed;
    if (equality_kind) {
      worst_gap = std::max(worst_gap, std::abs(d - env));
      allowed = env * (1.0 + eps_int);
    } else {
      env += (2.0 / lambda) * (1.0 - decay) * rep.sup_input_difference;
      allowed = env + eps_int;
    }
    worst_margin = std::min(worst_margin, allowed - d);
    rep.distance.push_back(d);
    rep.envelope.push_back(env);
  }
  rep.worst_equality_gap = equality_kind ? worst_gap : 0.0;
  rep.worst_bound_margin = worst_margin;
  rep.pass = worst_margin >= 0.0 &&
             (!equality_kind || worst_gap <= rep.eps_equality);
  return rep;
}

}  // namespace

PairCheckReport gas_decay_check(const SynthesizedController& ctrl,
                                const VectorField& f_closed,
                                const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& x0b,
                                const InputSignal& signal, double t_end,
                                double h, double eps_equality_rel,
                                double eps_integration) {
  return pair_check(ctrl, f_closed, x0, x0b, signal, signal, true, t_end, h,
                    eps_equality_rel, eps_integration);
}

PairCheckReport iss_bound_check(const SynthesizedController& ctrl,
                                const VectorField& f_closed,
                                const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& x0b,
                                const InputSignal& signal,
                                const InputSignal& signal_b, double t_end,
                                double h, double eps_integration) {
  return pair_check(ctrl, f_closed, x0, x0b, signal, signal_b, false, t_end,
                    h, 0.0, eps_integration);
}

namespace {

void append_g17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string export_csv(const TrajectoryRecord& rec) {
  const int n =
      rec.states.empty() ? 0 : static_cast<int>(rec.states.front().size());
  std::string out = "t";
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  out += ",u\n";
  for (int k = 0; k < rec.points(); ++k) {
    append_g17(out, rec.time(k));
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_g17(out, rec.states[static_cast<std::size_t>(k)][i]);
    }
    out += ',';
    append_g17(out, rec.inputs[static_cast<std::size_t>(k)]);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_field(const std::string& s) {
  const char* c = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(c, &end);
  if (end == c || *end != '\0')
    throw Error("malformed numeric field '" + s + "' in CSV");
  return v;
}

}  // namespace

TrajectoryRecord parse_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t pos = text.find('\n', start);
    if (pos == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  if (lines.empty()) throw Error("empty CSV");
  const std::vector<std::string> head = split(lines[0], ',');
  if (head.size() < 3 || head.front() != "t" || head.back() != "u")
    throw Error("CSV header must be t,x1,...,xn,u");
  const int n = static_cast<int>(head.size()) - 2;
  for (int i = 0; i < n; ++i)
    if (head[static_cast<std::size_t>(i) + 1] != "x" + std::to_string(i + 1))
      throw Error("CSV header must be t,x1,...,xn,u");

  TrajectoryRecord rec;
  std::vector<double> times;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const std::vector<std::string> f = split(lines[r], ',');
    if (static_cast<int>(f.size()) != n + 2)
      throw Error("CSV row has wrong field count");
    times.push_back(parse_field(f[0]));
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i)
      x[i] = parse_field(f[static_cast<std::size_t>(i) + 1]);
    rec.states.push_back(x);
    rec.inputs.push_back(parse_field(f.back()));
  }
  if (times.empty()) throw Error("CSV has no data rows");
  rec.t0 = times[0];
  rec.h = times.size() > 1 ? times[1] - times[0] : 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - rec.time(static_cast<int>(k))) >
        1e-9 * std::max(1.0, std::abs(times[k])))
      throw Error("CSV time grid is not uniform");
  return rec;
}

}  // namespace deltabk
