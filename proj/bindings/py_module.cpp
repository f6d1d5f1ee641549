#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "deltabk/assemble.hpp"
#include "deltabk/config.hpp"
#include "deltabk/expr.hpp"
#include "deltabk/generator_reference.hpp"
#include "deltabk/report.hpp"
#include "deltabk/sim.hpp"
#include "deltabk/synthesis.hpp"
#include "deltabk/systems.hpp"
#include "deltabk/verify.hpp"

namespace py = pybind11;

namespace {

using namespace deltabk;

py::object json_to_py(const nlohmann::ordered_json& j) {
  switch (j.type()) {
    case nlohmann::detail::value_t::object: {
      py::dict d;
      for (const auto& [k, v] : j.items()) d[py::str(k)] = json_to_py(v);
      return d;
    }
    case nlohmann::detail::value_t::array: {
      py::list l;
      for (const auto& v : j) l.append(json_to_py(v));
      return l;
    }
    case nlohmann::detail::value_t::string:
      return py::str(j.get<std::string>());
    case nlohmann::detail::value_t::boolean:
      return py::bool_(j.get<bool>());
    case nlohmann::detail::value_t::number_integer:
      return py::int_(j.get<long long>());
    case nlohmann::detail::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case nlohmann::detail::value_t::number_float:
      return py::float_(j.get<double>());
    default:
      return py::none();
  }
}

Box box_from(const std::vector<std::array<double, 2>>& bounds) {
  return Box{bounds};
}

InputSignal signal_from(const py::handle& h) {
  if (py::isinstance<py::str>(h))
    return InputSignal::expression(h.cast<std::string>());
  if (py::isinstance<py::float_>(h) || py::isinstance<py::int_>(h))
    return InputSignal::constant(h.cast<double>());
  if (py::isinstance<py::list>(h) || py::isinstance<py::tuple>(h)) {
    std::vector<std::pair<double, double>> steps;
    for (const py::handle& e : h)
      steps.push_back(e.cast<std::pair<double, double>>());
    return InputSignal::schedule(std::move(steps));
  }
  throw ConfigError(
      "a signal is a number, an expression in t, or [(t, value), ...]");
}

// A synthesized controller bound to the system it was built from.
struct Controller {
  std::string kind;
  SynthesizedController ctrl;
  Box box;
  MetricField native;

  Controller(BuiltSystem bs, double lambda)
      : kind(bs.kind),
        ctrl(make_controller(bs, lambda)),
        box(bs.box),
        native(native_metric(ctrl)) {}
};

Controller controller_builtin(const std::string& name, double lambda,
                              const std::map<std::string, double>& params) {
  SystemSpec spec;
  spec.builtin = name;
  spec.params = params;
  return Controller(build_system(spec), lambda);
}

Controller controller_strict(const std::vector<std::string>& h,
                             const std::vector<std::string>& g,
                             const std::vector<std::array<double, 2>>& box,
                             const std::map<std::string, double>& params,
                             double lambda) {
  SystemSpec spec;
  spec.inline_form = true;
  spec.strict = true;
  spec.n = static_cast<int>(h.size());
  spec.h = h;
  spec.g = g;
  spec.params = params;
  spec.box = box_from(box);
  return Controller(build_system(spec), lambda);
}

Controller controller_cascade(const std::vector<std::string>& h,
                              const std::vector<double>& b,
                              const std::string& g,
                              const std::vector<std::array<double, 2>>& box,
                              const std::map<std::string, double>& params,
                              double lambda) {
  SystemSpec spec;
  spec.inline_form = true;
  spec.strict = false;
  spec.n = static_cast<int>(h.size());
  spec.h = h;
  spec.b = b;
  spec.g = {g};
  spec.params = params;
  spec.box = box_from(box);
  return Controller(build_system(spec), lambda);
}

py::dict verify_controller(const Controller& c, const std::string& frame,
                           int samples, std::uint64_t seed, double alpha,
                           double u_min, double u_max) {
  VerificationReport rep;
  const std::array<double, 2> input_range{u_min, u_max};
  if (frame == "identity") {
    rep = verify_region(closed_loop(c.ctrl), MetricField::identity(c.ctrl.n),
                        c.ctrl.lambda, alpha, c.box, samples, seed,
                        input_range);
  } else if (frame == "synthesis") {
    rep = verify_region(synthesis_closed_loop(c.ctrl),
                        metric_recursive(c.ctrl), c.ctrl.lambda, alpha,
                        c.ctrl.field.box, samples, seed, input_range);
  } else if (frame == "native") {
    rep = verify_region(closed_loop(c.ctrl), c.native, c.ctrl.lambda, alpha,
                        c.box, samples, seed, input_range);
  } else {
    throw ConfigError("frame must be 'native', 'synthesis', or 'identity'");
  }
  rep.frame = frame;
  return json_to_py(verification_json(rep));
}

py::dict record_to_py(const TrajectoryRecord& rec) {
  py::dict d;
  py::list t, states, inputs;
  for (int k = 0; k < rec.points(); ++k) {
    t.append(rec.time(k));
    states.append(rec.states[static_cast<std::size_t>(k)]);
    inputs.append(rec.inputs[static_cast<std::size_t>(k)]);
  }
  d["t"] = t;
  d["states"] = states;
  d["inputs"] = inputs;
  d["escaped"] = rec.escaped;
  d["escape_step"] = rec.escape_step;
  return d;
}

py::dict pair_to_py(const PairCheckReport& rep) {
  py::dict d;
  d["kind"] = rep.kind;
  d["d0"] = rep.d0;
  d["sup_input_difference"] = rep.sup_input_difference;
  d["worst_equality_gap"] = rep.worst_equality_gap;
  d["worst_bound_margin"] = rep.worst_bound_margin;
  d["eps_equality"] = rep.eps_equality;
  d["eps_integration"] = rep.eps_integration;
  d["pass"] = rep.pass;
  d["distance"] = rep.distance;
  d["envelope"] = rep.envelope;
  d["first"] = record_to_py(rep.first);
  d["second"] = record_to_py(rep.second);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Backstepping synthesis and incremental-stability verification for "
      "strict-feedback systems";

  py::register_exception<SyntaxError>(m, "ExpressionSyntaxError");
  py::register_exception<UnboundVariableError>(m, "UnboundVariable");
  py::register_exception<DomainError>(m, "MathDomainError");
  py::register_exception<ConfigError>(m, "ConfigurationError");

  py::class_<Controller>(m, "Controller")
      .def_property_readonly("n",
                             [](const Controller& c) { return c.ctrl.n; })
      .def_property_readonly(
          "rate", [](const Controller& c) { return c.ctrl.lambda; })
      .def_readonly("kind", &Controller::kind)
      .def_property_readonly(
          "box",
          [](const Controller& c) { return c.box.bounds; })
      .def(
          "control",
          [](const Controller& c, const Eigen::VectorXd& x, double uhat) {
            return c.ctrl.control(x, uhat);
          },
          py::arg("x"), py::arg("uhat") = 0.0,
          "Feedback value u = k(x, uhat) in the system's own coordinates")
      .def(
          "psi",
          [](const Controller& c, const Eigen::VectorXd& x) {
            return c.ctrl.psi(x);
          },
          py::arg("x"), "Flattening coordinates z = psi(x)")
      .def(
          "lyapunov",
          [](const Controller& c, const Eigen::VectorXd& x) {
            return c.ctrl.lyapunov(x);
          },
          py::arg("x"), "V(x) = |psi(x)|^2 / 2")
      .def(
          "metric",
          [](const Controller& c, const Eigen::VectorXd& x) {
            return c.native.at(x);
          },
          py::arg("x"), "Contraction metric in the system's own coordinates")
      .def(
          "metric_synthesis",
          [](const Controller& c, const Eigen::VectorXd& y) {
            return metric_recursive(c.ctrl).at(y);
          },
          py::arg("y"), "Recursive metric in the synthesis coordinates")
      .def(
          "distance",
          [](const Controller& c, const Eigen::VectorXd& x,
             const Eigen::VectorXd& x2) {
            return riemannian_distance(c.ctrl, x, x2);
          },
          py::arg("x"), py::arg("x2"),
          "Metric distance |psi(x) - psi(x2)|");

  m.def("builtin_controller", &controller_builtin, py::arg("name"),
        py::arg("rate") = 2.0,
        py::arg("params") = std::map<std::string, double>{},
        "Synthesize for a builtin system: generator, scalar-demo, "
        "two-state-demo");
  m.def("strict_controller", &controller_strict, py::arg("h"), py::arg("g"),
        py::arg("box"), py::arg("params") = std::map<std::string, double>{},
        py::arg("rate") = 2.0,
        "Synthesize for a strict-feedback system given h_i and g_i "
        "expressions");
  m.def("cascade_controller", &controller_cascade, py::arg("h"), py::arg("b"),
        py::arg("g"), py::arg("box"),
        py::arg("params") = std::map<std::string, double>{},
        py::arg("rate") = 2.0,
        "Synthesize for a gain-normalized cascade given h_i, constant b_i, "
        "and g");

  m.def("verify", &verify_controller, py::arg("controller"),
        py::arg("frame") = "native", py::arg("samples") = 2000,
        py::arg("seed") = 42, py::arg("alpha") = 2.0, py::arg("u_min") = -1.0,
        py::arg("u_max") = 1.0,
        "Sample the contraction and input-margin checks over the working "
        "box");

  m.def(
      "integrate",
      [](const Controller& c, const Eigen::VectorXd& x0,
         const py::handle& signal, double t_end, double h) {
        return record_to_py(
            integrate(closed_loop(c.ctrl), x0, signal_from(signal), t_end,
                      h));
      },
      py::arg("controller"), py::arg("x0"), py::arg("signal") = 0.0,
      py::arg("t_end") = 5.0, py::arg("h") = 1e-3,
      "Closed-loop trajectory under the external input signal");

  m.def(
      "decay_check",
      [](const Controller& c, const Eigen::VectorXd& x0,
         const Eigen::VectorXd& x0b, const py::handle& signal, double t_end,
         double h) {
        return pair_to_py(gas_decay_check(c.ctrl, closed_loop(c.ctrl), x0,
                                          x0b, signal_from(signal), t_end,
                                          h));
      },
      py::arg("controller"), py::arg("x0"), py::arg("x0b"),
      py::arg("signal") = 0.0, py::arg("t_end") = 5.0, py::arg("h") = 1e-3,
      "Shared-input pair: exponential decay of the psi-distance");

  m.def(
      "iss_check",
      [](const Controller& c, const Eigen::VectorXd& x0,
         const Eigen::VectorXd& x0b, const py::handle& signal_a,
         const py::handle& signal_b, double t_end, double h) {
        return pair_to_py(iss_bound_check(c.ctrl, closed_loop(c.ctrl), x0,
                                          x0b, signal_from(signal_a),
                                          signal_from(signal_b), t_end, h));
      },
      py::arg("controller"), py::arg("x0"), py::arg("x0b"),
      py::arg("signal_a"), py::arg("signal_b"), py::arg("t_end") = 5.0,
      py::arg("h") = 1e-3,
      "Differing-input pair: decay plus input-gain envelope");

  m.def(
      "evaluate",
      [](const std::string& text, const std::map<std::string, double>& b) {
        Bindings bindings;
        for (const auto& [k, v] : b) bindings.emplace(k, DualScalar(v));
        return evaluate(*parse_expression(text), bindings).primal();
      },
      py::arg("text"), py::arg("bindings") = std::map<std::string, double>{},
      "Evaluate an expression under the given variable bindings");
  m.def(
      "free_variables",
      [](const std::string& text) {
        return free_variables(*parse_expression(text));
      },
      py::arg("text"));
  m.def(
      "config_digest",
      [](const std::string& text) {
        return parse_run_config(text).digest;
      },
      py::arg("text"),
      "Validate a config text and return its content digest");

  m.def(
      "reference_control",
      [](const Eigen::Vector3d& eta, double uhat,
         const std::map<std::string, double>& params) {
        return reference_control(generator_params(params), eta, uhat);
      },
      py::arg("eta"), py::arg("uhat") = 0.0,
      py::arg("params") = std::map<std::string, double>{},
      "Hand-written generator control law at rate 2");
  m.def(
      "reference_metric",
      [](const Eigen::Vector3d& y,
         const std::map<std::string, double>& params) {
        return reference_metric(generator_params(params), y);
      },
      py::arg("y"), py::arg("params") = std::map<std::string, double>{},
      "Hand-written generator metric at rate 2");
}
