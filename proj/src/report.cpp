#include "deltabk/report.hpp"

#include <cstdio>
#include <sstream>

namespace deltabk {

namespace {

using json = nlohmann::ordered_json;

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json box_json(const Box& box) {
  json a = json::array();
  for (const auto& b : box.bounds) a.push_back(json::array({b[0], b[1]}));
  return a;
}

json worst_json(const WorstCase& w) {
  json j;
  j["value"] = w.value;
  j["point"] = vector_json(w.point);
  j["input"] = w.input;
  return j;
}

json pair_json(const PairSummary& p) {
  json j;
  j["index"] = p.index;
  j["kind"] = p.report.kind;
  j["first"] = p.first;
  j["second"] = p.second;
  if (!p.file.empty()) j["file"] = p.file;
  j["d0"] = p.report.d0;
  j["sup_input_difference"] = p.report.sup_input_difference;
  if (p.report.kind == "decay") {
    j["worst_equality_gap"] = p.report.worst_equality_gap;
    j["eps_equality"] = p.report.eps_equality;
  }
  j["worst_bound_margin"] = p.report.worst_bound_margin;
  j["eps_integration"] = p.report.eps_integration;
  j["pass"] = p.report.pass;
  return j;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

json verification_json(const VerificationReport& rep) {
  json j;
  j["frame"] = rep.frame;
  j["n"] = rep.n;
  j["lambda"] = rep.lambda;
  j["alpha"] = rep.alpha;
  j["samples"] = rep.samples;
  j["seed"] = rep.seed;
  j["box"] = box_json(rep.box);
  j["input_range"] = json::array({rep.input_range[0], rep.input_range[1]});
  j["tolerances"] = {{"state", rep.tol.state},
                     {"input", rep.tol.input},
                     {"positive_definite", rep.tol.pd}};
  j["worst_state_defect"] = worst_json(rep.worst_state_defect);
  j["worst_input_margin"] = worst_json(rep.worst_input_margin);
  j["min_metric_eigenvalue"] = worst_json(rep.min_metric_eigenvalue);
  j["failures"] = {{"state", rep.state_failures},
                   {"input", rep.input_failures},
                   {"metric", rep.metric_failures}};
  j["state_pass"] = rep.state_pass;
  j["input_pass"] = rep.input_pass;
  j["metric_pass"] = rep.metric_pass;
  j["pass"] = rep.pass;
  return j;
}

json report_json(const std::string& command, const std::string& config_digest,
                 const SynthesisSummary* synthesis,
                 const std::vector<VerificationReport>* frames,
                 const SimulationSummary* simulation) {
  json j;
  j["command"] = command;
  j["config_digest"] = config_digest;

  if (synthesis) {
    json s;
    s["system_kind"] = synthesis->system_kind;
    s["n"] = synthesis->n;
    s["lambda"] = synthesis->lambda;
    s["psi"] = synthesis->psi_structure;
    if (!synthesis->evaluations.empty()) {
      json evals = json::array();
      for (const EvaluationRecord& e : synthesis->evaluations) {
        json one;
        one["point"] = vector_json(e.point);
        one["uhat"] = e.uhat;
        one["u"] = e.u;
        evals.push_back(std::move(one));
      }
      s["evaluations"] = std::move(evals);
    }
    j["synthesize"] = std::move(s);
  }

  if (frames) {
    json fs = json::array();
    for (const VerificationReport& rep : *frames)
      fs.push_back(verification_json(rep));
    json v;
    v["frames"] = std::move(fs);
    bool all = true;
    for (const VerificationReport& rep : *frames) all = all && rep.pass;
    v["pass"] = all;
    j["verify"] = std::move(v);
  }

  if (simulation) {
    json s;
    s["t_end"] = simulation->t_end;
    s["h"] = simulation->h;
    s["lambda"] = simulation->lambda;
    json trajs = json::array();
    for (const TrajectorySummary& t : simulation->trajectories) {
      json one;
      one["index"] = t.index;
      if (!t.file.empty()) one["file"] = t.file;
      one["points"] = t.points;
      one["escaped"] = t.escaped;
      if (t.escaped) one["escape_step"] = t.escape_step;
      trajs.push_back(std::move(one));
    }
    s["trajectories"] = std::move(trajs);
    json pairs = json::array();
    for (const PairSummary& p : simulation->pairs)
      pairs.push_back(pair_json(p));
    s["pairs"] = std::move(pairs);
    s["pass"] = simulation->pass;
    j["simulate"] = std::move(s);
  }

  return j;
}

std::string verification_table(const VerificationReport& rep) {
  std::ostringstream out;
  out << "frame            " << rep.frame << "\n";
  out << "samples          " << rep.samples << " (seed " << rep.seed << ")\n";
  out << "state check      " << (rep.state_pass ? "pass" : "FAIL")
      << "   worst defect " << format_value(rep.worst_state_defect.value)
      << " (tol " << format_value(rep.tol.state) << ", "
      << rep.state_failures << " failures)\n";
  out << "input check      " << (rep.input_pass ? "pass" : "FAIL")
      << "   worst margin " << format_value(rep.worst_input_margin.value)
      << " (tol -" << format_value(rep.tol.input) << ", "
      << rep.input_failures << " failures)\n";
  out << "metric check     " << (rep.metric_pass ? "pass" : "FAIL")
      << "   min eigenvalue " << format_value(rep.min_metric_eigenvalue.value)
      << " (floor " << format_value(rep.tol.pd) << ", "
      << rep.metric_failures << " failures)\n";
  out << "overall          " << (rep.pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

std::string dump_report(const nlohmann::ordered_json& j) {
  return j.dump(2) + "\n";
}

}  // namespace deltabk
