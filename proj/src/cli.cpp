#include "deltabk/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "deltabk/assemble.hpp"
#include "deltabk/config.hpp"
#include "deltabk/report.hpp"
#include "deltabk/sim.hpp"
#include "deltabk/synthesis.hpp"
#include "deltabk/verify.hpp"

namespace deltabk {

namespace {

std::string num17(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::string num6(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

std::string point_str(const Eigen::VectorXd& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += num17(x[i]);
  }
  return s + ")";
}

RunConfig resolve(const CliOptions& opt) {
  std::string text;
  RunConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in)
      throw ConfigError("cannot read config file '" + opt.config_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    cfg = parse_run_config(text);
  } else {
    cfg.system.builtin = "generator";
  }
  if (!opt.system.empty()) {
    cfg.system = SystemSpec{};
    cfg.system.builtin = opt.system;
    text += "\n# override system = " + opt.system;
  }
  if (opt.lambda) {
    if (!(*opt.lambda > 0.0)) throw ConfigError("lambda must be positive");
    cfg.lambda = *opt.lambda;
    text += "\n# override lambda = " + num17(*opt.lambda);
  }
  if (opt.seed) {
    cfg.verify.seed = *opt.seed;
    text += "\n# override seed = " + std::to_string(*opt.seed);
  }
  if (!opt.out_dir.empty()) cfg.output.directory = opt.out_dir;
  cfg.digest = text_digest(text);
  return cfg;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << content))
    throw Error("cannot write '" + p.string() + "'");
}

std::vector<Eigen::VectorXd> parse_eval_points(
    const std::vector<std::string>& texts, int n) {
  std::vector<Eigen::VectorXd> out;
  for (const std::string& t : texts) {
    std::vector<double> coords;
    std::size_t pos = 0;
    while (pos <= t.size()) {
      const std::size_t comma = std::min(t.find(',', pos), t.size());
      const std::string field = t.substr(pos, comma - pos);
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      while (end && *end == ' ') ++end;
      if (field.empty() || !end || *end != '\0')
        throw ConfigError("--eval expects comma-separated numbers, got '" +
                          t + "'");
      coords.push_back(v);
      pos = comma + 1;
      if (comma == t.size()) break;
    }
    if (static_cast<int>(coords.size()) != n)
      throw ConfigError("--eval point needs " + std::to_string(n) +
                        " coordinates, got " +
                        std::to_string(coords.size()));
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = coords[static_cast<std::size_t>(i)];
    out.push_back(x);
  }
  return out;
}

std::string coordinate_args(char v, int upto) {
  std::string s;
  for (int i = 1; i <= upto; ++i) {
    if (i > 1) s += ", ";
    s += v + std::to_string(i);
  }
  return s;
}

SynthesisSummary synthesis_summary(const BuiltSystem& bs,
                                   const SynthesizedController& ctrl,
                                   const std::vector<Eigen::VectorXd>& pts) {
  SynthesisSummary s;
  s.system_kind = bs.kind;
  s.n = ctrl.n;
  s.lambda = ctrl.lambda;
  const char v = bs.strict ? 'y' : 'x';
  if (bs.strict)
    s.psi_structure.push_back(
        "y = Phi(x)  (gain-normalizing change of coordinates)");
  s.psi_structure.push_back(std::string("z1 = ") + v + "1");
  for (int l = 2; l <= ctrl.n; ++l)
    s.psi_structure.push_back("z" + std::to_string(l) + " = " + v +
                              std::to_string(l) + " - phi" +
                              std::to_string(l - 1) + "(" +
                              coordinate_args(v, l - 1) + ")");
  for (const Eigen::VectorXd& x : pts)
    s.evaluations.push_back({x, 0.0, ctrl.control(x, 0.0)});
  return s;
}

void print_synthesis(const SynthesisSummary& s) {
  std::cout << "lambda " << num6(s.lambda) << "\n";
  std::cout << "system " << s.system_kind << " (n = " << s.n << ")\n";
  std::cout << "psi:\n";
  for (const std::string& row : s.psi_structure)
    std::cout << "  " << row << "\n";
  for (const EvaluationRecord& e : s.evaluations)
    std::cout << "k(" << point_str(e.point) << ", " << num17(e.uhat)
              << ") = " << num17(e.u) << "\n";
}

std::vector<VerificationReport> run_verify(const RunConfig& cfg,
                                           const BuiltSystem& bs,
                                           const SynthesizedController& ctrl,
                                           const std::string& metric_flag) {
  std::vector<VerificationReport> frames;
  if (!metric_flag.empty() && metric_flag != "identity")
    throw ConfigError("--metric accepts only 'identity'");
  if (metric_flag == "identity") {
    VerificationReport r = verify_region(
        closed_loop(ctrl), MetricField::identity(bs.n), cfg.lambda, cfg.alpha,
        bs.box, cfg.verify.samples, cfg.verify.seed, cfg.verify.input_range,
        cfg.verify.tol);
    r.frame = "identity";
    frames.push_back(std::move(r));
    return frames;
  }
  if (bs.strict) {
    VerificationReport r = verify_region(
        synthesis_closed_loop(ctrl), metric_recursive(ctrl), cfg.lambda,
        cfg.alpha, ctrl.field.box, cfg.verify.samples, cfg.verify.seed,
        cfg.verify.input_range, cfg.verify.tol);
    r.frame = "synthesis";
    frames.push_back(std::move(r));
  }
  VerificationReport r = verify_region(
      closed_loop(ctrl), native_metric(ctrl), cfg.lambda, cfg.alpha, bs.box,
      cfg.verify.samples, cfg.verify.seed, cfg.verify.input_range,
      cfg.verify.tol);
  r.frame = "native";
  frames.push_back(std::move(r));
  return frames;
}

// Mild deterministic spread around the box center; the mixed default input
// suite pairs them as (0,1) shared input and (2,3) differing inputs.
std::vector<Eigen::VectorXd> default_states(const Box& box) {
  const Eigen::VectorXd c = box.center();
  Eigen::VectorXd w(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    const auto& b = box.bounds[static_cast<std::size_t>(i)];
    w[i] = 0.5 * (b[1] - b[0]);
  }
  const double scale[4] = {0.15, -0.10, 0.05, -0.15};
  std::vector<Eigen::VectorXd> out;
  for (double s : scale) out.push_back(c + s * w);
  return out;
}

std::vector<InputSignal> default_signals(double h) {
  const long long k = std::max<long long>(1, std::llround(1.0 / h));
  const double t_step = static_cast<double>(k) * h;
  return {InputSignal::constant(0.0), InputSignal::constant(0.0),
          InputSignal::constant(0.0),
          InputSignal::schedule({{0.0, 0.0}, {t_step, 0.1}})};
}

struct SimArtifacts {
  SimulationSummary summary;
  std::vector<std::string> trajectory_csv;  // parallel to trajectories
  std::vector<std::string> pair_csv;        // parallel to pairs
  bool escaped = false;
};

std::string pair_csv_text(const PairCheckReport& rep) {
  std::string out = "t,d,envelope\n";
  for (std::size_t k = 0; k < rep.distance.size(); ++k) {
    out += num17(rep.first.time(static_cast<int>(k)));
    out += ',';
    out += num17(rep.distance[k]);
    out += ',';
    out += num17(rep.envelope[k]);
    out += '\n';
  }
  return out;
}

SimArtifacts run_simulate(const RunConfig& cfg, const BuiltSystem& bs,
                          const SynthesizedController& ctrl) {
  SimArtifacts arts;
  const SimulateSettings& ss = cfg.simulate;
  std::vector<Eigen::VectorXd> states = ss.initial_states;
  std::vector<InputSignal> signals = ss.signals;
  if (states.empty()) {
    states = default_states(bs.box);
    if (signals.empty()) signals = default_signals(ss.h);
  }
  if (signals.empty())
    signals.assign(states.size(), InputSignal::constant(0.0));
  if (signals.size() != states.size())
    throw ConfigError("input signals must match initial states in length");
  for (const Eigen::VectorXd& x : states)
    if (x.size() != bs.n)
      throw ConfigError("initial state dimension does not match the system");

  const VectorField f_closed = closed_loop(ctrl);
  IntegrateOptions iopts;
  iopts.escape_box = ss.escape_box;
  iopts.lambda = cfg.lambda;
  iopts.seed = cfg.verify.seed;
  iopts.config_digest = cfg.digest;

  SimulationSummary& sum = arts.summary;
  sum.t_end = ss.t_end;
  sum.h = ss.h;
  sum.lambda = cfg.lambda;

  for (std::size_t i = 0; i < states.size(); ++i) {
    const TrajectoryRecord rec =
        integrate(f_closed, states[i], signals[i], ss.t_end, ss.h, iopts);
    TrajectorySummary t;
    t.index = static_cast<int>(i);
    if (cfg.output.csv)
      t.file = "trajectory_" + std::to_string(i) + ".csv";
    t.points = rec.points();
    t.escaped = rec.escaped;
    t.escape_step = rec.escape_step;
    sum.trajectories.push_back(t);
    arts.trajectory_csv.push_back(export_csv(rec));
    arts.escaped = arts.escaped || rec.escaped;
  }
  if (arts.escaped) {
    sum.pass = false;
    return arts;
  }

  for (std::size_t p = 0; 2 * p + 1 < states.size(); ++p) {
    const std::size_t a = 2 * p, b = 2 * p + 1;
    const double supdiff =
        signals[a].sup_difference(signals[b], ss.t_end, ss.h);
    PairCheckReport rep =
        supdiff == 0.0
            ? gas_decay_check(ctrl, f_closed, states[a], states[b],
                              signals[a], ss.t_end, ss.h, ss.eps_equality,
                              ss.eps_integration)
            : iss_bound_check(ctrl, f_closed, states[a], states[b],
                              signals[a], signals[b], ss.t_end, ss.h,
                              ss.eps_integration);
    PairSummary ps;
    ps.index = static_cast<int>(p);
    if (cfg.output.csv) ps.file = "pair_" + std::to_string(p) + ".csv";
    ps.first = static_cast<int>(a);
    ps.second = static_cast<int>(b);
    arts.pair_csv.push_back(pair_csv_text(rep));
    sum.pass = sum.pass && rep.pass;
    ps.report = std::move(rep);
    sum.pairs.push_back(std::move(ps));
  }
  return arts;
}

void print_simulation(const SimulationSummary& sum,
                      const std::string& out_dir) {
  for (const TrajectorySummary& t : sum.trajectories) {
    std::cout << "trajectory " << t.index << ": " << t.points << " points";
    if (t.escaped) std::cout << " (escaped at step " << t.escape_step << ")";
    if (!t.file.empty()) std::cout << " -> " << out_dir << "/" << t.file;
    std::cout << "\n";
  }
  for (const PairSummary& p : sum.pairs) {
    std::cout << "pair " << p.index << " (" << p.report.kind
              << "): d0 = " << num6(p.report.d0);
    if (p.report.kind == "decay")
      std::cout << ", worst equality gap " << num6(p.report.worst_equality_gap);
    std::cout << ", worst bound margin " << num6(p.report.worst_bound_margin)
              << " -> " << (p.report.pass ? "pass" : "FAIL") << "\n";
  }
}

void emit_outputs(const RunConfig& cfg, const nlohmann::ordered_json& report,
                  const SimArtifacts* arts) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output.directory;
  fs::create_directories(dir);
  if (cfg.output.json) {
    write_file(dir / "report.json", dump_report(report));
    std::cout << "report: " << (dir / "report.json").string() << "\n";
  }
  if (arts && cfg.output.csv) {
    for (std::size_t i = 0; i < arts->trajectory_csv.size(); ++i)
      write_file(dir / arts->summary.trajectories[i].file,
                 arts->trajectory_csv[i]);
    for (std::size_t p = 0; p < arts->pair_csv.size(); ++p)
      write_file(dir / arts->summary.pairs[p].file, arts->pair_csv[p]);
  }
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SyntaxError& e) {
    std::cerr << "config error: " << e.what() << " (offset " << e.offset
              << ")\n";
    return 2;
  } catch (const UnboundVariableError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int cmd_synthesize(const CliOptions& opt) {
  return guarded([&] {
    const RunConfig cfg = resolve(opt);
    const BuiltSystem bs = build_system(cfg.system);
    const SynthesizedController ctrl = make_controller(bs, cfg.lambda);
    const SynthesisSummary s = synthesis_summary(
        bs, ctrl, parse_eval_points(opt.eval_points, bs.n));
    print_synthesis(s);
    emit_outputs(cfg, report_json("synthesize", cfg.digest, &s, nullptr,
                                  nullptr),
                 nullptr);
    return 0;
  });
}

int cmd_verify(const CliOptions& opt) {
  return guarded([&] {
    const RunConfig cfg = resolve(opt);
    const BuiltSystem bs = build_system(cfg.system);
    const SynthesizedController ctrl = make_controller(bs, cfg.lambda);
    const std::vector<VerificationReport> frames =
        run_verify(cfg, bs, ctrl, opt.metric);
    bool pass = true;
    for (const VerificationReport& f : frames) {
      std::cout << verification_table(f) << "\n";
      pass = pass && f.pass;
    }
    emit_outputs(cfg,
                 report_json("verify", cfg.digest, nullptr, &frames, nullptr),
                 nullptr);
    return pass ? 0 : 1;
  });
}

int cmd_simulate(const CliOptions& opt) {
  return guarded([&] {
    const RunConfig cfg = resolve(opt);
    const BuiltSystem bs = build_system(cfg.system);
    const SynthesizedController ctrl = make_controller(bs, cfg.lambda);
    const SimArtifacts arts = run_simulate(cfg, bs, ctrl);
    print_simulation(arts.summary, cfg.output.directory);
    emit_outputs(cfg,
                 report_json("simulate", cfg.digest, nullptr, nullptr,
                             &arts.summary),
                 &arts);
    if (arts.escaped) {
      std::cerr << "domain error: a trajectory left the escape box\n";
      return 3;
    }
    return arts.summary.pass ? 0 : 1;
  });
}

int cmd_demo(const CliOptions& opt) {
  return guarded([&] {
    const RunConfig cfg = resolve(opt);
    const BuiltSystem bs = build_system(cfg.system);
    const SynthesizedController ctrl = make_controller(bs, cfg.lambda);

    std::vector<Eigen::VectorXd> pts =
        parse_eval_points(opt.eval_points, bs.n);
    if (pts.empty()) pts.push_back(Eigen::VectorXd::Zero(bs.n));
    const SynthesisSummary syn = synthesis_summary(bs, ctrl, pts);
    print_synthesis(syn);
    std::cout << "\n";

    const std::vector<VerificationReport> frames =
        run_verify(cfg, bs, ctrl, opt.metric);
    bool vpass = true;
    for (const VerificationReport& f : frames) {
      std::cout << verification_table(f) << "\n";
      vpass = vpass && f.pass;
    }

    const SimArtifacts arts = run_simulate(cfg, bs, ctrl);
    print_simulation(arts.summary, cfg.output.directory);
    emit_outputs(cfg,
                 report_json("demo", cfg.digest, &syn, &frames,
                             &arts.summary),
                 &arts);
    if (arts.escaped) {
      std::cerr << "domain error: a trajectory left the escape box\n";
      return 3;
    }
    return vpass && arts.summary.pass ? 0 : 1;
  });
}

}  // namespace deltabk
