#pragma once

// Run configuration: a TOML-shaped text file is parsed, schema-validated
// (unknown keys rejected), and turned into ready-to-use settings.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deltabk/model.hpp"
#include "deltabk/sim.hpp"
#include "deltabk/verify.hpp"

namespace deltabk {

struct SystemSpec {
  // Exactly one of: a built-in name, or an inline definition.
  std::string builtin;  // "generator" | "scalar-demo" | "two-state-demo"
  bool inline_form = false;
  bool strict = false;  // inline form: g list => strict, b list + one g =>
                        // gain-normalized
  int n = 0;
  std::vector<std::string> h;
  std::vector<std::string> g;  // one entry (gain-normalized) or n (strict)
  std::vector<double> b;
  std::map<std::string, double> params;
  Box box;
};

struct VerifySettings {
  int samples = 2000;
  std::uint64_t seed = 42;
  Tolerances tol;
  std::array<double, 2> input_range{-1.0, 1.0};
};

struct SimulateSettings {
  double t_end = 5.0;
  double h = 1e-3;
  double eps_equality = 1e-6;  // relative allowance for decay-pair equality
  double eps_integration = 1e-6;
  std::vector<Eigen::VectorXd> initial_states;
  std::vector<InputSignal> signals;  // empty, or one per initial state
  std::optional<Box> escape_box;
};

struct OutputSettings {
  std::string directory = "out";
  bool json = true;
  bool csv = true;
};

struct RunConfig {
  double lambda = 2.0;
  double alpha = 2.0;
  SystemSpec system;
  VerifySettings verify;
  SimulateSettings simulate;
  OutputSettings output;
  std::string digest;  // hash of the raw config text
};

// Parses and validates; throws ConfigError with a line reference on any
// syntax problem, unknown key, or invariant violation.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// 16-hex-digit digest of arbitrary text (FNV-1a, 64 bit).
std::string text_digest(const std::string& text);

}  // namespace deltabk
