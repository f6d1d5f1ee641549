#pragma once

// Structured run reports: machine-readable JSON plus compact console
// summaries. Serialization is deterministic (ordered keys, shortest
// round-trip doubles) so identical runs produce identical bytes.

#include <string>
#include <vector>

#include <json.hpp>

#include "deltabk/sim.hpp"
#include "deltabk/verify.hpp"

namespace deltabk {

struct EvaluationRecord {
  Eigen::VectorXd point;
  double uhat = 0.0;
  double u = 0.0;  // control value at (point, uhat)
};

struct SynthesisSummary {
  std::string system_kind;  // "gain-normalized cascade" | "strict-feedback"
  int n = 0;
  double lambda = 0.0;
  std::vector<std::string> psi_structure;  // one line per flattened coordinate
  std::vector<EvaluationRecord> evaluations;
};

struct TrajectorySummary {
  int index = 0;
  std::string file;  // empty when CSV output is disabled
  int points = 0;
  bool escaped = false;
  int escape_step = -1;
};

struct PairSummary {
  int index = 0;
  std::string file;  // distance/envelope CSV, empty when disabled
  int first = 0;     // trajectory indices the pair was formed from
  int second = 0;
  PairCheckReport report;
};

struct SimulationSummary {
  double t_end = 0.0;
  double h = 0.0;
  double lambda = 0.0;
  std::vector<TrajectorySummary> trajectories;
  std::vector<PairSummary> pairs;
  bool pass = true;  // every pair check passed and no trajectory escaped
};

// Assembles the full report. Sections are optional: pass nullptr for the
// parts the command did not run.
nlohmann::ordered_json report_json(
    const std::string& command, const std::string& config_digest,
    const SynthesisSummary* synthesis,
    const std::vector<VerificationReport>* frames,
    const SimulationSummary* simulation);

nlohmann::ordered_json verification_json(const VerificationReport& rep);

// Fixed-width console rendering of one verification frame.
std::string verification_table(const VerificationReport& rep);

// 2-space indent, LF line endings, trailing newline.
std::string dump_report(const nlohmann::ordered_json& j);

}  // namespace deltabk
