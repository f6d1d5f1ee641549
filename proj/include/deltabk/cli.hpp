#pragma once

// Command implementations behind the deltabk executable: config resolution,
// synthesis/verification/simulation drivers, and artifact emission.
//
// Exit codes are a stable contract: 0 success, 1 failed verification or
// pair check, 2 config error, 3 runtime domain error.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace deltabk {

struct CliOptions {
  std::string config_path;               // -c/--config
  std::string system;                    // --system, replaces the config's
  std::optional<double> lambda;          // --lambda
  std::optional<std::uint64_t> seed;     // --seed
  std::string out_dir;                   // --out
  std::vector<std::string> eval_points;  // --eval "x1,...,xn"
  std::string metric;                    // --metric identity (diagnostic)
};

int cmd_synthesize(const CliOptions& opt);
int cmd_verify(const CliOptions& opt);
int cmd_simulate(const CliOptions& opt);
int cmd_demo(const CliOptions& opt);

}  // namespace deltabk
