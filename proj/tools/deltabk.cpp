#include <CLI11.hpp>

#include "deltabk/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "deltabk: backstepping synthesis and incremental-stability "
      "verification for strict-feedback systems"};
  app.require_subcommand(1);

  deltabk::CliOptions opt;
  const auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("-c,--config", opt.config_path,
                    "run configuration file (TOML-shaped)");
    sub->add_option("--system", opt.system,
                    "builtin system: generator, scalar-demo, two-state-demo");
    sub->add_option("--lambda", opt.lambda, "contraction rate (default 2)");
    sub->add_option("--seed", opt.seed, "verification sampling seed");
    sub->add_option("--out", opt.out_dir, "output directory");
  };

  CLI::App* synthesize = app.add_subcommand(
      "synthesize", "construct the feedback law, isometry, and metric");
  add_common(synthesize);
  synthesize->add_option(
      "--eval", opt.eval_points,
      "state \"x1,...,xn\" to evaluate the control at (repeatable)");

  CLI::App* verify = app.add_subcommand(
      "verify", "sample the contraction and input-margin inequalities");
  add_common(verify);
  verify->add_option("--metric", opt.metric,
                     "replace the synthesized metric (diagnostic; only "
                     "'identity')");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "integrate trajectory pairs and check the decay bounds");
  add_common(simulate);

  CLI::App* demo = app.add_subcommand(
      "demo", "synthesize, verify, and simulate the generator defaults");
  add_common(demo);
  demo->add_option("--eval", opt.eval_points,
                   "state to evaluate the control at (repeatable)");
  demo->add_option("--metric", opt.metric,
                   "replace the synthesized metric (diagnostic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (synthesize->parsed()) return deltabk::cmd_synthesize(opt);
  if (verify->parsed()) return deltabk::cmd_verify(opt);
  if (simulate->parsed()) return deltabk::cmd_simulate(opt);
  return deltabk::cmd_demo(opt);
}
