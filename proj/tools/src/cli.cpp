#include <CLI11.hpp>

#include <optional>
#include <ostream>

#include "one2one/app/commands.hpp"
#include "one2one/errors.hpp"

namespace one2one::app {

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<std::string> mode;
  std::optional<std::string> out;
};

void add_overrides(CLI::App* cmd, Overrides& o, const char* seed_help) {
  cmd->add_option("--seed", o.seed, seed_help);
  cmd->add_option("--epochs", o.epochs, "Override train.epochs")->check(CLI::NonNegativeNumber);
  cmd->add_option("--mode", o.mode, "Override train.mode")->check(CLI::IsMember({"one2one", "baseline"}));
  cmd->add_option("--out", o.out, "Override output.dir");
}

RunConfig load_with(const std::string& path, const Overrides& o, bool seed_is_eval) {
  RunConfig cfg = parse_config(path);
  if (o.seed) {
    if (seed_is_eval) {
      cfg.eval_seed = *o.seed;
    } else {
      cfg.data_seed = cfg.init_seed = cfg.train_seed = *o.seed;
    }
  }
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.mode) cfg.mode = gan::parse_mode(*o.mode);
  if (o.out) cfg.out_dir = *o.out;
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"one2one: unpaired translation with a shared self-inverse generator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint;
  Overrides train_o, eval_o;
  DemoOptions demo;
  std::string direction = "x2y";

  auto* train = app.add_subcommand("train", "Train a system from a config file");
  train->add_option("config", config_path, "Run config")->required();
  add_overrides(train, train_o, "Set seed.data, seed.init and seed.train");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the config's task");
  eval->add_option("config", config_path, "Run config")->required();
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  add_overrides(eval, eval_o, "Set eval.seed");

  auto* demo_cmd = app.add_subcommand("demo", "Translate one point CSV or PGM image with a checkpoint");
  demo_cmd->add_option("config", config_path, "Run config, validated if given");
  demo_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  demo_cmd->add_option("--input", demo.input, "Input .csv or .pgm")->required();
  demo_cmd->add_option("--output", demo.output, "Output path (same format as the input)")->required();
  demo_cmd->add_option("--repeat", demo.repeat, "Apply the generator this many times")->check(CLI::PositiveNumber);
  demo_cmd->add_option("--direction", direction, "x2y or y2x (baseline checkpoints only)")
      ->check(CLI::IsMember({"x2y", "y2x"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(load_with(config_path, train_o, false), out, err);
    if (*eval) return cmd_eval(load_with(config_path, eval_o, true), checkpoint, out, err);
    if (!config_path.empty()) parse_config(config_path);
    demo.checkpoint = checkpoint;
    demo.direction = direction == "y2x" ? data::Direction::y2x : data::Direction::x2y;
    return cmd_demo(demo, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace one2one::app
