#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hierfed/experiment.hpp"

using namespace hierfed;

int main(int argc, char** argv) {
  CLI::App app{"hierarchical federated learning simulator for crop yield prediction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string models_path;
  std::string data_dir;
  std::vector<std::string> overrides;
  bool serial = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (defaults apply if omitted)");
    cmd->add_option("--set", overrides, "config override, dotted key=value (repeatable)");
    cmd->add_option("--out", out_override, "output directory (overrides config out_dir)");
    cmd->add_flag("--serial", serial, "disable OpenMP parallelism");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "run a full experiment season");
  add_common(cmd_run);
  CLI::App* cmd_gen = app.add_subcommand("gen", "generate and export the farm datasets");
  add_common(cmd_gen);
  CLI::App* cmd_eval = app.add_subcommand("eval", "re-evaluate saved models against test data");
  add_common(cmd_eval);
  cmd_eval->add_option("--models", models_path,
                       "models.json to evaluate (default: <out_dir>/models.json)");
  cmd_eval->add_option("--data", data_dir,
                       "directory with farm_<id>_test.csv files (default: regenerate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? parse_config_text("{}", overrides)
                                               : load_config_file(config_path, overrides);
    if (!out_override.empty()) cfg.out_dir = out_override;
    const ExecPolicy policy = serial ? ExecPolicy::Serial : ExecPolicy::OpenMP;

    if (cmd_run->parsed()) {
      run_experiment(cfg, policy);
    } else if (cmd_gen->parsed()) {
      run_generate(cfg, policy);
    } else {
      const std::string models =
          models_path.empty() ? cfg.out_dir + "/models.json" : models_path;
      run_reevaluate(cfg, models, data_dir, policy);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
