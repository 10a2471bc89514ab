#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gvi/check_suite.hpp"
#include "gvi/config.hpp"
#include "gvi/experiments.hpp"

namespace {

int with_config(const std::string& path, int threads_override,
                int (*fn)(const gvi::ExperimentConfig&, std::ostream&)) {
  gvi::ExperimentConfig cfg;
  try {
    cfg = gvi::parse_config_file(path);
    if (threads_override > 0) cfg.threads = threads_override;
  } catch (const gvi::ConfigError& e) {
    std::cerr << "config error";
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    if (!e.field.empty()) std::cerr << " [" << e.field << "]";
    std::cerr << ": " << e.what() << '\n';
    return 2;
  }
  try {
    return fn(cfg, std::cout);
  } catch (const gvi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const gvi::Error& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian variational inference by forward-backward optimization "
               "over the Bures-Wasserstein space"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 0;

  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  run_cmd->add_option("config", config_path, "experiment config file")->required();
  run_cmd->add_option("--threads", threads, "worker threads (overrides config)");

  auto* sweep_cmd = app.add_subcommand("sweep", "execute a step-size sweep with summary");
  sweep_cmd->add_option("config", config_path, "experiment config file")->required();
  sweep_cmd->add_option("--threads", threads, "worker threads (overrides config)");

  auto* datagen_cmd = app.add_subcommand("datagen", "generate a logistic dataset");
  datagen_cmd->add_option("config", config_path, "experiment config file")->required();

  std::string suite = "fast";
  std::uint64_t seed = 20230605;
  std::string report = "check_report.csv";
  auto* check_cmd = app.add_subcommand("check", "run the checker suite");
  check_cmd->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  check_cmd->add_option("--seed", seed, "suite seed");
  check_cmd->add_option("--report", report, "bound-check report path");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return with_config(config_path, threads, gvi::cmd_run);
  if (sweep_cmd->parsed()) return with_config(config_path, threads, gvi::cmd_sweep);
  if (datagen_cmd->parsed()) return with_config(config_path, threads, gvi::cmd_datagen);
  if (check_cmd->parsed()) {
    try {
      return gvi::cmd_check(gvi::suite_from_string(suite), seed, std::cout, report);
    } catch (const gvi::Error& e) {
      std::cerr << "check suite failed to run: " << e.what() << '\n';
      return 3;
    }
  }
  return 2;
}
