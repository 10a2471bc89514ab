#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvi/gvi_core.hpp"

namespace gvi {

enum class ExperimentKind { gaussian_target, logistic_regression, double_well };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& s);

// Flat key = value experiment description. seed and eta carry no defaults:
// every run names its own randomness and step sizes explicitly.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::gaussian_target;
  int d = 0;
  Variant variant = Variant::fbgvi;
  std::vector<double> eta;  // one entry for run, any number for sweep
  long iters = 0;           // N
  int replicas = 1;
  std::uint64_t seed = 0;
  MomentMode moment_mode = MomentMode::exact;
  long moment_batch = 10000;
  std::string output_dir;

  // gaussian_target: precision spectrum 10^cond_exp_min .. 10^cond_exp_max
  double cond_exp_min = 0.0;
  double cond_exp_max = 0.0;

  // logistic_regression
  long n = 0;
  double theta_scale = 1.0;
  std::string dataset;  // load instead of generating when non-empty

  // double_well
  double scale = 1.0;

  // diagnostics and execution
  long record_every = 1;
  long objective_samples = 2000;
  long diag_samples = 10000;
  double sigma0_scale = 1.0;  // p_0 = N(0, sigma0_scale * I)
  int threads = 0;            // 0 = hardware concurrency
  bool timing = false;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Resolved key = value form, stable ordering; embedded in output headers so
// every artifact names its own configuration.
std::string render_config(const ExperimentConfig& cfg);

}  // namespace gvi
