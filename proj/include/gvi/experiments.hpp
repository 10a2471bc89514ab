#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gvi/config.hpp"
#include "gvi/dataset.hpp"

namespace gvi {

// Everything a run needs, built deterministically from the config seed.
struct ExperimentSetup {
  PotentialSpec pot;
  GaussianMeasure p0;
  std::optional<GaussianMeasure> target;
  std::optional<double> f_target;
  std::optional<GaussianMeasure> laplace;
  Estimate laplace_f;  // NaN value when not applicable
  LogisticData data;   // logistic only
  Eigen::VectorXd theta_true;
};

ExperimentSetup build_experiment(const ExperimentConfig& cfg);

// Output root: $GVI_OUTPUT_ROOT/<dir> when the variable is set, <dir> as-is
// otherwise.
std::string resolve_output_dir(const std::string& configured);

// First unstable iteration of a finished run, if any: a recorded stepper
// event, a non-finite diagnostic, lambda_max above 1e12, or (when the target
// KL is available) KL exceeding 100 x max(KL_0, 1).
std::optional<long> detect_divergence(const RunResult& result);

struct CombinationResult {
  int eta_index = 0;
  int replica = 0;
  double eta = 0.0;
  std::uint64_t stream_seed = 0;
  RunResult result;
  std::string trace_path;
};

// Shared engine for run and sweep: executes all (eta, replica) combinations
// on a worker pool (disjoint derived streams, order-fixed outputs) and writes
// one trace file per combination.
std::vector<CombinationResult> execute_combinations(const ExperimentConfig& cfg,
                                                    const ExperimentSetup& setup,
                                                    const std::string& out_dir);

void write_trace_csv(std::ostream& os, const ExperimentConfig& cfg,
                     const CombinationResult& combo,
                     const std::optional<Estimate>& laplace_f);

// Exit codes: 0 complete (recorded instabilities included), 2 config error,
// 3 numerical abort with partial traces.
int cmd_run(const ExperimentConfig& cfg, std::ostream& log);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);
int cmd_datagen(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace gvi
