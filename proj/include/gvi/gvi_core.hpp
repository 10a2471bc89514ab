#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gvi/diagnostics.hpp"
#include "gvi/potentials.hpp"

namespace gvi {

enum class Variant { fbgvi, stochastic_fbgvi, bw_sgd, stochastic_bw_sgd };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);
bool is_stochastic(Variant v);

struct StepConfig {
  double eta = 0.0;
  Variant variant = Variant::fbgvi;
  // Moment source for the deterministic branches (exact, batch Monte Carlo,
  // or quadrature with n_samples nodes per axis).
  MomentMode moment_mode = MomentMode::exact;
  long n_samples = 10000;
  // Draws per stochastic step; the analyzed algorithm uses exactly one.
  int stochastic_batch = 1;
  std::uint64_t seed = 0;
};

// Step sizes beyond the contraction regime (eta > 1/beta deterministic,
// eta > 1/(2 beta) stochastic) are legitimate sweep inputs; they warn
// rather than error.
std::optional<std::string> step_size_warning(const StepConfig& cfg,
                                             const PotentialSpec& pot);

struct IterState {
  long k = 0;
  GaussianMeasure p;
  MomentEstimate last_moments;  // the (b_k, S_k) that produced p; empty at k = 0
  Rng rng;
};

IterState make_initial_state(const GaussianMeasure& p0, const StepConfig& cfg);

// Tangent gradient of the potential energy given moment estimates:
// x |-> b_hat + S_hat (x - m_mu), basepoint m_mu.
AffineMap bw_grad_potential(const PotentialSpec& pot, const GaussianMeasure& mu,
                            const MomentEstimate& m);

// Forward gradient step on the potential followed by the entropy proximal
// step:
//   m'      = m - eta b
//   M       = I - eta S
//   Sigma'  = JKO_eta(M Sigma M)   (the intermediate may be PSD-singular)
IterState fbgvi_step(const IterState& s, const PotentialSpec& pot,
                     const StepConfig& cfg);
IterState fbgvi_step_with_moments(const IterState& s, const MomentEstimate& m,
                                  double eta);

// Plain tangent gradient descent on potential plus entropy (no proximal
// step): Sigma' = M Sigma M with M = I - eta (S - Sigma^{-1}). Loss of
// positive definiteness raises DivergenceError with the offending eigenvalue.
IterState bw_sgd_step(const IterState& s, const PotentialSpec& pot,
                      const StepConfig& cfg);
IterState bw_sgd_step_with_moments(const IterState& s, const MomentEstimate& m,
                                   double eta);

// Dispatch on cfg.variant.
IterState step(const IterState& s, const PotentialSpec& pot, const StepConfig& cfg);

// Newton iteration on V from x0 until ||grad V|| <= tol; returns
// N(x*, hess(x*)^{-1}).
GaussianMeasure laplace_approximation(const PotentialSpec& pot,
                                      const Eigen::VectorXd& x0, int max_iter,
                                      double tol);

struct DivergenceEvent {
  long step = -1;
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  std::string what;
  bool numerical = false;  // true for failures other than recorded instability
};

struct TraceOptions {
  long record_every = 1;
  std::optional<GaussianMeasure> target;   // enables kl and w2sq columns
  std::optional<double> f_target;          // when set, f column is the gap F - F(target)
  // Moment/objective source for diagnostics rows; independent of the
  // stepper's own estimates, with its own derived streams.
  MomentMode diag_moment_mode = MomentMode::exact;
  long diag_samples = 10000;
  long objective_samples = 2000;
  long sigma_redraws = 0;                  // 0 disables the sigma_sq column
  bool timing = false;                     // wall_ns column; breaks byte-reproducibility
  std::ostream* warnings = nullptr;
  std::function<void(const IterState&)> on_iteration;  // called every iteration
};

struct RunResult {
  std::vector<TrajectoryPoint> trajectory;
  std::vector<TraceRecord> trace;
  std::optional<DivergenceEvent> divergence;
  double min_lambda_min = std::numeric_limits<double>::infinity();  // over all steps
  long min_lambda_k = -1;
  std::optional<IterState> final_state;
};

// Applies the configured stepper num_iters times, recording diagnostics every
// record_every iterations (k = 0 and the final iterate always included).
// Stepper failures abort the run and preserve the partial trajectory.
// Deterministic given cfg.seed, independent of thread placement.
RunResult run(const PotentialSpec& pot, const GaussianMeasure& p0,
              const StepConfig& cfg, long num_iters, const TraceOptions& topts);

// Independent replicas with disjoint derived streams, evaluated on a worker
// pool; the result order is fixed by replica index, not completion order.
std::vector<RunResult> run_ensemble(const PotentialSpec& pot, const GaussianMeasure& p0,
                                    const StepConfig& cfg, long num_iters,
                                    int replicas, const TraceOptions& topts,
                                    int threads);

}  // namespace gvi
