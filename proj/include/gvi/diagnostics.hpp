#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gvi/bw_geometry.hpp"
#include "gvi/potentials.hpp"

namespace gvi {

// Per-iteration diagnostics row. Optional fields are absent when the target
// or the estimate is unavailable for the experiment at hand.
struct TraceRecord {
  long k = 0;
  std::optional<double> kl_to_target;
  double f_gap_or_estimate = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> w2_sq_to_target;
  double grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> sigma_sq_hat;
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  double lambda_max = std::numeric_limits<double>::quiet_NaN();
  std::optional<long long> wall_time_ns;
};

// Recorded iterate p_k, plus the spectrum of the S_k the stepper used when
// leaving p_k (NaN on the final point, where no step follows).
struct TrajectoryPoint {
  long k;
  GaussianMeasure p;
  double step_s_min = std::numeric_limits<double>::quiet_NaN();
  double step_s_max = std::numeric_limits<double>::quiet_NaN();
};

struct CheckContext {
  long k = -1;
  double eta = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  int replicas = 1;
  std::uint64_t seed = 0;
};

// One runtime inequality: pass iff lhs <= rhs + slack_used.
struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack_used = 0.0;
  bool pass = false;
  CheckContext context;
};

BoundCheck make_check(std::string name, double lhs, double rhs, double slack,
                      CheckContext ctx);

// One check per line: name,k,eta,alpha,beta,replicas,seed,lhs,rhs,slack,pass.
void write_bound_checks(std::ostream& os, const std::vector<BoundCheck>& checks);

bool all_pass(const std::vector<BoundCheck>& checks);

struct Estimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double std_error = 0.0;
};

// F(mu) = E_mu V + H(mu). The potential energy uses the requested mode
// (exact closed form, Monte Carlo with n draws, or Gauss-Hermite with n
// nodes per axis); the entropy is always exact.
double objective(const PotentialSpec& pot, const GaussianMeasure& mu, MomentMode mode,
                 long n, Rng& rng);

// Monte Carlo / exact objective with a standard error (zero for exact modes).
Estimate objective_estimate(const PotentialSpec& pot, const GaussianMeasure& mu,
                            MomentMode mode, long n, Rng& rng);

// Squared tangent norm of the full objective gradient at mu given moment
// estimates: ||b||^2 + tr(S Sigma S) with S = S_hat - Sigma^{-1}.
double grad_norm_sq(const PotentialSpec& pot, const GaussianMeasure& mu,
                    const MomentEstimate& m);

// Mean squared tangent norm of the single-draw gradient error over
// n_redraws redraws, against exact (or d <= 4 quadrature) reference moments.
double sigma_sq_estimate(const PotentialSpec& pot, const GaussianMeasure& mu,
                         long n_redraws, Rng& rng);
Estimate sigma_sq_estimate_with_se(const PotentialSpec& pot, const GaussianMeasure& mu,
                                   long n_redraws, Rng& rng);

// Per-step contraction inequality for deterministic forward-backward runs on
// an exact-moment potential with Gaussian target (all sides closed-form):
// W2^2(p_{k+1}, target) <= (1 - alpha eta) W2^2(p_k, target)
//                          - 2 eta (F(p_{k+1}) - F(target)) + slack.
// Requires a trajectory recorded at every step.
std::vector<BoundCheck> check_one_step_inequality(
    const std::vector<TrajectoryPoint>& trajectory, const GaussianMeasure& target,
    double alpha, double beta, double eta, CheckContext ctx = {});

// Ensemble form for stochastic runs: both sides averaged over replicas, the
// variance term bounded through the gradient-variance inequality, and
// mc_slack_factor standard errors of slack.
std::vector<BoundCheck> check_one_step_inequality_ensemble(
    const std::vector<std::vector<TrajectoryPoint>>& replicas,
    const GaussianMeasure& target, double alpha, double beta, double eta,
    double mc_slack_factor, CheckContext ctx = {});

enum class RateTheorem { T1, T3, T4, T5, T6 };

struct RateCheckInput {
  const std::vector<TrajectoryPoint>* trajectory = nullptr;  // T1, T3
  const std::vector<TraceRecord>* trace = nullptr;           // T4 (grad norms)
  const std::vector<std::vector<TraceRecord>>* ensemble = nullptr;  // T5, T6
  const GaussianMeasure* target = nullptr;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();  // T4: F(p_0) - F(target)
  double w2_0_sq = std::numeric_limits<double>::quiet_NaN();  // T5/T6 starting distance
  double mc_slack_factor = 3.0;
  std::uint64_t seed = 0;
};

// Convergence-rate bounds checked on live data. Theorem assumptions are
// validated up front; a mismatch is a ConfigError, not a failed check.
//   T1: F(p_k) - F(target) <= W2^2(p_0, target) / (2 k eta)
//   T3: W2^2(p_k, target) <= exp(-alpha k eta) W2^2(p_0, target)
//   T4: min_{j<k} ||grad F||^2 <= 150 Delta / (eta k)
//   T5: E min_{k<=N} F(p_k) - F(target) <= 2 W2_0^2/(N eta) + 2 c eta W2_0^2
//       + 12 beta eta d,  c = 24 beta^3 lambda_max(target cov)
//   T6: E W2^2(p_k, target) <= exp(-alpha k eta / 2) W2_0^2 + 24 beta eta d / alpha
std::vector<BoundCheck> check_rate_theorems(RateTheorem which, const RateCheckInput& in);

// Gradient-variance bound at mu against a quadratic-style target:
// sigma_hat^2 <= 6 beta d + 12 beta^3 lambda_max(target cov) W2^2(mu, target)
// with mc_slack_factor standard errors of slack. n_redraws >= 100.
BoundCheck check_variance_bound(const PotentialSpec& pot, const GaussianMeasure& mu,
                                const GaussianMeasure& target, long n_redraws,
                                Rng& rng, double mc_slack_factor = 3.0,
                                CheckContext ctx = {});

// Spectral floor lambda_min(Sigma_k) >= 1/beta - 1e-9 for every recorded
// iterate, plus the two-sided sandwich
//   gamma_1^{-1} I <= Sigma_{k+1} <= gamma_0^{-1} I
// whenever gamma_0 I <= Sigma_k^{-1}, S_k <= gamma_1 I and eta <= 1/gamma_1
// hold (checked only on consecutively recorded steps).
std::vector<BoundCheck> check_eigenvalue_control(
    const std::vector<TrajectoryPoint>& trajectory, double beta, double eta,
    CheckContext ctx = {});

// Empirical stand-in for asymptotic convergence: W2^2(p_k, candidate) must be
// non-increasing (within slack) from some k0 <= horizon/2 onward, with the
// candidate taken from a longer reference run.
BoundCheck check_asymptotic_decrease(const std::vector<TrajectoryPoint>& trajectory,
                                     const GaussianMeasure& candidate,
                                     CheckContext ctx = {});

}  // namespace gvi
