#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "gvi/bw_geometry.hpp"

namespace gvi {

enum class MomentMode { exact, monte_carlo, quadrature };

const char* to_string(MomentMode mode);
MomentMode moment_mode_from_string(const std::string& s);

struct MomentPair {
  Eigen::VectorXd b;  // E grad V
  Eigen::MatrixXd s;  // E hess V
};

// Estimate of (E_mu grad V, E_mu hess V); the forward-step inputs (b_k, S_k).
struct MomentEstimate {
  Eigen::VectorXd b_hat;
  SymMatrix s_hat;
  MomentMode mode = MomentMode::exact;
  long n_samples = 0;
  std::uint64_t seed_tag = 0;
};

// Oracle bundle for a potential V: value, gradient, Hessian, the convexity
// and smoothness constants alpha I <= hess <= beta I, plus closed-form moment
// capabilities where they exist.
struct PotentialSpec {
  int dim = 0;
  double alpha = 0.0;
  double beta = 0.0;
  bool exact_moments = false;

  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess;

  // Closed forms, null when unavailable.
  std::function<MomentPair(const GaussianMeasure&)> moments_exact;
  std::function<double(const GaussianMeasure&)> potential_energy_exact;  // E_mu V
};

// V(x) = <x - a, Q (x - a)> / 2; the log-density of the Gaussian target
// N(a, Q^{-1}) up to its normalizer. alpha = lambda_min(Q), beta = lambda_max(Q).
PotentialSpec quadratic_potential(const Eigen::VectorXd& a, const SpdMatrix& q);

// The KL minimizer for the quadratic potential: N(a, Q^{-1}).
GaussianMeasure quadratic_target(const Eigen::VectorXd& a, const SpdMatrix& q);

// Negative log-likelihood of logistic regression with a flat prior:
// V(theta) = sum_i [ln(1 + exp(<theta, x_i>)) - y_i <theta, x_i>].
// alpha = 0, beta = lambda_max(X^T X) / 4 (global smoothness bound).
PotentialSpec logistic_potential(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Separable smoothed double well, V(x) = scale * sum_j h(x_j). h matches the
// quartic (t^2 - 1)^2 / 4 for |t| <= 2/sqrt(3) and continues with constant
// curvature h'' = 3 outside, so h'' lies in [-1, 3] exactly and
// alpha = -scale, beta = 3 scale. Minima at t = +/- 1 per coordinate.
PotentialSpec double_well_potential(int dim, double scale);

// Moment estimation against mu.
//   exact:        requires pot.exact_moments.
//   monte_carlo:  n >= 1 i.i.d. draws from mu, deterministic given rng;
//                 n = 1 is the single-sample stochastic oracle.
//   quadrature:   d <= 4 tensor Gauss-Hermite; n is the nodes-per-axis count.
MomentEstimate compute_moments(const PotentialSpec& pot, const GaussianMeasure& mu,
                               MomentMode mode, long n, Rng& rng);

struct LogisticData {
  Eigen::MatrixXd x;  // n rows, d columns
  Eigen::VectorXd y;  // entries in {0, 1}
};

// Synthetic design: rows x_i ~ N(0, I_d), labels y_i ~ Bernoulli(sigmoid(<theta, x_i>)).
LogisticData generate_logistic_data(const Eigen::VectorXd& theta_true, long n, Rng& rng);

double sigmoid(double z);

}  // namespace gvi
