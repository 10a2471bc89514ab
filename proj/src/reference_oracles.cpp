#include "gvi/reference_oracles.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace gvi {

double fd_directional_derivative(const std::function<double(const GaussianMeasure&)>& functional,
                                 const GaussianMeasure& mu, const AffineMap& h,
                                 double t_step) {
  if (t_step < 1e-6 || t_step > 1e-2) {
    throw InvariantViolation("fd_directional_derivative: t_step must be in [1e-6, 1e-2]");
  }
  const AffineMap h_mu = h.rebased(mu.mean);
  const PushforwardMeasure plus = pushforward_affine(mu, id_plus_scaled(h_mu, t_step));
  const PushforwardMeasure minus = pushforward_affine(mu, id_plus_scaled(h_mu, -t_step));
  if (plus.degenerate || minus.degenerate) {
    throw NumericalFailure("fd_directional_derivative: pushforward degenerate at t = " +
                           std::to_string(t_step));
  }
  return (functional(plus.to_gaussian()) - functional(minus.to_gaussian())) /
         (2.0 * t_step);
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double scalar_jko_objective(double s, double sigma, double eta) {
  const double ent = -0.5 * std::log(kTwoPi * std::exp(1.0)) - 0.5 * std::log(s);
  const double diff = sigma - std::sqrt(s);
  return eta * ent + 0.5 * diff * diff;
}

// Single-pass grid argmin; returns the index.
int grid_argmin(double lo, double hi, int points, double sigma, double eta,
                double* best_s) {
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double s = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(points - 1);
    if (s <= 0.0) continue;
    const double v = scalar_jko_objective(s, sigma, eta);
    if (v < best_val) {
      best_val = v;
      best = i;
      *best_s = s;
    }
  }
  return best;
}

}  // namespace

double grid_jko_1d(double sigma_sq, double eta, const GridSpec& grid) {
  if (grid.points < 3) throw InvariantViolation("grid_jko_1d: points must be >= 3");
  if (!(grid.lower < grid.upper)) {
    throw InvariantViolation("grid_jko_1d: lower must be < upper");
  }
  if (!(sigma_sq > 0.0) || !(eta > 0.0)) {
    throw InvariantViolation("grid_jko_1d: sigma_sq and eta must be positive");
  }
  const double sigma = std::sqrt(sigma_sq);

  double coarse_s = 0.0;
  const int i = grid_argmin(grid.lower, grid.upper, grid.points, sigma, eta, &coarse_s);
  if (i == 0 || i == grid.points - 1) {
    throw InvariantViolation("grid_jko_1d: argmin on bracket boundary, bracket violation");
  }
  const double cell = (grid.upper - grid.lower) / static_cast<double>(grid.points - 1);
  double fine_s = 0.0;
  grid_argmin(coarse_s - cell, coarse_s + cell, grid.points, sigma, eta, &fine_s);
  return fine_s;
}

namespace detail {

void gauss_hermite_rule(int nodes, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int i = 1; i < nodes; ++i) {
    const double b = std::sqrt(static_cast<double>(i));
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("gauss_hermite_rule: eigensolver failed");
  }
  x = solver.eigenvalues();
  w.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double v = solver.eigenvectors()(0, i);
    w[i] = v * v;
  }
}

}  // namespace detail

}  // namespace gvi
