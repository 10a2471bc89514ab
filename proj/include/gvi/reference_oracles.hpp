#pragma once

#include <functional>

#include <Eigen/Core>

#include "gvi/bw_geometry.hpp"

namespace gvi {

// Brute-force oracles used by the test suites. Deliberately slow and simple:
// apart from the shared symmetric eigensolver they take none of the
// shortcuts of the implementations they validate.

struct GridSpec {
  double lower = 0.0;
  double upper = 0.0;
  int points = 1000;  // per pass
};

// Central difference of a functional along the pushforward curve
// t |-> ((id + t h)_# mu). Agrees with <grad, h>_mu up to O(t^2).
double fd_directional_derivative(const std::function<double(const GaussianMeasure&)>& functional,
                                 const GaussianMeasure& mu, const AffineMap& h,
                                 double t_step);

// Two-pass grid minimization of s |-> eta H(N(0, s)) + (sigma - sqrt(s))^2 / 2
// over scalar variances. Returns the refined argmin; errors if the coarse
// argmin lands on the bracket boundary.
double grid_jko_1d(double sigma_sq, double eta, const GridSpec& grid);

namespace detail {
// Standard-normal Gauss-Hermite rule (Golub-Welsch on the Jacobi matrix of
// the probabilists' Hermite recurrence). Weights sum to one.
void gauss_hermite_rule(int nodes, Eigen::VectorXd& x, Eigen::VectorXd& w);
}  // namespace detail

// Tensor-product Gauss-Hermite expectation of f under mu after whitening by
// the covariance square root. Exact for polynomials of per-axis degree
// < 2 * nodes_per_axis. Requires d <= 4 and nodes_per_axis in [5, 64].
template <typename F>
auto gauss_hermite_expectation(F&& f, const GaussianMeasure& mu, int nodes_per_axis)
    -> decltype(f(Eigen::VectorXd())) {
  const int d = mu.dim();
  if (d > 4) {
    throw CapabilityError("gauss_hermite_expectation: dimension " + std::to_string(d) +
                          " too large (max 4)");
  }
  if (nodes_per_axis < 5 || nodes_per_axis > 64) {
    throw InvariantViolation("gauss_hermite_expectation: nodes_per_axis must be in [5, 64]");
  }
  Eigen::VectorXd nodes, weights;
  detail::gauss_hermite_rule(nodes_per_axis, nodes, weights);
  const Eigen::MatrixXd r = mu.cov.sqrt_matrix();

  using Result = decltype(f(Eigen::VectorXd()));
  Result acc{};
  bool first = true;
  std::vector<int> idx(d, 0);
  Eigen::VectorXd u(d);
  while (true) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      u[j] = nodes[idx[j]];
      w *= weights[idx[j]];
    }
    Eigen::VectorXd x = mu.mean + r * u;
    if (first) {
      acc = w * f(x);
      first = false;
    } else {
      acc += w * f(x);
    }
    int j = 0;
    for (; j < d; ++j) {
      if (++idx[j] < nodes_per_axis) break;
      idx[j] = 0;
    }
    if (j == d) break;
  }
  return acc;
}

}  // namespace gvi
