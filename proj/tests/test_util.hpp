#pragma once

#include <Eigen/Dense>

#include "gvi/bw_geometry.hpp"
#include "gvi/psd_kernel.hpp"

namespace gvi_test {

inline gvi::GaussianMeasure scalar_gaussian(double mean, double variance) {
  return gvi::GaussianMeasure(Eigen::VectorXd::Constant(1, mean),
                              gvi::SpdMatrix(Eigen::MatrixXd::Constant(1, 1, variance)));
}

inline gvi::GaussianMeasure standard_gaussian(int d) {
  return gvi::GaussianMeasure(Eigen::VectorXd::Zero(d),
                              gvi::SpdMatrix(Eigen::MatrixXd::Identity(d, d)));
}

inline gvi::GaussianMeasure random_gaussian(int d, gvi::Rng& rng, double lo = 0.3,
                                            double hi = 3.0) {
  return gvi::GaussianMeasure(rng.normal_vector(d), gvi::random_spd(d, rng, lo, hi));
}

inline gvi::SymMatrix random_sym(int d, double scale, gvi::Rng& rng) {
  Eigen::MatrixXd g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = scale * rng.normal();
  return gvi::SymMatrix::symmetrized(g);
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace gvi_test
