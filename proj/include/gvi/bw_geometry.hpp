#pragma once

#include <Eigen/Core>

#include "gvi/psd_kernel.hpp"
#include "gvi/rng.hpp"

namespace gvi {

// Gaussian measure N(mean, cov) with positive definite covariance; a point
// of the Bures-Wasserstein space.
struct GaussianMeasure {
  Eigen::VectorXd mean;
  SpdMatrix cov;

  GaussianMeasure(Eigen::VectorXd m, SpdMatrix c);
  int dim() const { return static_cast<int>(mean.size()); }
};

// Affine map x |-> intercept + linear (x - basepoint) with symmetric linear
// part: tangent vectors, transport maps, gradients and stochastic gradients
// all take this shape. The basepoint is explicit; re-basing is pure.
struct AffineMap {
  Eigen::VectorXd intercept;
  SymMatrix linear;
  Eigen::VectorXd basepoint;

  AffineMap(Eigen::VectorXd b, SymMatrix s, Eigen::VectorXd base);

  int dim() const { return static_cast<int>(intercept.size()); }
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  AffineMap rebased(const Eigen::VectorXd& new_basepoint) const;

  static AffineMap identity(const Eigen::VectorXd& basepoint);
  static AffineMap zero(const Eigen::VectorXd& basepoint);
};

// x |-> x + t h(x), expressed about h's basepoint.
AffineMap id_plus_scaled(const AffineMap& h, double t);

// (1 - t) f + t g for maps sharing a basepoint.
AffineMap affine_combination(const AffineMap& f, const AffineMap& g, double t);

// L2(mu) inner product of two affine maps: <f(m), g(m)> + tr(S_f Sigma S_g)
// after re-expressing both maps about the mean of mu.
double affine_inner_product(const AffineMap& f, const AffineMap& g,
                            const GaussianMeasure& mu);

// Squared 2-Wasserstein distance in the Bures closed form.
double w2_squared(const GaussianMeasure& mu, const GaussianMeasure& nu);

// Optimal transport map from mu to nu:
// S = Sigma_mu^{-1/2} (Sigma_mu^{1/2} Sigma_nu Sigma_mu^{1/2})^{1/2} Sigma_mu^{-1/2},
// intercept m_nu, basepoint m_mu.
AffineMap ot_map(const GaussianMeasure& mu, const GaussianMeasure& nu);

// Image of mu under an affine map. The covariance S Sigma S may be singular;
// the degeneracy flag is set when lambda_min <= 1e-12 * lambda_max.
struct PushforwardMeasure {
  Eigen::VectorXd mean;
  SymMatrix cov;
  bool degenerate;

  GaussianMeasure to_gaussian() const;  // throws if degenerate
};

PushforwardMeasure pushforward_affine(const GaussianMeasure& mu, const AffineMap& f);

// Negative differential entropy, H(mu) = int log mu dmu
//   = -(d/2) log(2 pi e) - (1/2) log det Sigma.
double entropy(const GaussianMeasure& mu);

// Proximal (JKO) step of eta * H at mu: same mean, covariance
//   Sigma_1 = (Sigma + 2 eta I + [Sigma (Sigma + 4 eta I)]^{1/2}) / 2,
// evaluated spectrally in Sigma's eigenbasis, where the two factors commute
// and the product is exactly symmetric. Always Sigma_1 >= eta I.
GaussianMeasure entropy_jko(const GaussianMeasure& mu, double eta);

// Overload accepting a PSD-singular covariance (a forward step at eta =
// 1/beta legitimately zeroes out the intermediate covariance; the JKO
// restores positive definiteness). eta = 0 requires SPD input.
GaussianMeasure entropy_jko(const Eigen::VectorXd& mean, const SymMatrix& cov_psd,
                            double eta);

double kl_gaussian(const GaussianMeasure& mu, const GaussianMeasure& nu);

// ((1 - t) T0 + t T1)_# nu with T0, T1 the transport maps from nu to mu0 and
// mu1. With nu = mu0 this is the constant-speed geodesic.
GaussianMeasure generalized_geodesic(const GaussianMeasure& nu,
                                     const GaussianMeasure& mu0,
                                     const GaussianMeasure& mu1, double t);

// Tangent gradient of the entropy: x |-> -Sigma^{-1} (x - m), basepoint m.
AffineMap bw_grad_entropy(const GaussianMeasure& mu);

// One draw from mu through the eigendecomposition square root of its
// covariance (the same canonical factorization the diagnostics use).
Eigen::VectorXd sample(const GaussianMeasure& mu, Rng& rng);
Eigen::VectorXd sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov_sqrt,
                       Rng& rng);

}  // namespace gvi
