#include "gvi/bw_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace gvi {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kDegenerateTol = 1e-12;
constexpr double kPsdClampTol = 1e-10;

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": dimensions " + std::to_string(a) +
                            " and " + std::to_string(b) + " disagree");
  }
}

}  // namespace

GaussianMeasure::GaussianMeasure(Eigen::VectorXd m, SpdMatrix c)
    : mean(std::move(m)), cov(std::move(c)) {
  require_same_dim(static_cast<int>(mean.size()), cov.dim(), "GaussianMeasure");
}

AffineMap::AffineMap(Eigen::VectorXd b, SymMatrix s, Eigen::VectorXd base)
    : intercept(std::move(b)), linear(std::move(s)), basepoint(std::move(base)) {
  require_same_dim(static_cast<int>(intercept.size()), linear.dim(), "AffineMap");
  require_same_dim(static_cast<int>(intercept.size()),
                   static_cast<int>(basepoint.size()), "AffineMap");
}

Eigen::VectorXd AffineMap::operator()(const Eigen::VectorXd& x) const {
  return intercept + linear.matrix() * (x - basepoint);
}

AffineMap AffineMap::rebased(const Eigen::VectorXd& new_basepoint) const {
  return AffineMap((*this)(new_basepoint), linear, new_basepoint);
}

AffineMap AffineMap::identity(const Eigen::VectorXd& basepoint) {
  const int d = static_cast<int>(basepoint.size());
  return AffineMap(basepoint, SymMatrix(Eigen::MatrixXd::Identity(d, d)), basepoint);
}

AffineMap AffineMap::zero(const Eigen::VectorXd& basepoint) {
  const int d = static_cast<int>(basepoint.size());
  return AffineMap(Eigen::VectorXd::Zero(d), SymMatrix(Eigen::MatrixXd::Zero(d, d)),
                   basepoint);
}

AffineMap id_plus_scaled(const AffineMap& h, double t) {
  const int d = h.dim();
  Eigen::MatrixXd lin = Eigen::MatrixXd::Identity(d, d) + t * h.linear.matrix();
  return AffineMap(h.basepoint + t * h.intercept, SymMatrix::symmetrized(lin),
                   h.basepoint);
}

AffineMap affine_combination(const AffineMap& f, const AffineMap& g, double t) {
  require_same_dim(f.dim(), g.dim(), "affine_combination");
  if ((f.basepoint - g.basepoint).cwiseAbs().maxCoeff() > 0.0) {
    throw InvariantViolation("affine_combination: maps must share a basepoint");
  }
  return AffineMap((1.0 - t) * f.intercept + t * g.intercept,
                   SymMatrix::symmetrized((1.0 - t) * f.linear.matrix() +
                                          t * g.linear.matrix()),
                   f.basepoint);
}

double affine_inner_product(const AffineMap& f, const AffineMap& g,
                            const GaussianMeasure& mu) {
  require_same_dim(f.dim(), mu.dim(), "affine_inner_product");
  require_same_dim(g.dim(), mu.dim(), "affine_inner_product");
  const Eigen::VectorXd bf = f(mu.mean);
  const Eigen::VectorXd bg = g(mu.mean);
  const double trace_term =
      (f.linear.matrix() * mu.cov.matrix() * g.linear.matrix()).trace();
  return bf.dot(bg) + trace_term;
}

double w2_squared(const GaussianMeasure& mu, const GaussianMeasure& nu) {
  require_same_dim(mu.dim(), nu.dim(), "w2_squared");
  const Eigen::MatrixXd r = mu.cov.sqrt_matrix();
  const SymMatrix inner = SymMatrix::symmetrized(r * nu.cov.matrix() * r);
  Eigen::VectorXd lam = sym_eigenvalues(inner);
  double cross = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    cross += std::sqrt(std::max(lam[i], 0.0));
  }
  const double val = (mu.mean - nu.mean).squaredNorm() + mu.cov.trace() +
                     nu.cov.trace() - 2.0 * cross;
  return std::max(val, 0.0);
}

AffineMap ot_map(const GaussianMeasure& mu, const GaussianMeasure& nu) {
  require_same_dim(mu.dim(), nu.dim(), "ot_map");
  const Eigen::MatrixXd r = mu.cov.sqrt_matrix();
  const Eigen::MatrixXd rinv = mu.cov.inv_sqrt_matrix();
  const SymMatrix middle =
      psd_sqrt(SymMatrix::symmetrized(r * nu.cov.matrix() * r));
  Eigen::MatrixXd s = rinv * middle.matrix() * rinv;
  return AffineMap(nu.mean, SymMatrix::symmetrized(s), mu.mean);
}

GaussianMeasure PushforwardMeasure::to_gaussian() const {
  if (degenerate) {
    throw InvariantViolation("pushforward measure is degenerate");
  }
  return GaussianMeasure(mean, SpdMatrix(cov));
}

PushforwardMeasure pushforward_affine(const GaussianMeasure& mu, const AffineMap& f) {
  require_same_dim(mu.dim(), f.dim(), "pushforward_affine");
  Eigen::VectorXd mean = f(mu.mean);
  const Eigen::MatrixXd& s = f.linear.matrix();
  SymMatrix cov = SymMatrix::symmetrized(s * mu.cov.matrix() * s);
  Eigen::VectorXd lam = sym_eigenvalues(cov);
  const double lmax = std::max(lam[lam.size() - 1], 0.0);
  const bool degenerate = lam[0] <= kDegenerateTol * lmax;
  return PushforwardMeasure{std::move(mean), std::move(cov), degenerate};
}

double entropy(const GaussianMeasure& mu) {
  const double d = static_cast<double>(mu.dim());
  return -0.5 * d * std::log(kTwoPi * std::exp(1.0)) - 0.5 * log_det_spd(mu.cov);
}

GaussianMeasure entropy_jko(const GaussianMeasure& mu, double eta) {
  return entropy_jko(mu.mean, SymMatrix::symmetrized(mu.cov.matrix()), eta);
}

GaussianMeasure entropy_jko(const Eigen::VectorXd& mean, const SymMatrix& cov_psd,
                            double eta) {
  if (eta < 0.0) {
    throw InvariantViolation("entropy_jko: eta must be >= 0");
  }
  require_same_dim(static_cast<int>(mean.size()), cov_psd.dim(), "entropy_jko");
  SymEig e = sym_eig(cov_psd);
  const double lmax = e.eigenvalues[e.eigenvalues.size() - 1];
  const double floor = -kPsdClampTol * std::max(lmax, 1.0);
  Eigen::VectorXd lam = e.eigenvalues;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < floor) {
      throw NotPsdError("entropy_jko: covariance eigenvalue " +
                            std::to_string(lam[i]) + " below PSD tolerance",
                        lam[i]);
    }
    lam[i] = std::max(lam[i], 0.0);
  }
  if (eta == 0.0) {
    return GaussianMeasure(mean, SpdMatrix::from_eig(e.eigenvectors, lam));
  }
  Eigen::VectorXd out(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    out[i] = 0.5 * (lam[i] + 2.0 * eta + std::sqrt(lam[i] * (lam[i] + 4.0 * eta)));
  }
  return GaussianMeasure(mean, SpdMatrix::from_eig(e.eigenvectors, out));
}

double kl_gaussian(const GaussianMeasure& mu, const GaussianMeasure& nu) {
  require_same_dim(mu.dim(), nu.dim(), "kl_gaussian");
  const Eigen::MatrixXd nu_inv = nu.cov.inverse_matrix();
  const Eigen::VectorXd dm = nu.mean - mu.mean;
  const double trace_term = (nu_inv * mu.cov.matrix()).trace();
  const double quad = dm.dot(nu_inv * dm);
  const double logdets = log_det_spd(nu.cov) - log_det_spd(mu.cov);
  return 0.5 * (trace_term - static_cast<double>(mu.dim()) + quad + logdets);
}

GaussianMeasure generalized_geodesic(const GaussianMeasure& nu,
                                     const GaussianMeasure& mu0,
                                     const GaussianMeasure& mu1, double t) {
  if (t < 0.0 || t > 1.0) {
    throw InvariantViolation("generalized_geodesic: t must lie in [0, 1]");
  }
  require_same_dim(nu.dim(), mu0.dim(), "generalized_geodesic");
  require_same_dim(nu.dim(), mu1.dim(), "generalized_geodesic");
  const AffineMap t0 = ot_map(nu, mu0);
  const AffineMap t1 = ot_map(nu, mu1);
  const AffineMap tt = affine_combination(t0, t1, t);
  return pushforward_affine(nu, tt).to_gaussian();
}

AffineMap bw_grad_entropy(const GaussianMeasure& mu) {
  return AffineMap(Eigen::VectorXd::Zero(mu.dim()),
                   SymMatrix::symmetrized(-mu.cov.inverse_matrix()), mu.mean);
}

Eigen::VectorXd sample(const GaussianMeasure& mu, Rng& rng) {
  return sample(mu.mean, mu.cov.sqrt_matrix(), rng);
}

Eigen::VectorXd sample(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov_sqrt,
                       Rng& rng) {
  return mean + cov_sqrt * rng.normal_vector(static_cast<int>(mean.size()));
}

}  // namespace gvi
