#pragma once

#include <Eigen/Core>

#include "gvi/errors.hpp"
#include "gvi/rng.hpp"

namespace gvi {

// Eigendecomposition A = Q diag(lambda) Q^T, eigenvalues ascending.
struct SymEig {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

// Dense symmetric matrix. Construction rejects inputs whose asymmetry
// exceeds 1e-12 * max(1, max|A_ij|) and stores the symmetrized matrix, so
// drift from long multiplication chains cannot leak downstream.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& m);

  // Symmetrizes (A + A^T)/2 without the asymmetry check. For products that
  // are symmetric in exact arithmetic.
  static SymMatrix symmetrized(const Eigen::MatrixXd& m);

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Eigen::MatrixXd m_;
};

// Symmetric positive definite matrix. Carries its eigendecomposition: the
// decomposition is needed for the definiteness check (lambda_min >
// 1e-14 * lambda_max) and is reused for inverses, square roots, log-dets and
// sampling, so each covariance is factorized exactly once.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Eigen::MatrixXd& m);
  explicit SpdMatrix(const SymMatrix& m);

  // Assembles Q diag(lambda) Q^T from a known decomposition (lambda
  // ascending, Q orthonormal). Only the cheap scalar positivity check runs.
  static SpdMatrix from_eig(const Eigen::MatrixXd& q, const Eigen::VectorXd& lambda);

  const Eigen::MatrixXd& matrix() const { return m_; }
  const SymEig& eig() const { return eig_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double lambda_min() const { return eig_.eigenvalues[0]; }
  double lambda_max() const { return eig_.eigenvalues[eig_.eigenvalues.size() - 1]; }
  double trace() const { return m_.trace(); }

  Eigen::MatrixXd sqrt_matrix() const;      // Q diag(sqrt lambda) Q^T
  Eigen::MatrixXd inv_sqrt_matrix() const;  // Q diag(1/sqrt lambda) Q^T
  Eigen::MatrixXd inverse_matrix() const;   // Q diag(1/lambda) Q^T

 private:
  SpdMatrix() = default;
  Eigen::MatrixXd m_;
  SymEig eig_;
};

// Full symmetric eigendecomposition, eigenvalues ascending, Q orthonormal.
// Throws NumericalFailure (with a content hash of the input) if the solver
// does not converge.
SymEig sym_eig(const SymMatrix& a);

// Eigenvalues only, ascending.
Eigen::VectorXd sym_eigenvalues(const SymMatrix& a);

// Principal square root of a symmetric PSD matrix via eigendecomposition.
// Eigenvalues in [-1e-10 * max(lambda_max, 1), 0] are clamped to zero;
// anything lower is a NotPsdError. The clamp keeps legitimately singular
// inputs (a forward step at eta = 1/beta can zero out a covariance) from
// tripping on floating-point dust.
SymMatrix psd_sqrt(const SymMatrix& a);

SpdMatrix spd_inverse(const SpdMatrix& a);

// log det A = sum_i log lambda_i.
double log_det_spd(const SpdMatrix& a);

// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
// the R diagonal sign correction. Deterministic given the stream.
Eigen::MatrixXd random_orthogonal(int dim, Rng& rng);

// Random SPD matrix with spectrum log-uniform in [lambda_lo, lambda_hi] and
// Haar-random eigenbasis. Test and harness utility.
SpdMatrix random_spd(int dim, Rng& rng, double lambda_lo, double lambda_hi);

}  // namespace gvi
