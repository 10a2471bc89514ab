#include "gvi/psd_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include <Eigen/Dense>

namespace gvi {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kSpdTol = 1e-14;
constexpr double kPsdClampTol = 1e-10;

std::string matrix_hash(const Eigen::MatrixXd& m) {
  std::uint64_t h = 1469598103934665603ull;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::uint64_t bits;
      const double v = m(i, j);
      std::memcpy(&bits, &v, sizeof(bits));
      h ^= bits;
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solve_or_throw(
    const Eigen::MatrixXd& m, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.compute(m, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("symmetric eigendecomposition did not converge, matrix hash " +
                           matrix_hash(m));
  }
  return solver;
}

}  // namespace

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("SymMatrix requires a square matrix");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw InvariantViolation("matrix is not symmetric: max asymmetry " +
                             std::to_string(asym));
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::symmetrized(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("SymMatrix requires a square matrix");
  }
  SymMatrix out;
  out.m_ = 0.5 * (m + m.transpose());
  return out;
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m) : SpdMatrix(SymMatrix(m)) {}

SpdMatrix::SpdMatrix(const SymMatrix& m) {
  auto solver = solve_or_throw(m.matrix(), true);
  eig_.eigenvalues = solver.eigenvalues();
  eig_.eigenvectors = solver.eigenvectors();
  const double lmax = eig_.eigenvalues[eig_.eigenvalues.size() - 1];
  const double lmin = eig_.eigenvalues[0];
  if (!(lmax > 0.0) || lmin <= kSpdTol * lmax) {
    throw InvariantViolation("matrix is not positive definite: lambda_min " +
                             std::to_string(lmin) + ", lambda_max " + std::to_string(lmax));
  }
  m_ = m.matrix();
}

SpdMatrix SpdMatrix::from_eig(const Eigen::MatrixXd& q, const Eigen::VectorXd& lambda) {
  if (q.rows() != q.cols() || q.rows() != lambda.size()) {
    throw DimensionMismatch("from_eig: inconsistent dimensions");
  }
  const double lmax = lambda[lambda.size() - 1];
  const double lmin = lambda[0];
  if (!(lmax > 0.0) || lmin <= kSpdTol * lmax) {
    throw InvariantViolation("from_eig: spectrum not positive definite: lambda_min " +
                             std::to_string(lmin));
  }
  SpdMatrix out;
  out.eig_.eigenvalues = lambda;
  out.eig_.eigenvectors = q;
  Eigen::MatrixXd m = q * lambda.asDiagonal() * q.transpose();
  out.m_ = 0.5 * (m + m.transpose());
  return out;
}

Eigen::MatrixXd SpdMatrix::sqrt_matrix() const {
  Eigen::MatrixXd r = eig_.eigenvectors *
                      eig_.eigenvalues.cwiseSqrt().asDiagonal() *
                      eig_.eigenvectors.transpose();
  return 0.5 * (r + r.transpose());
}

Eigen::MatrixXd SpdMatrix::inv_sqrt_matrix() const {
  Eigen::MatrixXd r = eig_.eigenvectors *
                      eig_.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
                      eig_.eigenvectors.transpose();
  return 0.5 * (r + r.transpose());
}

Eigen::MatrixXd SpdMatrix::inverse_matrix() const {
  Eigen::MatrixXd r = eig_.eigenvectors *
                      eig_.eigenvalues.cwiseInverse().asDiagonal() *
                      eig_.eigenvectors.transpose();
  return 0.5 * (r + r.transpose());
}

SymEig sym_eig(const SymMatrix& a) {
  auto solver = solve_or_throw(a.matrix(), true);
  return SymEig{solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd sym_eigenvalues(const SymMatrix& a) {
  return solve_or_throw(a.matrix(), false).eigenvalues();
}

SymMatrix psd_sqrt(const SymMatrix& a) {
  SymEig e = sym_eig(a);
  const double lmax = e.eigenvalues[e.eigenvalues.size() - 1];
  const double floor = -kPsdClampTol * std::max(lmax, 1.0);
  Eigen::VectorXd lam = e.eigenvalues;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < floor) {
      throw NotPsdError("psd_sqrt: eigenvalue " + std::to_string(lam[i]) +
                            " below PSD tolerance",
                        lam[i]);
    }
    lam[i] = std::max(lam[i], 0.0);
  }
  return SymMatrix::symmetrized(e.eigenvectors * lam.cwiseSqrt().asDiagonal() *
                                e.eigenvectors.transpose());
}

SpdMatrix spd_inverse(const SpdMatrix& a) {
  const double lmin = a.lambda_min();
  if (lmin <= kSpdTol * a.lambda_max()) {
    throw SingularMatrixError("spd_inverse: matrix singular within tolerance, lambda_min " +
                                  std::to_string(lmin),
                              lmin);
  }
  Eigen::VectorXd inv = a.eig().eigenvalues.cwiseInverse().reverse();
  Eigen::MatrixXd q = a.eig().eigenvectors.rowwise().reverse();
  return SpdMatrix::from_eig(q, inv);
}

double log_det_spd(const SpdMatrix& a) {
  return a.eig().eigenvalues.array().log().sum();
}

Eigen::MatrixXd random_orthogonal(int dim, Rng& rng) {
  if (dim < 1) throw InvariantViolation("random_orthogonal: dim must be >= 1");
  Eigen::MatrixXd g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

SpdMatrix random_spd(int dim, Rng& rng, double lambda_lo, double lambda_hi) {
  if (!(lambda_lo > 0.0) || !(lambda_hi >= lambda_lo)) {
    throw InvariantViolation("random_spd: need 0 < lambda_lo <= lambda_hi");
  }
  Eigen::MatrixXd q = random_orthogonal(dim, rng);
  Eigen::VectorXd lam(dim);
  const double llo = std::log(lambda_lo), lhi = std::log(lambda_hi);
  for (int i = 0; i < dim; ++i) lam[i] = std::exp(llo + (lhi - llo) * rng.uniform());
  std::sort(lam.data(), lam.data() + dim);
  return SpdMatrix::from_eig(q, lam);
}

}  // namespace gvi
