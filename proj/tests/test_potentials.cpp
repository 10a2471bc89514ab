#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gvi/potentials.hpp"
#include "test_util.hpp"

using namespace gvi;
using gvi_test::scalar_gaussian;

namespace {

// Central-difference gradient of a scalar field.
Eigen::VectorXd fd_grad(const PotentialSpec& pot, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (pot.value(xp) - pot.value(xm)) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hess(const PotentialSpec& pot, const Eigen::VectorXd& x, double h) {
  Eigen::MatrixXd out(x.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    out.col(i) = (pot.grad(xp) - pot.grad(xm)) / (2.0 * h);
  }
  return 0.5 * (out + out.transpose());
}

void check_spectrum_bracketed(const PotentialSpec& pot, int d, int points, Rng& rng,
                              double spread) {
  for (int i = 0; i < points; ++i) {
    const Eigen::VectorXd x = spread * rng.normal_vector(d);
    const Eigen::VectorXd lam = sym_eigenvalues(SymMatrix::symmetrized(pot.hess(x)));
    CHECK(lam.minCoeff() >= pot.alpha - 1e-9);
    CHECK(lam.maxCoeff() <= pot.beta + 1e-9);
  }
}

}  // namespace

TEST_CASE("quadratic potential values, gradient and constants") {
  const PotentialSpec iso = quadratic_potential(
      Eigen::VectorXd::Zero(3), SpdMatrix(Eigen::MatrixXd::Identity(3, 3)));
  Eigen::VectorXd x(3);
  x << 1, 2, 2;
  CHECK(iso.value(x) == doctest::Approx(4.5));
  CHECK((iso.grad(x) - x).cwiseAbs().maxCoeff() == 0.0);

  const PotentialSpec p = quadratic_potential(
      Eigen::VectorXd::Constant(1, 1.0), SpdMatrix(Eigen::MatrixXd::Constant(1, 1, 2.0)));
  const Eigen::VectorXd two = Eigen::VectorXd::Constant(1, 2.0);
  CHECK(p.value(two) == doctest::Approx(1.0));
  CHECK(p.grad(two)[0] == doctest::Approx(2.0));
  CHECK(p.alpha == doctest::Approx(2.0));
  CHECK(p.beta == doctest::Approx(2.0));
  CHECK(p.exact_moments);
}

TEST_CASE("experiment-style quadratic constants from the precision spectrum") {
  Rng rng(31);
  const int d = 10;
  const Eigen::MatrixXd u = random_orthogonal(d, rng);
  Eigen::VectorXd lam(d);
  for (int i = 0; i < d; ++i) lam[i] = std::pow(10.0, -9.0 + i);
  const SpdMatrix q = SpdMatrix::from_eig(u, lam);
  Eigen::VectorXd a(d);
  for (int i = 0; i < d; ++i) a[i] = rng.uniform();
  const PotentialSpec pot = quadratic_potential(a, q);
  CHECK(pot.alpha == doctest::Approx(1e-9).epsilon(1e-10));
  CHECK(pot.beta == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("logistic potential values and single-sample gradient") {
  Rng rng(32);
  Eigen::VectorXd theta_true(3);
  theta_true << 1, 0, -1;
  const LogisticData data = generate_logistic_data(theta_true, 50, rng);
  const PotentialSpec pot = logistic_potential(data.x, data.y);
  CHECK(pot.value(Eigen::VectorXd::Zero(3)) ==
        doctest::Approx(50.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(pot.alpha == 0.0);
  CHECK_FALSE(pot.exact_moments);

  Eigen::MatrixXd x1(1, 1);
  x1 << 1.0;
  Eigen::VectorXd y1(1);
  y1 << 1.0;
  const PotentialSpec single = logistic_potential(x1, y1);
  CHECK(single.grad(Eigen::VectorXd::Zero(1))[0] == doctest::Approx(-0.5));
}

TEST_CASE("logistic potential rejects bad labels and empty data") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 2.0;
  Eigen::VectorXd bad(2);
  bad << 0.0, 0.5;
  CHECK_THROWS_AS(logistic_potential(x, bad), InvariantViolation);
  CHECK_THROWS_AS(logistic_potential(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0)),
                  InvariantViolation);
}

TEST_CASE("logistic gradient and Hessian match finite differences") {
  Rng rng(33);
  Eigen::VectorXd theta_true(4);
  theta_true << 0.5, -0.25, 1.0, 0.0;
  const LogisticData data = generate_logistic_data(theta_true, 40, rng);
  const PotentialSpec pot = logistic_potential(data.x, data.y);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = rng.normal_vector(4);
    const Eigen::VectorXd g = pot.grad(x);
    const Eigen::VectorXd gfd = fd_grad(pot, x, 1e-5);
    CHECK((g - gfd).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    CHECK(gvi_test::max_abs_diff(pot.hess(x), fd_hess(pot, x, 1e-5)) < 1e-4);
  }
  Rng srng(34);
  check_spectrum_bracketed(pot, 4, 1000, srng, 2.0);
}

TEST_CASE("logistic beta is the global quarter bound on X^T X") {
  Rng rng(35);
  const LogisticData data = generate_logistic_data(Eigen::VectorXd::Zero(3), 30, rng);
  const PotentialSpec pot = logistic_potential(data.x, data.y);
  const double lmax = sym_eigenvalues(
                          SymMatrix::symmetrized(data.x.transpose() * data.x))
                          .maxCoeff();
  CHECK(pot.beta == doctest::Approx(0.25 * lmax));
}

TEST_CASE("double well: symmetry, curvature band and minima") {
  const double scale = 1.7;
  const PotentialSpec pot = double_well_potential(2, scale);
  CHECK(pot.alpha == doctest::Approx(-scale));
  CHECK(pot.beta == doctest::Approx(3.0 * scale));
  CHECK(pot.grad(Eigen::VectorXd::Zero(2)).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(36);
  for (int i = 0; i < 10000; ++i) {
    const double t = 4.0 * rng.normal();
    Eigen::VectorXd x(2);
    x << t, -t;
    const Eigen::VectorXd lam = sym_eigenvalues(SymMatrix::symmetrized(pot.hess(x)));
    CHECK(lam.minCoeff() >= -scale - 1e-12);
    CHECK(lam.maxCoeff() <= 3.0 * scale + 1e-12);
  }

  // Bisection on the per-coordinate slope locates the positive minimum at 1.
  const PotentialSpec p1 = double_well_potential(1, scale);
  auto slope = [&p1](double t) { return p1.grad(Eigen::VectorXd::Constant(1, t))[0]; };
  double lo = 0.5, hi = 1.15;
  REQUIRE(slope(lo) < 0.0);
  REQUIRE(slope(hi) > 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  CHECK(root == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(slope(root)) < 1e-8);
  CHECK(std::abs(slope(-root)) < 1e-8);

  // C2 at the seam: curvature approaches 3 scale from both sides.
  const double seam = 2.0 / std::sqrt(3.0);
  const auto hpp = [&p1](double t) {
    return p1.hess(Eigen::VectorXd::Constant(1, t))(0, 0);
  };
  CHECK(hpp(seam - 1e-9) == doctest::Approx(hpp(seam + 1e-9)).epsilon(1e-6));
}

TEST_CASE("double well value and gradient stay consistent across the seam") {
  const PotentialSpec pot = double_well_potential(1, 1.0);
  for (double t : {0.0, 0.7, 1.1547, 1.2, 2.5, -3.0}) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, t);
    const Eigen::VectorXd gfd = fd_grad(pot, x, 1e-6);
    CHECK(std::abs(pot.grad(x)[0] - gfd[0]) < 1e-6);
  }
}

TEST_CASE("compute_moments exact closed forms") {
  const PotentialSpec iso = quadratic_potential(
      Eigen::VectorXd::Zero(2), SpdMatrix(Eigen::MatrixXd::Identity(2, 2)));
  Rng rng(37);
  const GaussianMeasure mu = gvi_test::random_gaussian(2, rng);
  const MomentEstimate est = compute_moments(iso, mu, MomentMode::exact, 0, rng);
  CHECK((est.b_hat - mu.mean).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(gvi_test::max_abs_diff(est.s_hat.matrix(), Eigen::MatrixXd::Identity(2, 2)) <
        1e-14);
  CHECK(est.mode == MomentMode::exact);
}

TEST_CASE("compute_moments monte carlo converges to the exact values") {
  Rng rng(38);
  const int d = 3;
  const SpdMatrix q = random_spd(d, rng, 0.5, 2.0);
  const Eigen::VectorXd a = rng.normal_vector(d);
  const PotentialSpec pot = quadratic_potential(a, q);
  const GaussianMeasure mu = gvi_test::random_gaussian(d, rng);

  Rng mc_rng = rng.fork(1);
  const long n = 1000000;
  const MomentEstimate mc = compute_moments(pot, mu, MomentMode::monte_carlo, n, mc_rng);
  Rng ex_rng = rng.fork(2);
  const MomentEstimate ex = compute_moments(pot, mu, MomentMode::exact, 0, ex_rng);
  // Componentwise CLT tolerance: Var(grad_i) <= (Q Sigma Q)_ii.
  const Eigen::MatrixXd var = q.matrix() * mu.cov.matrix() * q.matrix();
  for (int i = 0; i < d; ++i) {
    const double se = std::sqrt(var(i, i) / static_cast<double>(n));
    CHECK(std::abs(mc.b_hat[i] - ex.b_hat[i]) < 4.0 * se + 1e-12);
  }
  CHECK(gvi_test::max_abs_diff(mc.s_hat.matrix(), ex.s_hat.matrix()) < 1e-12);
}

TEST_CASE("compute_moments capability and argument errors") {
  Rng rng(39);
  const GaussianMeasure mu = gvi_test::standard_gaussian(5);
  const PotentialSpec dw = double_well_potential(5, 1.0);
  CHECK_THROWS_AS(compute_moments(dw, mu, MomentMode::exact, 0, rng), CapabilityError);
  CHECK_THROWS_AS(compute_moments(dw, mu, MomentMode::quadrature, 16, rng),
                  CapabilityError);
  CHECK_THROWS_AS(compute_moments(dw, mu, MomentMode::monte_carlo, 0, rng),
                  InvariantViolation);
}

TEST_CASE("single-draw moments reproduce the stochastic oracle") {
  Rng rng(40);
  const PotentialSpec pot = double_well_potential(3, 1.0);
  const GaussianMeasure mu = gvi_test::random_gaussian(3, rng);
  Rng a(123), b(123);
  const MomentEstimate est = compute_moments(pot, mu, MomentMode::monte_carlo, 1, a);
  const Eigen::VectorXd x = sample(mu, b);
  CHECK((est.b_hat - pot.grad(x)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gvi_test::max_abs_diff(est.s_hat.matrix(), pot.hess(x)) == 0.0);
  CHECK(est.n_samples == 1);
}

TEST_CASE("generate_logistic_data determinism and label balance") {
  Rng a(55), b(55);
  const LogisticData d1 = generate_logistic_data(Eigen::VectorXd::Zero(4), 500, a);
  const LogisticData d2 = generate_logistic_data(Eigen::VectorXd::Zero(4), 500, b);
  CHECK(gvi_test::max_abs_diff(d1.x, d2.x) == 0.0);
  CHECK((d1.y - d2.y).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(56);
  const long n = 4000;
  const LogisticData data = generate_logistic_data(Eigen::VectorXd::Zero(3), n, rng);
  CHECK(std::abs(data.y.mean() - 0.5) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("generate_logistic_data saturates for large parameter norms") {
  Rng rng(57);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
  theta[0] = 20.0;
  const long n = 2000;
  const LogisticData data = generate_logistic_data(theta, n, rng);
  long agree = 0;
  for (long i = 0; i < n; ++i) {
    const bool sign_label = data.x.row(i).dot(theta) > 0.0;
    if ((data.y[i] == 1.0) == sign_label) ++agree;
  }
  CHECK(static_cast<double>(agree) / static_cast<double>(n) > 0.9);
}

TEST_CASE("declared constants bracket sampled spectra for every potential") {
  Rng rng(58);
  const PotentialSpec quad =
      quadratic_potential(rng.normal_vector(3), random_spd(3, rng, 0.2, 4.0));
  check_spectrum_bracketed(quad, 3, 100, rng, 3.0);
  const PotentialSpec dw = double_well_potential(3, 0.8);
  check_spectrum_bracketed(dw, 3, 1000, rng, 3.0);
}
