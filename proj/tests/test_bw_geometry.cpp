#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gvi/bw_geometry.hpp"
#include "gvi/reference_oracles.hpp"
#include "test_util.hpp"

using namespace gvi;
using gvi_test::scalar_gaussian;

namespace {

constexpr double kLog2PiE = 2.8378770664093453;  // log(2 pi e)

}  // namespace

TEST_CASE("affine_inner_product zero, identity-centered and scalar moments") {
  const GaussianMeasure mu = gvi_test::standard_gaussian(3);
  const AffineMap z = AffineMap::zero(mu.mean);
  CHECK(affine_inner_product(z, z, mu) == 0.0);

  // f = g = x - m under Sigma = I: E||X - m||^2 = tr Sigma = 3.
  AffineMap centered(Eigen::VectorXd::Zero(3),
                     SymMatrix(Eigen::MatrixXd::Identity(3, 3)), mu.mean);
  CHECK(affine_inner_product(centered, centered, mu) == doctest::Approx(3.0));

  const GaussianMeasure nu = scalar_gaussian(0.0, 4.0);
  AffineMap f(Eigen::VectorXd::Constant(1, 1.0),
              SymMatrix(Eigen::MatrixXd::Constant(1, 1, 2.0)), nu.mean);
  AffineMap g(Eigen::VectorXd::Constant(1, 3.0),
              SymMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0)), nu.mean);
  CHECK(affine_inner_product(f, g, nu) == doctest::Approx(11.0));
}

TEST_CASE("affine_inner_product re-bases maps about the measure mean") {
  Rng rng(3);
  const GaussianMeasure mu = gvi_test::random_gaussian(4, rng);
  AffineMap f(rng.normal_vector(4), gvi_test::random_sym(4, 1.0, rng),
              rng.normal_vector(4));
  AffineMap g(rng.normal_vector(4), gvi_test::random_sym(4, 1.0, rng),
              rng.normal_vector(4));
  const double direct = affine_inner_product(f, g, mu);
  const double rebased = affine_inner_product(f.rebased(mu.mean), g.rebased(mu.mean), mu);
  CHECK(direct == doctest::Approx(rebased).epsilon(1e-12));
}

TEST_CASE("w2_squared closed-form cases") {
  Rng rng(4);
  const GaussianMeasure mu = gvi_test::random_gaussian(5, rng);
  CHECK(w2_squared(mu, mu) < 1e-10);

  Eigen::VectorXd m = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
  const GaussianMeasure a = gvi_test::standard_gaussian(3);
  const GaussianMeasure b(m, SpdMatrix(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(w2_squared(a, b) == doctest::Approx(m.squaredNorm()));

  CHECK(w2_squared(scalar_gaussian(0, 1), scalar_gaussian(0, 4)) ==
        doctest::Approx(1.0));
}

TEST_CASE("w2_squared is symmetric and respects the triangle inequality") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 5);
    const GaussianMeasure x = gvi_test::random_gaussian(d, rng);
    const GaussianMeasure y = gvi_test::random_gaussian(d, rng);
    const GaussianMeasure z = gvi_test::random_gaussian(d, rng);
    CHECK(std::abs(w2_squared(x, y) - w2_squared(y, x)) < 1e-9);
    const double dxy = std::sqrt(w2_squared(x, y));
    const double dxz = std::sqrt(w2_squared(x, z));
    const double dzy = std::sqrt(w2_squared(z, y));
    CHECK(dxy <= dxz + dzy + 1e-8);
  }
}

TEST_CASE("ot_map identity, scalar case and pushforward property") {
  Rng rng(6);
  const GaussianMeasure mu = gvi_test::random_gaussian(4, rng);
  const AffineMap self = ot_map(mu, mu);
  CHECK(gvi_test::max_abs_diff(self.linear.matrix(), Eigen::MatrixXd::Identity(4, 4)) <
        1e-9);
  CHECK((self.intercept - mu.mean).cwiseAbs().maxCoeff() < 1e-12);

  const AffineMap t = ot_map(scalar_gaussian(0, 1), scalar_gaussian(3, 4));
  CHECK(t.linear.matrix()(0, 0) == doctest::Approx(2.0));
  CHECK(t.intercept[0] == doctest::Approx(3.0));
  CHECK(t(Eigen::VectorXd::Constant(1, 1.0))[0] == doctest::Approx(5.0));

  for (int i = 0; i < 5; ++i) {
    const GaussianMeasure x = gvi_test::random_gaussian(5, rng);
    const GaussianMeasure y = gvi_test::random_gaussian(5, rng);
    const AffineMap map = ot_map(x, y);
    const Eigen::MatrixXd pushed =
        map.linear.matrix() * x.cov.matrix() * map.linear.matrix();
    CHECK(gvi_test::max_abs_diff(pushed, y.cov.matrix()) < 1e-8);
    // ||T - id||^2_mu equals the squared distance.
    const PushforwardMeasure pf = pushforward_affine(x, map);
    CHECK((pf.mean - y.mean).cwiseAbs().maxCoeff() < 1e-9);
    AffineMap disp(map.intercept - x.mean,
                   SymMatrix::symmetrized(map.linear.matrix() -
                                          Eigen::MatrixXd::Identity(5, 5)),
                   x.mean);
    CHECK(affine_inner_product(disp, disp, x) ==
          doctest::Approx(w2_squared(x, y)).epsilon(1e-8));
  }
}

TEST_CASE("pushforward_affine identity, reflection and scalar contraction") {
  Rng rng(7);
  const GaussianMeasure mu = gvi_test::random_gaussian(3, rng);
  const PushforwardMeasure same = pushforward_affine(mu, AffineMap::identity(mu.mean));
  CHECK(!same.degenerate);
  CHECK(gvi_test::max_abs_diff(same.cov.matrix(), mu.cov.matrix()) < 1e-12);

  AffineMap reflect(-mu.mean, SymMatrix(-Eigen::MatrixXd::Identity(3, 3)), mu.mean);
  const PushforwardMeasure r = pushforward_affine(mu, reflect);
  CHECK((r.mean + mu.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(gvi_test::max_abs_diff(r.cov.matrix(), mu.cov.matrix()) < 1e-12);

  // f(x) = 0 + 0.5 (x - 2) on N(2, 4) lands on N(0, 1).
  AffineMap f(Eigen::VectorXd::Zero(1), SymMatrix(Eigen::MatrixXd::Constant(1, 1, 0.5)),
              Eigen::VectorXd::Constant(1, 2.0));
  const PushforwardMeasure g = pushforward_affine(scalar_gaussian(2, 4), f);
  CHECK(g.mean[0] == doctest::Approx(0.0));
  CHECK(g.cov.matrix()(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("pushforward degeneracy flag and to_gaussian") {
  const GaussianMeasure mu = gvi_test::standard_gaussian(2);
  AffineMap crush(Eigen::VectorXd::Zero(2), SymMatrix(Eigen::MatrixXd::Zero(2, 2)),
                  mu.mean);
  const PushforwardMeasure p = pushforward_affine(mu, crush);
  CHECK(p.degenerate);
  CHECK_THROWS_AS(p.to_gaussian(), InvariantViolation);
}

TEST_CASE("entropy closed form, translation invariance and additivity") {
  CHECK(entropy(scalar_gaussian(0, 1)) == doctest::Approx(-0.5 * kLog2PiE));
  CHECK(entropy(scalar_gaussian(0, 1)) == doctest::Approx(-1.41894).epsilon(1e-5));
  CHECK(entropy(scalar_gaussian(17.5, 1)) == doctest::Approx(entropy(scalar_gaussian(0, 1))));
  CHECK(entropy(gvi_test::standard_gaussian(2)) ==
        doctest::Approx(2.0 * entropy(scalar_gaussian(0, 1))));
  CHECK(entropy(gvi_test::standard_gaussian(2)) == doctest::Approx(-2.83788).epsilon(1e-5));
}

TEST_CASE("entropy_jko scalar values and eta = 0") {
  Rng rng(8);
  const GaussianMeasure mu = gvi_test::random_gaussian(4, rng);
  const GaussianMeasure same = entropy_jko(mu, 0.0);
  CHECK(gvi_test::max_abs_diff(same.cov.matrix(), mu.cov.matrix()) < 1e-12);

  CHECK(entropy_jko(scalar_gaussian(0, 1), 2.0).cov.matrix()(0, 0) ==
        doctest::Approx(4.0));
  CHECK(entropy_jko(scalar_gaussian(0, 1), 0.5).cov.matrix()(0, 0) ==
        doctest::Approx(0.5 * (2.0 + std::sqrt(3.0))).epsilon(1e-12));
  CHECK(entropy_jko(scalar_gaussian(3, 1), 0.5).mean[0] == doctest::Approx(3.0));
  CHECK_THROWS_AS(entropy_jko(mu, -0.1), InvariantViolation);
}

TEST_CASE("entropy_jko accepts PSD-singular input and floors at eta") {
  const Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  const GaussianMeasure out =
      entropy_jko(mean, SymMatrix(Eigen::MatrixXd::Zero(3, 3)), 0.7);
  CHECK(gvi_test::max_abs_diff(out.cov.matrix(),
                               0.7 * Eigen::MatrixXd::Identity(3, 3)) < 1e-12);

  Rng rng(9);
  for (double eta : {1e-3, 1e-1, 1.0, 10.0}) {
    const GaussianMeasure mu = gvi_test::random_gaussian(6, rng, 0.05, 5.0);
    const GaussianMeasure jko = entropy_jko(mu, eta);
    CHECK(jko.cov.lambda_min() >= eta - 1e-12);
  }
}

TEST_CASE("entropy_jko fixed-point identity on random SPD across step sizes") {
  Rng rng(10);
  for (double eta : {1e-3, 1e-1, 1.0, 10.0}) {
    for (int i = 0; i < 8; ++i) {
      const int d = 1 + static_cast<int>(rng.next_u64() % 20);
      const GaussianMeasure mu = gvi_test::random_gaussian(d, rng, 0.01, 50.0);
      const SpdMatrix s1 = entropy_jko(mu, eta).cov;
      const Eigen::MatrixXd shift =
          s1.matrix() - eta * Eigen::MatrixXd::Identity(d, d);
      const Eigen::MatrixXd resid =
          shift * spd_inverse(s1).matrix() * shift - mu.cov.matrix();
      CHECK(resid.cwiseAbs().maxCoeff() <
            1e-9 * std::max(1.0, mu.cov.matrix().cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("entropy_jko local optimality under symmetric perturbations") {
  Rng rng(11);
  for (double eta : {0.1, 1.0}) {
    const GaussianMeasure mu = gvi_test::random_gaussian(4, rng, 0.5, 2.0);
    const GaussianMeasure opt = entropy_jko(mu, eta);
    const double best =
        eta * entropy(opt) + 0.5 * w2_squared(mu, opt);
    for (int i = 0; i < 10; ++i) {
      const SymMatrix dir = gvi_test::random_sym(4, 1.0, rng);
      for (double sgn : {-1.0, 1.0}) {
        Eigen::MatrixXd pert =
            opt.cov.matrix() + sgn * 1e-3 * dir.matrix();
        const GaussianMeasure cand(opt.mean, SpdMatrix(pert));
        const double val = eta * entropy(cand) + 0.5 * w2_squared(mu, cand);
        CHECK(best <= val + 1e-10);
      }
    }
  }
}

TEST_CASE("entropy_jko agrees with the 1-D grid oracle") {
  for (double eta : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0}) {
    for (double s2 : {0.1, 1.0, 10.0}) {
      const double closed = entropy_jko(scalar_gaussian(0, s2), eta).cov.matrix()(0, 0);
      GridSpec grid{s2, s2 + 2.5 * eta, 1000};
      const double found = grid_jko_1d(s2, eta, grid);
      const double cell = 2.0 * (grid.upper - grid.lower) / (999.0 * 999.0);
      CHECK(std::abs(closed - found) <= cell + 1e-12);
      CHECK(cell <= 1e-4 * closed);
    }
  }
}

TEST_CASE("kl_gaussian closed-form cases and nonnegativity") {
  Rng rng(12);
  const GaussianMeasure mu = gvi_test::random_gaussian(4, rng);
  CHECK(kl_gaussian(mu, mu) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(kl_gaussian(scalar_gaussian(1, 1), scalar_gaussian(0, 1)) ==
        doctest::Approx(0.5));
  CHECK(kl_gaussian(scalar_gaussian(0, 4), scalar_gaussian(0, 1)) ==
        doctest::Approx(0.5 * (4.0 - 1.0 - std::log(4.0))));
  CHECK(kl_gaussian(scalar_gaussian(0, 4), scalar_gaussian(0, 1)) ==
        doctest::Approx(0.80685).epsilon(1e-5));
  for (int i = 0; i < 10; ++i) {
    const GaussianMeasure a = gvi_test::random_gaussian(3, rng);
    const GaussianMeasure b = gvi_test::random_gaussian(3, rng);
    CHECK(kl_gaussian(a, b) >= -1e-10);
  }
}

TEST_CASE("generalized_geodesic endpoints, scalar midpoint and pushforward oracle") {
  Rng rng(13);
  const GaussianMeasure nu = gvi_test::random_gaussian(3, rng);
  const GaussianMeasure m0 = gvi_test::random_gaussian(3, rng);
  const GaussianMeasure m1 = gvi_test::random_gaussian(3, rng);
  CHECK(w2_squared(generalized_geodesic(nu, m0, m1, 0.0), m0) < 1e-8);
  CHECK(w2_squared(generalized_geodesic(nu, m0, m1, 1.0), m1) < 1e-8);
  CHECK_THROWS_AS(generalized_geodesic(nu, m0, m1, 1.5), InvariantViolation);

  const GaussianMeasure a = scalar_gaussian(0, 1);
  const GaussianMeasure b = scalar_gaussian(0, 4);
  const GaussianMeasure mid = generalized_geodesic(a, a, b, 0.5);
  CHECK(mid.cov.matrix()(0, 0) == doctest::Approx(2.25));

  const AffineMap t0 = ot_map(nu, m0);
  const AffineMap t1 = ot_map(nu, m1);
  const AffineMap half = affine_combination(t0, t1, 0.5);
  const PushforwardMeasure direct = pushforward_affine(nu, half);
  const GaussianMeasure gg = generalized_geodesic(nu, m0, m1, 0.5);
  CHECK(gvi_test::max_abs_diff(direct.cov.matrix(), gg.cov.matrix()) < 1e-10);
}

TEST_CASE("entropy is convex along generalized geodesics") {
  Rng rng(14);
  for (int i = 0; i < 25; ++i) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 10);
    const GaussianMeasure nu = gvi_test::random_gaussian(d, rng);
    const GaussianMeasure m0 = gvi_test::random_gaussian(d, rng);
    const GaussianMeasure m1 = gvi_test::random_gaussian(d, rng);
    const AffineMap t0 = ot_map(nu, m0);
    const AffineMap t1 = ot_map(nu, m1);
    // <grad H(m0) o T0, T1 - T0>_nu; the composition has linear part
    // -Sigma_0^{-1} S_0 about the base mean and zero intercept there.
    const Eigen::MatrixXd a = -m0.cov.inverse_matrix() * t0.linear.matrix();
    const Eigen::MatrixXd b = t1.linear.matrix() - t0.linear.matrix();
    const double ip = (a.transpose() * b * nu.cov.matrix()).trace();
    CHECK(entropy(m0) + ip <= entropy(m1) + 1e-8);
  }
}

TEST_CASE("entropy smoothness along geodesics under a curvature cap") {
  Rng rng(15);
  for (int i = 0; i < 25; ++i) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 6);
    const GaussianMeasure m0 = gvi_test::random_gaussian(d, rng, 0.2, 4.0);
    const GaussianMeasure m1 = gvi_test::random_gaussian(d, rng, 0.2, 4.0);
    const double gamma =
        std::max(1.0 / m0.cov.lambda_min(), 1.0 / m1.cov.lambda_min());
    const AffineMap t = ot_map(m0, m1);
    AffineMap disp(t.intercept - m0.mean,
                   SymMatrix::symmetrized(t.linear.matrix() -
                                          Eigen::MatrixXd::Identity(d, d)),
                   m0.mean);
    const double lin = affine_inner_product(bw_grad_entropy(m0), disp, m0);
    const double quad = affine_inner_product(disp, disp, m0);
    CHECK(entropy(m1) - entropy(m0) <= lin + 0.5 * gamma * quad + 1e-8);
  }
}

TEST_CASE("bw_grad_entropy closed form and finite-difference oracle") {
  const GaussianMeasure std3 = gvi_test::standard_gaussian(3);
  const AffineMap g = bw_grad_entropy(std3);
  CHECK(gvi_test::max_abs_diff(g.linear.matrix(), -Eigen::MatrixXd::Identity(3, 3)) <
        1e-12);
  CHECK(g.intercept.cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd m = Eigen::VectorXd::Constant(2, 5.0);
  const GaussianMeasure wide(m, SpdMatrix(4.0 * Eigen::MatrixXd::Identity(2, 2)));
  CHECK(gvi_test::max_abs_diff(bw_grad_entropy(wide).linear.matrix(),
                               -0.25 * Eigen::MatrixXd::Identity(2, 2)) < 1e-12);

  Rng rng(16);
  for (int i = 0; i < 10; ++i) {
    const GaussianMeasure mu = gvi_test::random_gaussian(3, rng);
    const AffineMap h(rng.normal_vector(3), gvi_test::random_sym(3, 0.5, rng), mu.mean);
    const double fd = fd_directional_derivative(
        [](const GaussianMeasure& x) { return entropy(x); }, mu, h, 1e-4);
    CHECK(std::abs(fd - affine_inner_product(bw_grad_entropy(mu), h, mu)) < 1e-5);
  }
}

TEST_CASE("sampling is deterministic and matches the first two moments") {
  Rng a(77), b(77);
  const GaussianMeasure mu = gvi_test::random_gaussian(3, a);
  Rng c(5), d(5);
  CHECK((sample(mu, c) - sample(mu, d)).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(18);
  const int n = 200000;
  Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd cov_acc = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::MatrixXd r = mu.cov.sqrt_matrix();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = sample(mu.mean, r, rng);
    mean_acc += x;
    cov_acc += (x - mu.mean) * (x - mu.mean).transpose();
  }
  mean_acc /= n;
  cov_acc /= n;
  CHECK((mean_acc - mu.mean).cwiseAbs().maxCoeff() < 0.05);
  CHECK(gvi_test::max_abs_diff(cov_acc, mu.cov.matrix()) < 0.1);
}

TEST_CASE("dimension mismatches are rejected") {
  const GaussianMeasure mu = gvi_test::standard_gaussian(2);
  const GaussianMeasure nu = gvi_test::standard_gaussian(3);
  CHECK_THROWS_AS(w2_squared(mu, nu), DimensionMismatch);
  CHECK_THROWS_AS(kl_gaussian(mu, nu), DimensionMismatch);
  CHECK_THROWS_AS(ot_map(mu, nu), DimensionMismatch);
  CHECK_THROWS_AS(GaussianMeasure(Eigen::VectorXd::Zero(3),
                                  SpdMatrix(Eigen::MatrixXd::Identity(2, 2))),
                  DimensionMismatch);
}
