#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gvi/psd_kernel.hpp"
#include "test_util.hpp"

using namespace gvi;

namespace {

Eigen::MatrixXd two_one_one_two() {
  Eigen::MatrixXd a(2, 2);
  a << 2, 1, 1, 2;
  return a;
}

}  // namespace

TEST_CASE("sym_eig identity and diagonal") {
  const SymEig e = sym_eig(SymMatrix(Eigen::MatrixXd::Identity(3, 3)));
  for (int i = 0; i < 3; ++i) CHECK(e.eigenvalues[i] == doctest::Approx(1.0));
  CHECK(gvi_test::max_abs_diff(e.eigenvectors * e.eigenvectors.transpose(),
                               Eigen::MatrixXd::Identity(3, 3)) < 1e-10);

  Eigen::MatrixXd d(2, 2);
  d << 4, 0, 0, 9;
  const SymEig e2 = sym_eig(SymMatrix(d));
  CHECK(e2.eigenvalues[0] == doctest::Approx(4.0));
  CHECK(e2.eigenvalues[1] == doctest::Approx(9.0));
}

TEST_CASE("sym_eig hand-computed 2x2 spectrum") {
  const SymEig e = sym_eig(SymMatrix(two_one_one_two()));
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));
  const Eigen::MatrixXd rec = e.eigenvectors * e.eigenvalues.asDiagonal() *
                              e.eigenvectors.transpose();
  CHECK(gvi_test::max_abs_diff(rec, two_one_one_two()) < 1e-9);
}

TEST_CASE("sym_eig rejects asymmetric input") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 0, 1;
  CHECK_THROWS_AS(SymMatrix{a}, InvariantViolation);
}

TEST_CASE("psd_sqrt identity, diagonal and hand case") {
  CHECK(gvi_test::max_abs_diff(
            psd_sqrt(SymMatrix(Eigen::MatrixXd::Identity(3, 3))).matrix(),
            Eigen::MatrixXd::Identity(3, 3)) < 1e-12);

  Eigen::MatrixXd d(2, 2);
  d << 4, 0, 0, 9;
  Eigen::MatrixXd expect(2, 2);
  expect << 2, 0, 0, 3;
  CHECK(gvi_test::max_abs_diff(psd_sqrt(SymMatrix(d)).matrix(), expect) < 1e-12);

  const double s = std::sqrt(3.0);
  Eigen::MatrixXd hand(2, 2);
  hand << (s + 1) / 2, (s - 1) / 2, (s - 1) / 2, (s + 1) / 2;
  CHECK(gvi_test::max_abs_diff(psd_sqrt(SymMatrix(two_one_one_two())).matrix(), hand) <
        1e-12);
  CHECK(hand(0, 0) == doctest::Approx(1.36603).epsilon(1e-5));
}

TEST_CASE("psd_sqrt clamps dust and rejects genuine negatives") {
  Eigen::MatrixXd tiny = Eigen::MatrixXd::Zero(2, 2);
  tiny(0, 0) = 1.0;
  tiny(1, 1) = -1e-12;  // within the clamp band
  const SymMatrix r = psd_sqrt(SymMatrix(tiny));
  CHECK(r.matrix()(1, 1) == 0.0);

  Eigen::MatrixXd neg(2, 2);
  neg << 4, 0, 0, -9;
  CHECK_THROWS_AS(psd_sqrt(SymMatrix(neg)), NotPsdError);
}

TEST_CASE("psd_sqrt squares back for random SPD up to d = 50") {
  Rng rng(7);
  for (int d : {2, 11, 50}) {
    const SpdMatrix a = random_spd(d, rng, 0.05, 20.0);
    const Eigen::MatrixXd r = psd_sqrt(SymMatrix(a.matrix())).matrix();
    const double tol = 1e-9 * std::max(1.0, a.matrix().cwiseAbs().maxCoeff());
    CHECK(gvi_test::max_abs_diff(r * r, a.matrix()) < tol);
  }
}

TEST_CASE("psd_sqrt commutes with orthogonal conjugation") {
  Rng rng(8);
  const int d = 6;
  const SpdMatrix a = random_spd(d, rng, 0.1, 5.0);
  const Eigen::MatrixXd q = random_orthogonal(d, rng);
  const Eigen::MatrixXd lhs =
      psd_sqrt(SymMatrix::symmetrized(q * a.matrix() * q.transpose())).matrix();
  const Eigen::MatrixXd rhs =
      q * psd_sqrt(SymMatrix(a.matrix())).matrix() * q.transpose();
  CHECK(gvi_test::max_abs_diff(lhs, rhs) < 1e-9);
}

TEST_CASE("spd_inverse diagonal and hand case") {
  Eigen::MatrixXd d(2, 2);
  d << 2, 0, 0, 4;
  Eigen::MatrixXd expect(2, 2);
  expect << 0.5, 0, 0, 0.25;
  CHECK(gvi_test::max_abs_diff(spd_inverse(SpdMatrix(d)).matrix(), expect) < 1e-12);

  Eigen::MatrixXd hand(2, 2);
  hand << 2.0 / 3, -1.0 / 3, -1.0 / 3, 2.0 / 3;
  CHECK(gvi_test::max_abs_diff(spd_inverse(SpdMatrix(two_one_one_two())).matrix(), hand) <
        1e-12);
}

TEST_CASE("spd_inverse is an actual inverse on random matrices") {
  Rng rng(9);
  for (int d : {1, 4, 17}) {
    const SpdMatrix a = random_spd(d, rng, 1e-3, 1e3);
    const Eigen::MatrixXd prod = a.matrix() * spd_inverse(a).matrix();
    CHECK(gvi_test::max_abs_diff(prod, Eigen::MatrixXd::Identity(d, d)) < 1e-7);
  }
}

TEST_CASE("SpdMatrix construction rejects indefinite and near-singular input") {
  Eigen::MatrixXd neg(2, 2);
  neg << 1, 0, 0, -1;
  CHECK_THROWS_AS(SpdMatrix{neg}, InvariantViolation);
  Eigen::MatrixXd sing(2, 2);
  sing << 1, 0, 0, 1e-16;
  CHECK_THROWS_AS(SpdMatrix{sing}, InvariantViolation);
}

TEST_CASE("log_det_spd values and inverse identity") {
  CHECK(log_det_spd(SpdMatrix(Eigen::MatrixXd::Identity(4, 4))) == doctest::Approx(0.0));
  Eigen::MatrixXd d(2, 2);
  d << std::exp(1.0), 0, 0, std::exp(2.0);
  CHECK(log_det_spd(SpdMatrix(d)) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(log_det_spd(SpdMatrix(two_one_one_two())) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-10));

  Rng rng(10);
  for (int i = 0; i < 10; ++i) {
    const SpdMatrix a = random_spd(5, rng, 0.01, 100.0);
    CHECK(std::abs(log_det_spd(a) + log_det_spd(spd_inverse(a))) < 1e-8);
  }
}

TEST_CASE("random_orthogonal basics") {
  Rng rng(11);
  const Eigen::MatrixXd q1 = random_orthogonal(1, rng);
  CHECK(std::abs(std::abs(q1(0, 0)) - 1.0) < 1e-12);

  Rng a(42), b(42);
  CHECK(gvi_test::max_abs_diff(random_orthogonal(4, a), random_orthogonal(4, b)) == 0.0);

  for (int i = 0; i < 5; ++i) {
    const Eigen::MatrixXd q = random_orthogonal(7, rng);
    CHECK(gvi_test::max_abs_diff(q * q.transpose(), Eigen::MatrixXd::Identity(7, 7)) <
          1e-10);
  }
}

TEST_CASE("random_orthogonal is Haar: mean of Q11 vanishes") {
  Rng rng(12);
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += random_orthogonal(2, rng)(0, 0);
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("rng fork streams are disjoint and position independent") {
  Rng root(5);
  Rng a = root.fork(1);
  root.normal_vector(100);
  Rng b = root.fork(1);
  CHECK(a.next_u64() == b.next_u64());
  Rng c = root.fork(2);
  CHECK(a.next_u64() != c.next_u64());
}
