#include "gvi/potentials.hpp"

#include <cmath>

#include "gvi/reference_oracles.hpp"

namespace gvi {

const char* to_string(MomentMode mode) {
  switch (mode) {
    case MomentMode::exact: return "exact";
    case MomentMode::monte_carlo: return "monte_carlo";
    case MomentMode::quadrature: return "quadrature";
  }
  return "unknown";
}

MomentMode moment_mode_from_string(const std::string& s) {
  if (s == "exact") return MomentMode::exact;
  if (s == "monte_carlo") return MomentMode::monte_carlo;
  if (s == "quadrature") return MomentMode::quadrature;
  throw ConfigError("unknown moment mode '" + s + "'");
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) {
  // ln(1 + e^z) without overflow
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

}  // namespace

PotentialSpec quadratic_potential(const Eigen::VectorXd& a, const SpdMatrix& q) {
  if (a.size() != q.dim()) {
    throw DimensionMismatch("quadratic_potential: mean and matrix dimensions disagree");
  }
  PotentialSpec pot;
  pot.dim = static_cast<int>(a.size());
  pot.alpha = q.lambda_min();
  pot.beta = q.lambda_max();
  pot.exact_moments = true;
  const Eigen::MatrixXd qm = q.matrix();
  pot.value = [a, qm](const Eigen::VectorXd& x) {
    const Eigen::VectorXd r = x - a;
    return 0.5 * r.dot(qm * r);
  };
  pot.grad = [a, qm](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return qm * (x - a);
  };
  pot.hess = [qm](const Eigen::VectorXd&) -> Eigen::MatrixXd { return qm; };
  pot.moments_exact = [a, qm](const GaussianMeasure& mu) {
    return MomentPair{qm * (mu.mean - a), qm};
  };
  pot.potential_energy_exact = [a, qm](const GaussianMeasure& mu) {
    const Eigen::VectorXd r = mu.mean - a;
    return 0.5 * ((qm * mu.cov.matrix()).trace() + r.dot(qm * r));
  };
  return pot;
}

GaussianMeasure quadratic_target(const Eigen::VectorXd& a, const SpdMatrix& q) {
  return GaussianMeasure(a, spd_inverse(q));
}

PotentialSpec logistic_potential(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const long n = x.rows();
  if (n < 1) throw InvariantViolation("logistic_potential: empty data");
  if (y.size() != n) {
    throw DimensionMismatch("logistic_potential: label count does not match rows");
  }
  for (long i = 0; i < n; ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw InvariantViolation("logistic_potential: labels must lie in {0, 1}");
    }
  }
  PotentialSpec pot;
  pot.dim = static_cast<int>(x.cols());
  pot.alpha = 0.0;
  pot.beta =
      0.25 * sym_eigenvalues(SymMatrix::symmetrized(x.transpose() * x)).maxCoeff();
  pot.exact_moments = false;
  pot.value = [x, y](const Eigen::VectorXd& theta) {
    const Eigen::VectorXd z = x * theta;
    double v = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) v += softplus(z[i]) - y[i] * z[i];
    return v;
  };
  pot.grad = [x, y](const Eigen::VectorXd& theta) -> Eigen::VectorXd {
    const Eigen::VectorXd z = x * theta;
    Eigen::VectorXd r(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) r[i] = sigmoid(z[i]) - y[i];
    return x.transpose() * r;
  };
  pot.hess = [x](const Eigen::VectorXd& theta) -> Eigen::MatrixXd {
    const Eigen::VectorXd z = x * theta;
    Eigen::VectorXd w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = sigmoid(z[i]);
      w[i] = s * (1.0 - s);
    }
    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    return 0.5 * (h + h.transpose());
  };
  return pot;
}

namespace {

// Unit-scale smoothed double well. Quartic core (t^2-1)^2/4 for |t| <= t0,
// constant curvature 3 beyond, C^2 at the seam since 3 t0^2 - 1 = 3.
constexpr double kDwSeam = 1.1547005383792515290;  // 2/sqrt(3)

double dw_h(double t) {
  const double a = std::abs(t);
  if (a <= kDwSeam) {
    const double u = t * t - 1.0;
    return 0.25 * u * u;
  }
  const double u0 = kDwSeam * kDwSeam - 1.0;
  const double h0 = 0.25 * u0 * u0;
  const double hp0 = kDwSeam * kDwSeam * kDwSeam - kDwSeam;
  const double e = a - kDwSeam;
  return h0 + hp0 * e + 1.5 * e * e;
}

double dw_hp(double t) {
  const double a = std::abs(t);
  const double sign = t < 0.0 ? -1.0 : 1.0;
  if (a <= kDwSeam) return t * t * t - t;
  const double hp0 = kDwSeam * kDwSeam * kDwSeam - kDwSeam;
  return sign * (hp0 + 3.0 * (a - kDwSeam));
}

double dw_hpp(double t) {
  const double a = std::abs(t);
  if (a <= kDwSeam) return 3.0 * t * t - 1.0;
  return 3.0;
}

}  // namespace

PotentialSpec double_well_potential(int dim, double scale) {
  if (!(scale > 0.0)) {
    throw InvariantViolation("double_well_potential: scale must be positive");
  }
  if (dim < 1) throw InvariantViolation("double_well_potential: dim must be >= 1");
  PotentialSpec pot;
  pot.dim = dim;
  pot.alpha = -scale;
  pot.beta = 3.0 * scale;
  pot.exact_moments = false;
  pot.value = [scale](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) v += dw_h(x[j]);
    return scale * v;
  };
  pot.grad = [scale](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) g[j] = scale * dw_hp(x[j]);
    return g;
  };
  pot.hess = [scale](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) h(j, j) = scale * dw_hpp(x[j]);
    return h;
  };
  return pot;
}

MomentEstimate compute_moments(const PotentialSpec& pot, const GaussianMeasure& mu,
                               MomentMode mode, long n, Rng& rng) {
  MomentEstimate est;
  est.mode = mode;
  est.seed_tag = rng.lineage();
  switch (mode) {
    case MomentMode::exact: {
      if (!pot.exact_moments || !pot.moments_exact) {
        throw CapabilityError("compute_moments: potential has no exact moments");
      }
      MomentPair p = pot.moments_exact(mu);
      est.b_hat = std::move(p.b);
      est.s_hat = SymMatrix::symmetrized(p.s);
      est.n_samples = 0;
      return est;
    }
    case MomentMode::monte_carlo: {
      if (n < 1) throw InvariantViolation("compute_moments: monte_carlo needs n >= 1");
      const int d = mu.dim();
      const Eigen::MatrixXd r = mu.cov.sqrt_matrix();
      Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
      Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
      for (long i = 0; i < n; ++i) {
        const Eigen::VectorXd x = sample(mu.mean, r, rng);
        b += pot.grad(x);
        s += pot.hess(x);
      }
      est.b_hat = b / static_cast<double>(n);
      est.s_hat = SymMatrix::symmetrized(s / static_cast<double>(n));
      est.n_samples = n;
      return est;
    }
    case MomentMode::quadrature: {
      const int d = mu.dim();
      if (d > 4) {
        throw CapabilityError("compute_moments: quadrature limited to d <= 4");
      }
      const int nodes = static_cast<int>(n);
      est.b_hat = gauss_hermite_expectation(
          [&pot](const Eigen::VectorXd& x) -> Eigen::VectorXd { return pot.grad(x); },
          mu, nodes);
      est.s_hat = SymMatrix::symmetrized(gauss_hermite_expectation(
          [&pot](const Eigen::VectorXd& x) -> Eigen::MatrixXd { return pot.hess(x); },
          mu, nodes));
      est.n_samples = nodes;
      return est;
    }
  }
  throw Error("compute_moments: unreachable");
}

LogisticData generate_logistic_data(const Eigen::VectorXd& theta_true, long n, Rng& rng) {
  if (n < 1) throw InvariantViolation("generate_logistic_data: n must be >= 1");
  const int d = static_cast<int>(theta_true.size());
  LogisticData data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.normal();
    const double p = sigmoid(data.x.row(i).dot(theta_true));
    data.y[i] = rng.uniform() < p ? 1.0 : 0.0;
  }
  return data;
}

}  // namespace gvi
