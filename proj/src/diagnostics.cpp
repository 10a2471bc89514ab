#include "gvi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gvi/reference_oracles.hpp"

namespace gvi {

namespace {

constexpr double kExactSlack = 1e-8;
constexpr double kEigSlack = 1e-9;
constexpr int kQuadratureNodes = 32;

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Reference (b, S) for error estimation: exact when available, Gauss-Hermite
// when the dimension permits.
MomentEstimate reference_moments(const PotentialSpec& pot, const GaussianMeasure& mu,
                                 Rng& rng) {
  if (pot.exact_moments) {
    return compute_moments(pot, mu, MomentMode::exact, 0, rng);
  }
  if (mu.dim() <= 4) {
    return compute_moments(pot, mu, MomentMode::quadrature, kQuadratureNodes, rng);
  }
  throw CapabilityError(
      "reference moments need an exact-moment potential or d <= 4 for quadrature");
}

void require_consecutive(const std::vector<TrajectoryPoint>& traj, const char* who) {
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (traj[i].k != traj[i - 1].k + 1) {
      throw ConfigError(std::string(who) + ": trajectory must be recorded at every step");
    }
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

BoundCheck make_check(std::string name, double lhs, double rhs, double slack,
                      CheckContext ctx) {
  BoundCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack_used = slack;
  c.pass = std::isfinite(lhs) && std::isfinite(rhs) && lhs <= rhs + slack;
  c.context = ctx;
  return c;
}

void write_bound_checks(std::ostream& os, const std::vector<BoundCheck>& checks) {
  os << "name,k,eta,alpha,beta,replicas,seed,lhs,rhs,slack,pass\n";
  for (const auto& c : checks) {
    os << c.name << ',' << c.context.k << ',' << g17(c.context.eta) << ','
       << g17(c.context.alpha) << ',' << g17(c.context.beta) << ','
       << c.context.replicas << ',' << c.context.seed << ',' << g17(c.lhs) << ','
       << g17(c.rhs) << ',' << g17(c.slack_used) << ','
       << (c.pass ? "PASS" : "FAIL") << '\n';
  }
}

bool all_pass(const std::vector<BoundCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const BoundCheck& c) { return c.pass; });
}

double objective(const PotentialSpec& pot, const GaussianMeasure& mu, MomentMode mode,
                 long n, Rng& rng) {
  return objective_estimate(pot, mu, mode, n, rng).value;
}

Estimate objective_estimate(const PotentialSpec& pot, const GaussianMeasure& mu,
                            MomentMode mode, long n, Rng& rng) {
  const double ent = entropy(mu);
  switch (mode) {
    case MomentMode::exact: {
      if (!pot.potential_energy_exact) {
        throw CapabilityError("objective: potential has no exact energy");
      }
      return Estimate{pot.potential_energy_exact(mu) + ent, 0.0};
    }
    case MomentMode::monte_carlo: {
      if (n < 1) throw InvariantViolation("objective: monte_carlo needs n >= 1");
      const Eigen::MatrixXd r = mu.cov.sqrt_matrix();
      double s = 0.0, ss = 0.0;
      for (long i = 0; i < n; ++i) {
        const double v = pot.value(sample(mu.mean, r, rng));
        s += v;
        ss += v * v;
      }
      const double mean = s / static_cast<double>(n);
      double se = 0.0;
      if (n > 1) {
        const double var =
            std::max(0.0, (ss - static_cast<double>(n) * mean * mean) /
                              static_cast<double>(n - 1));
        se = std::sqrt(var / static_cast<double>(n));
      }
      return Estimate{mean + ent, se};
    }
    case MomentMode::quadrature: {
      const double ev = gauss_hermite_expectation(
          [&pot](const Eigen::VectorXd& x) { return pot.value(x); }, mu,
          static_cast<int>(n));
      return Estimate{ev + ent, 0.0};
    }
  }
  throw Error("objective: unreachable");
}

double grad_norm_sq(const PotentialSpec& pot, const GaussianMeasure& mu,
                    const MomentEstimate& m) {
  (void)pot;
  const Eigen::MatrixXd s = m.s_hat.matrix() - mu.cov.inverse_matrix();
  const AffineMap g(m.b_hat, SymMatrix::symmetrized(s), mu.mean);
  return affine_inner_product(g, g, mu);
}

double sigma_sq_estimate(const PotentialSpec& pot, const GaussianMeasure& mu,
                         long n_redraws, Rng& rng) {
  return sigma_sq_estimate_with_se(pot, mu, n_redraws, rng).value;
}

Estimate sigma_sq_estimate_with_se(const PotentialSpec& pot, const GaussianMeasure& mu,
                                   long n_redraws, Rng& rng) {
  if (n_redraws < 2) {
    throw InvariantViolation("sigma_sq_estimate: n_redraws must be >= 2");
  }
  const MomentEstimate ref = reference_moments(pot, mu, rng);
  const Eigen::MatrixXd r = mu.cov.sqrt_matrix();
  const Eigen::MatrixXd& cov = mu.cov.matrix();
  double s = 0.0, ss = 0.0;
  for (long i = 0; i < n_redraws; ++i) {
    const Eigen::VectorXd x = sample(mu.mean, r, rng);
    const Eigen::VectorXd db = pot.grad(x) - ref.b_hat;
    const Eigen::MatrixXd ds = pot.hess(x) - ref.s_hat.matrix();
    const double v = db.squaredNorm() + (ds * cov * ds).trace();
    s += v;
    ss += v * v;
  }
  const double mean = s / static_cast<double>(n_redraws);
  const double var = std::max(0.0, (ss - static_cast<double>(n_redraws) * mean * mean) /
                                       static_cast<double>(n_redraws - 1));
  return Estimate{mean, std::sqrt(var / static_cast<double>(n_redraws))};
}

std::vector<BoundCheck> check_one_step_inequality(
    const std::vector<TrajectoryPoint>& trajectory, const GaussianMeasure& target,
    double alpha, double beta, double eta, CheckContext ctx) {
  if (eta > 1.0 / beta * (1.0 + 1e-12)) {
    throw ConfigError("one_step_inequality: needs eta <= 1/beta");
  }
  require_consecutive(trajectory, "one_step_inequality");
  ctx.eta = eta;
  ctx.alpha = alpha;
  ctx.beta = beta;
  std::vector<BoundCheck> out;
  for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
    const double w2_k = w2_squared(trajectory[i].p, target);
    const double w2_next = w2_squared(trajectory[i + 1].p, target);
    const double f_gap = kl_gaussian(trajectory[i + 1].p, target);
    ctx.k = trajectory[i].k;
    out.push_back(make_check("one_step_inequality", w2_next,
                             (1.0 - alpha * eta) * w2_k - 2.0 * eta * f_gap,
                             kExactSlack, ctx));
  }
  return out;
}

std::vector<BoundCheck> check_one_step_inequality_ensemble(
    const std::vector<std::vector<TrajectoryPoint>>& replicas,
    const GaussianMeasure& target, double alpha, double beta, double eta,
    double mc_slack_factor, CheckContext ctx) {
  if (replicas.empty()) throw ConfigError("one_step_inequality_ensemble: no replicas");
  if (eta > 0.5 / beta * (1.0 + 1e-12)) {
    throw ConfigError("one_step_inequality_ensemble: needs eta <= 1/(2 beta)");
  }
  for (const auto& t : replicas) require_consecutive(t, "one_step_inequality_ensemble");
  const std::size_t steps = replicas.front().size();
  const double d = static_cast<double>(target.dim());
  const double var_coeff = 12.0 * beta * beta * beta * target.cov.lambda_max();
  ctx.eta = eta;
  ctx.alpha = alpha;
  ctx.beta = beta;
  ctx.replicas = static_cast<int>(replicas.size());
  std::vector<BoundCheck> out;
  for (std::size_t i = 0; i + 1 < steps; ++i) {
    // Per replica: lhs - rhs with the variance term bounded by the gradient
    // variance inequality; the theorem makes the expectation nonpositive.
    std::vector<double> defects;
    defects.reserve(replicas.size());
    for (const auto& t : replicas) {
      const double w2_k = w2_squared(t[i].p, target);
      const double w2_next = w2_squared(t[i + 1].p, target);
      const double f_gap = kl_gaussian(t[i + 1].p, target);
      const double sigma_bound = 6.0 * beta * d + var_coeff * w2_k;
      defects.push_back(w2_next - (1.0 - alpha * eta) * w2_k + 2.0 * eta * f_gap -
                        2.0 * eta * eta * sigma_bound);
    }
    const double mean = mean_of(defects);
    const double se = std_error_of(defects, mean);
    ctx.k = replicas.front()[i].k;
    out.push_back(make_check("one_step_inequality_ensemble", mean, 0.0,
                             mc_slack_factor * se + kExactSlack, ctx));
  }
  return out;
}

namespace {

double starting_w2(const RateCheckInput& in) {
  if (std::isfinite(in.w2_0_sq)) return in.w2_0_sq;
  if (in.trajectory && !in.trajectory->empty() && in.target) {
    return w2_squared(in.trajectory->front().p, *in.target);
  }
  if (in.ensemble && !in.ensemble->empty() && !in.ensemble->front().empty()) {
    const auto& row = in.ensemble->front().front();
    if (row.w2_sq_to_target) return *row.w2_sq_to_target;
  }
  throw ConfigError("rate check: starting W2^2 unavailable");
}

CheckContext base_ctx(const RateCheckInput& in) {
  CheckContext ctx;
  ctx.eta = in.eta;
  ctx.alpha = in.alpha;
  ctx.beta = in.beta;
  ctx.seed = in.seed;
  return ctx;
}

std::vector<BoundCheck> check_t1(const RateCheckInput& in) {
  if (!in.trajectory || !in.target) throw ConfigError("T1: needs trajectory and target");
  if (in.alpha < 0.0) throw ConfigError("T1: needs a convex potential");
  if (in.eta > 1.0 / in.beta * (1.0 + 1e-12)) throw ConfigError("T1: needs eta <= 1/beta");
  const double w20 = starting_w2(in);
  CheckContext ctx = base_ctx(in);
  std::vector<BoundCheck> out;
  for (const auto& pt : *in.trajectory) {
    if (pt.k < 1) continue;
    ctx.k = pt.k;
    const double gap = kl_gaussian(pt.p, *in.target);
    out.push_back(make_check("rate_T1_convex", gap,
                             w20 / (2.0 * static_cast<double>(pt.k) * in.eta),
                             kExactSlack, ctx));
  }
  return out;
}

std::vector<BoundCheck> check_t3(const RateCheckInput& in) {
  if (!in.trajectory || !in.target) throw ConfigError("T3: needs trajectory and target");
  if (!(in.alpha > 0.0)) throw ConfigError("T3: needs a strongly convex potential");
  if (in.eta > 1.0 / in.beta * (1.0 + 1e-12)) throw ConfigError("T3: needs eta <= 1/beta");
  const double w20 = starting_w2(in);
  CheckContext ctx = base_ctx(in);
  std::vector<BoundCheck> out;
  for (const auto& pt : *in.trajectory) {
    if (pt.k < 1) continue;
    ctx.k = pt.k;
    out.push_back(make_check(
        "rate_T3_strongly_convex", w2_squared(pt.p, *in.target),
        std::exp(-in.alpha * static_cast<double>(pt.k) * in.eta) * w20, kExactSlack,
        ctx));
  }
  return out;
}

std::vector<BoundCheck> check_t4(const RateCheckInput& in) {
  if (!in.trace) throw ConfigError("T4: needs a trace with gradient norms");
  if (!std::isfinite(in.delta)) throw ConfigError("T4: needs delta = F(p_0) - F(target)");
  if (in.eta > 1.0 / in.beta * (1.0 + 1e-12)) throw ConfigError("T4: needs eta <= 1/beta");
  CheckContext ctx = base_ctx(in);
  std::vector<BoundCheck> out;
  double running_min = std::numeric_limits<double>::infinity();
  for (const auto& row : *in.trace) {
    if (row.k >= 1) {
      // Prefix N' = row.k covers iterates 0 .. N'-1, i.e. rows before this one.
      ctx.k = row.k;
      out.push_back(make_check(
          "rate_T4_stationarity", running_min,
          150.0 * in.delta / (in.eta * static_cast<double>(row.k)), kExactSlack, ctx));
    }
    running_min = std::min(running_min, row.grad_norm_sq);
  }
  return out;
}

std::vector<BoundCheck> check_t5(const RateCheckInput& in) {
  if (!in.ensemble || in.ensemble->empty() || !in.target) {
    throw ConfigError("T5: needs a replica ensemble and target");
  }
  if (in.alpha < 0.0) throw ConfigError("T5: needs a convex potential");
  if (in.eta > 0.5 / in.beta * (1.0 + 1e-12)) throw ConfigError("T5: needs eta <= 1/(2 beta)");
  const double w20 = starting_w2(in);
  const double d = static_cast<double>(in.target->dim());
  const double c = 24.0 * std::pow(in.beta, 3) * in.target->cov.lambda_max();
  std::vector<double> mins;
  long n_final = 0;
  for (const auto& trace : *in.ensemble) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& row : trace) {
      if (row.k >= 1) m = std::min(m, row.f_gap_or_estimate);
      n_final = std::max(n_final, row.k);
    }
    mins.push_back(m);
  }
  const double mean = mean_of(mins);
  const double se = std_error_of(mins, mean);
  const double rhs = 2.0 * w20 / (static_cast<double>(n_final) * in.eta) +
                     2.0 * c * in.eta * w20 + 12.0 * in.beta * in.eta * d;
  CheckContext ctx = base_ctx(in);
  ctx.k = n_final;
  ctx.replicas = static_cast<int>(in.ensemble->size());
  return {make_check("rate_T5_stochastic_convex", mean, rhs,
                     in.mc_slack_factor * se + kExactSlack, ctx)};
}

std::vector<BoundCheck> check_t6(const RateCheckInput& in) {
  if (!in.ensemble || in.ensemble->empty() || !in.target) {
    throw ConfigError("T6: needs a replica ensemble and target");
  }
  if (!(in.alpha > 0.0)) throw ConfigError("T6: needs a strongly convex potential");
  const double eta_cap = in.alpha * in.alpha / (48.0 * std::pow(in.beta, 3));
  if (in.eta > eta_cap * (1.0 + 1e-12)) {
    throw ConfigError("T6: needs eta <= alpha^2 / (48 beta^3)");
  }
  const double w20 = starting_w2(in);
  const double d = static_cast<double>(in.target->dim());
  const double floor_term = 24.0 * in.beta * in.eta * d / in.alpha;
  const std::size_t rows = in.ensemble->front().size();
  for (const auto& t : *in.ensemble) {
    if (t.size() != rows) throw ConfigError("T6: replica traces must align");
  }
  CheckContext ctx = base_ctx(in);
  ctx.replicas = static_cast<int>(in.ensemble->size());
  std::vector<BoundCheck> out;
  for (std::size_t i = 0; i < rows; ++i) {
    const long k = in.ensemble->front()[i].k;
    if (k < 1) continue;
    std::vector<double> vals;
    vals.reserve(in.ensemble->size());
    for (const auto& t : *in.ensemble) {
      if (!t[i].w2_sq_to_target) throw ConfigError("T6: trace lacks W2^2 column");
      vals.push_back(*t[i].w2_sq_to_target);
    }
    const double mean = mean_of(vals);
    const double se = std_error_of(vals, mean);
    const double rhs =
        std::exp(-in.alpha * static_cast<double>(k) * in.eta / 2.0) * w20 + floor_term;
    ctx.k = k;
    out.push_back(make_check("rate_T6_stochastic_strongly_convex", mean, rhs,
                             in.mc_slack_factor * se + kExactSlack, ctx));
  }
  return out;
}

}  // namespace

std::vector<BoundCheck> check_rate_theorems(RateTheorem which, const RateCheckInput& in) {
  switch (which) {
    case RateTheorem::T1: return check_t1(in);
    case RateTheorem::T3: return check_t3(in);
    case RateTheorem::T4: return check_t4(in);
    case RateTheorem::T5: return check_t5(in);
    case RateTheorem::T6: return check_t6(in);
  }
  throw Error("check_rate_theorems: unreachable");
}

BoundCheck check_variance_bound(const PotentialSpec& pot, const GaussianMeasure& mu,
                                const GaussianMeasure& target, long n_redraws,
                                Rng& rng, double mc_slack_factor, CheckContext ctx) {
  if (n_redraws < 100) {
    throw InvariantViolation("check_variance_bound: needs n_redraws >= 100");
  }
  const Estimate est = sigma_sq_estimate_with_se(pot, mu, n_redraws, rng);
  const double d = static_cast<double>(mu.dim());
  const double rhs = 6.0 * pot.beta * d +
                     12.0 * std::pow(pot.beta, 3) * target.cov.lambda_max() *
                         w2_squared(mu, target);
  ctx.alpha = pot.alpha;
  ctx.beta = pot.beta;
  return make_check("variance_bound", est.value, rhs,
                    mc_slack_factor * est.std_error, ctx);
}

std::vector<BoundCheck> check_eigenvalue_control(
    const std::vector<TrajectoryPoint>& trajectory, double beta, double eta,
    CheckContext ctx) {
  ctx.eta = eta;
  ctx.beta = beta;
  std::vector<BoundCheck> out;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& pt = trajectory[i];
    ctx.k = pt.k;
    out.push_back(make_check("eig_floor_inv_beta", 1.0 / beta,
                             pt.p.cov.lambda_min(), kEigSlack, ctx));
    const bool has_next = i + 1 < trajectory.size() &&
                          trajectory[i + 1].k == pt.k + 1 &&
                          std::isfinite(pt.step_s_min);
    if (!has_next) continue;
    const double gamma0 = std::min(1.0 / pt.p.cov.lambda_max(), pt.step_s_min);
    const double gamma1 = std::max(1.0 / pt.p.cov.lambda_min(), pt.step_s_max);
    if (!(gamma0 > 0.0) || eta > 1.0 / gamma1 * (1.0 + 1e-12)) continue;
    const auto& next = trajectory[i + 1].p.cov;
    out.push_back(
        make_check("eig_sandwich_lower", 1.0 / gamma1, next.lambda_min(), kEigSlack, ctx));
    out.push_back(
        make_check("eig_sandwich_upper", next.lambda_max(), 1.0 / gamma0, kEigSlack, ctx));
  }
  return out;
}

BoundCheck check_asymptotic_decrease(const std::vector<TrajectoryPoint>& trajectory,
                                     const GaussianMeasure& candidate,
                                     CheckContext ctx) {
  std::vector<double> dist(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    dist[i] = w2_squared(trajectory[i].p, candidate);
  }
  // Smallest index from which the distance is non-increasing to the end.
  std::size_t k0 = trajectory.size() - 1;
  while (k0 > 0 && dist[k0 - 1] + kEigSlack >= dist[k0]) --k0;
  ctx.k = trajectory[k0].k;
  const double horizon = static_cast<double>(trajectory.back().k);
  return make_check("asymptotic_w2_decrease", static_cast<double>(trajectory[k0].k),
                    horizon / 2.0, 0.0, ctx);
}

}  // namespace gvi
