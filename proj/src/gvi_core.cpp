#include "gvi/gvi_core.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include <Eigen/Dense>

namespace gvi {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::fbgvi: return "fbgvi";
    case Variant::stochastic_fbgvi: return "stochastic_fbgvi";
    case Variant::bw_sgd: return "bw_sgd";
    case Variant::stochastic_bw_sgd: return "stochastic_bw_sgd";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  if (s == "fbgvi") return Variant::fbgvi;
  if (s == "stochastic_fbgvi") return Variant::stochastic_fbgvi;
  if (s == "bw_sgd") return Variant::bw_sgd;
  if (s == "stochastic_bw_sgd") return Variant::stochastic_bw_sgd;
  throw ConfigError("unknown variant '" + s + "'");
}

bool is_stochastic(Variant v) {
  return v == Variant::stochastic_fbgvi || v == Variant::stochastic_bw_sgd;
}

std::optional<std::string> step_size_warning(const StepConfig& cfg,
                                             const PotentialSpec& pot) {
  if (!(cfg.eta > 0.0)) throw InvariantViolation("step size eta must be positive");
  const double cap = is_stochastic(cfg.variant) ? 0.5 / pot.beta : 1.0 / pot.beta;
  if (cfg.eta > cap * (1.0 + 1e-12)) {
    return "eta = " + std::to_string(cfg.eta) + " exceeds the contraction regime (" +
           std::to_string(cap) + " for " + to_string(cfg.variant) + ")";
  }
  return std::nullopt;
}

IterState make_initial_state(const GaussianMeasure& p0, const StepConfig& cfg) {
  return IterState{0, p0, MomentEstimate{}, Rng(cfg.seed)};
}

AffineMap bw_grad_potential(const PotentialSpec& pot, const GaussianMeasure& mu,
                            const MomentEstimate& m) {
  (void)pot;
  if (m.b_hat.size() != mu.mean.size()) {
    throw DimensionMismatch("bw_grad_potential: moment estimate dimension mismatch");
  }
  return AffineMap(m.b_hat, m.s_hat, mu.mean);
}

namespace {

MomentEstimate step_moments(const IterState& s, const PotentialSpec& pot,
                            const StepConfig& cfg, Rng& rng) {
  if (is_stochastic(cfg.variant)) {
    return compute_moments(pot, s.p, MomentMode::monte_carlo, cfg.stochastic_batch, rng);
  }
  return compute_moments(pot, s.p, cfg.moment_mode, cfg.n_samples, rng);
}

}  // namespace

IterState fbgvi_step_with_moments(const IterState& s, const MomentEstimate& m,
                                  double eta) {
  const int d = s.p.dim();
  const Eigen::VectorXd mean_next = s.p.mean - eta * m.b_hat;
  const Eigen::MatrixXd mstep =
      Eigen::MatrixXd::Identity(d, d) - eta * m.s_hat.matrix();
  const SymMatrix half =
      SymMatrix::symmetrized(mstep * s.p.cov.matrix() * mstep);
  GaussianMeasure next = entropy_jko(mean_next, half, eta);
  return IterState{s.k + 1, std::move(next), m, s.rng};
}

IterState fbgvi_step(const IterState& s, const PotentialSpec& pot,
                     const StepConfig& cfg) {
  if (cfg.variant != Variant::fbgvi && cfg.variant != Variant::stochastic_fbgvi) {
    throw ConfigError("fbgvi_step: wrong variant");
  }
  Rng rng = s.rng;
  const MomentEstimate m = step_moments(s, pot, cfg, rng);
  IterState next = fbgvi_step_with_moments(s, m, cfg.eta);
  next.rng = rng;
  return next;
}

IterState bw_sgd_step_with_moments(const IterState& s, const MomentEstimate& m,
                                   double eta) {
  const int d = s.p.dim();
  const Eigen::MatrixXd g = m.s_hat.matrix() - s.p.cov.inverse_matrix();
  const Eigen::MatrixXd mstep = Eigen::MatrixXd::Identity(d, d) - eta * g;
  const Eigen::VectorXd mean_next = s.p.mean - eta * m.b_hat;
  Eigen::MatrixXd cov_next = mstep * s.p.cov.matrix() * mstep;
  cov_next = 0.5 * (cov_next + cov_next.transpose());
  if (!cov_next.allFinite() || !mean_next.allFinite()) {
    throw DivergenceError("bw_sgd_step: non-finite iterate at step " +
                              std::to_string(s.k + 1),
                          std::numeric_limits<double>::quiet_NaN());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_next);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("bw_sgd_step: eigensolver failed");
  }
  const double lmin = solver.eigenvalues()[0];
  const double lmax = solver.eigenvalues()[d - 1];
  if (!(lmax > 0.0) || lmin <= 1e-14 * lmax) {
    throw DivergenceError("bw_sgd_step: covariance lost positive definiteness, lambda_min " +
                              std::to_string(lmin),
                          lmin);
  }
  GaussianMeasure next(mean_next,
                       SpdMatrix::from_eig(solver.eigenvectors(), solver.eigenvalues()));
  return IterState{s.k + 1, std::move(next), m, s.rng};
}

IterState bw_sgd_step(const IterState& s, const PotentialSpec& pot,
                      const StepConfig& cfg) {
  if (cfg.variant != Variant::bw_sgd && cfg.variant != Variant::stochastic_bw_sgd) {
    throw ConfigError("bw_sgd_step: wrong variant");
  }
  Rng rng = s.rng;
  const MomentEstimate m = step_moments(s, pot, cfg, rng);
  IterState next = bw_sgd_step_with_moments(s, m, cfg.eta);
  next.rng = rng;
  return next;
}

IterState step(const IterState& s, const PotentialSpec& pot, const StepConfig& cfg) {
  switch (cfg.variant) {
    case Variant::fbgvi:
    case Variant::stochastic_fbgvi:
      return fbgvi_step(s, pot, cfg);
    case Variant::bw_sgd:
    case Variant::stochastic_bw_sgd:
      return bw_sgd_step(s, pot, cfg);
  }
  throw Error("step: unreachable");
}

GaussianMeasure laplace_approximation(const PotentialSpec& pot,
                                      const Eigen::VectorXd& x0, int max_iter,
                                      double tol) {
  Eigen::VectorXd x = x0;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = pot.grad(x);
    if (!g.allFinite()) throw NumericalFailure("laplace_approximation: non-finite gradient");
    if (g.norm() <= tol) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd h = pot.hess(x);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalFailure("laplace_approximation: Hessian factorization failed");
    }
    x -= ldlt.solve(g);
  }
  if (!converged && pot.grad(x).norm() > tol) {
    throw NumericalFailure("laplace_approximation: no convergence in " +
                           std::to_string(max_iter) + " iterations");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(pot.hess(x));
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("laplace_approximation: Hessian eigensolver failed");
  }
  const double lmin = solver.eigenvalues()[0];
  const double lmax = solver.eigenvalues()[solver.eigenvalues().size() - 1];
  if (!(lmax > 0.0) || lmin <= 1e-14 * lmax) {
    throw InvariantViolation("laplace_approximation: indefinite Hessian at candidate mode");
  }
  Eigen::VectorXd inv = solver.eigenvalues().cwiseInverse().reverse();
  Eigen::MatrixXd q = solver.eigenvectors().rowwise().reverse();
  return GaussianMeasure(x, SpdMatrix::from_eig(q, inv));
}

namespace {

constexpr std::uint64_t kDiagStreamTag = 0xD1A90000u;
constexpr std::uint64_t kReplicaStreamTag = 0x5EED0000u;

class TraceBuilder {
 public:
  TraceBuilder(const PotentialSpec& pot, const StepConfig& cfg, const TraceOptions& topts)
      : pot_(pot), topts_(topts), diag_root_(Rng(cfg.seed).fork(kDiagStreamTag)),
        start_(std::chrono::steady_clock::now()) {}

  TraceRecord row(long k, const GaussianMeasure& p) {
    TraceRecord r;
    r.k = k;
    r.lambda_min = p.cov.lambda_min();
    r.lambda_max = p.cov.lambda_max();
    Rng rng = diag_root_.fork(static_cast<std::uint64_t>(k));
    const MomentEstimate dm = diag_moments(p, rng);
    r.grad_norm_sq = grad_norm_sq(pot_, p, dm);
    if (topts_.target) {
      r.kl_to_target = kl_gaussian(p, *topts_.target);
      r.w2_sq_to_target = w2_squared(p, *topts_.target);
    }
    double f = objective_value(p, rng);
    if (topts_.f_target) f -= *topts_.f_target;
    r.f_gap_or_estimate = f;
    if (topts_.sigma_redraws >= 2) {
      r.sigma_sq_hat = sigma_sq_estimate(pot_, p, topts_.sigma_redraws, rng);
    }
    if (topts_.timing) {
      r.wall_time_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::steady_clock::now() - start_)
                           .count();
    }
    return r;
  }

 private:
  MomentEstimate diag_moments(const GaussianMeasure& p, Rng& rng) {
    MomentMode mode = topts_.diag_moment_mode;
    if (mode == MomentMode::exact && !pot_.exact_moments) {
      mode = MomentMode::monte_carlo;
    }
    const long n =
        mode == MomentMode::quadrature ? 32 : topts_.diag_samples;
    return compute_moments(pot_, p, mode, n, rng);
  }

  double objective_value(const GaussianMeasure& p, Rng& rng) {
    if (pot_.potential_energy_exact) {
      return objective(pot_, p, MomentMode::exact, 0, rng);
    }
    if (p.dim() <= 4) {
      return objective(pot_, p, MomentMode::quadrature, 32, rng);
    }
    return objective(pot_, p, MomentMode::monte_carlo, topts_.objective_samples, rng);
  }

  const PotentialSpec& pot_;
  const TraceOptions& topts_;
  Rng diag_root_;
  std::chrono::steady_clock::time_point start_;
};

double spectrum_min(const MomentEstimate& m) {
  if (m.s_hat.dim() == 0) return std::numeric_limits<double>::quiet_NaN();
  return sym_eigenvalues(m.s_hat).minCoeff();
}

double spectrum_max(const MomentEstimate& m) {
  if (m.s_hat.dim() == 0) return std::numeric_limits<double>::quiet_NaN();
  return sym_eigenvalues(m.s_hat).maxCoeff();
}

}  // namespace

RunResult run(const PotentialSpec& pot, const GaussianMeasure& p0,
              const StepConfig& cfg, long num_iters, const TraceOptions& topts) {
  if (num_iters < 1) throw InvariantViolation("run: num_iters must be >= 1");
  if (topts.record_every < 1) throw InvariantViolation("run: record_every must be >= 1");
  if (const auto warn = step_size_warning(cfg, pot); warn && topts.warnings) {
    (*topts.warnings) << "warning: " << *warn << '\n';
  }

  TraceBuilder tracer(pot, cfg, topts);
  RunResult out;
  IterState state = make_initial_state(p0, cfg);
  out.min_lambda_min = state.p.cov.lambda_min();
  out.min_lambda_k = 0;

  // A point for iterate k is recorded once the step out of k has run, so the
  // moments used at k are available for the trace; the final iterate gets a
  // moment-free point.
  for (long k = 0; k < num_iters; ++k) {
    std::optional<IterState> next;
    try {
      next.emplace(step(state, pot, cfg));
    } catch (const DivergenceError& e) {
      out.divergence = DivergenceEvent{k + 1, e.lambda_min, e.what(), false};
      break;
    } catch (const SingularMatrixError& e) {
      out.divergence = DivergenceEvent{k + 1, e.lambda_min, e.what(), false};
      break;
    } catch (const Error& e) {
      out.divergence =
          DivergenceEvent{k + 1, std::numeric_limits<double>::quiet_NaN(), e.what(), true};
      break;
    }
    if (k % topts.record_every == 0) {
      out.trajectory.push_back(TrajectoryPoint{k, state.p,
                                               spectrum_min(next->last_moments),
                                               spectrum_max(next->last_moments)});
      out.trace.push_back(tracer.row(k, state.p));
    }
    state = std::move(*next);
    if (state.p.cov.lambda_min() < out.min_lambda_min) {
      out.min_lambda_min = state.p.cov.lambda_min();
      out.min_lambda_k = state.k;
    }
    if (topts.on_iteration) topts.on_iteration(state);
  }

  out.trajectory.push_back(TrajectoryPoint{state.k, state.p});
  out.trace.push_back(tracer.row(state.k, state.p));
  out.final_state = std::move(state);
  return out;
}

std::vector<RunResult> run_ensemble(const PotentialSpec& pot, const GaussianMeasure& p0,
                                    const StepConfig& cfg, long num_iters,
                                    int replicas, const TraceOptions& topts,
                                    int threads) {
  if (replicas < 1) throw InvariantViolation("run_ensemble: replicas must be >= 1");
  if (threads < 1) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  threads = std::min(threads, replicas);

  std::vector<std::optional<RunResult>> slots(replicas);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= replicas || failed.load()) return;
      StepConfig local = cfg;
      local.seed = derive_seed(cfg.seed, kReplicaStreamTag + static_cast<std::uint64_t>(r));
      try {
        slots[r] = run(pot, p0, local, num_iters, topts);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (failed.load()) throw Error("run_ensemble: replica failed: " + first_error);
  std::vector<RunResult> out;
  out.reserve(replicas);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace gvi
