#include "gvi/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace gvi {

namespace {

constexpr std::uint64_t kOrthogonalTag = 1;
constexpr std::uint64_t kTargetMeanTag = 2;
constexpr std::uint64_t kThetaTag = 3;
constexpr std::uint64_t kDataTag = 4;
constexpr std::uint64_t kLaplaceFTag = 5;
constexpr std::uint64_t kComboTag = 0xC0B0u;

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string opt17(const std::optional<double>& v) {
  return v ? g17(*v) : std::string();
}

GaussianMeasure isotropic(int d, double variance) {
  return GaussianMeasure(Eigen::VectorXd::Zero(d),
                         SpdMatrix(Eigen::MatrixXd::Identity(d, d) * variance));
}

}  // namespace

ExperimentSetup build_experiment(const ExperimentConfig& cfg) {
  Rng root(cfg.seed);
  switch (cfg.experiment) {
    case ExperimentKind::gaussian_target: {
      const int d = cfg.d;
      Rng orng = root.fork(kOrthogonalTag);
      const Eigen::MatrixXd u = random_orthogonal(d, orng);
      Eigen::VectorXd lam(d);
      for (int i = 0; i < d; ++i) {
        const double e = d == 1 ? cfg.cond_exp_min
                                : cfg.cond_exp_min + (cfg.cond_exp_max - cfg.cond_exp_min) *
                                                         static_cast<double>(i) /
                                                         static_cast<double>(d - 1);
        lam[i] = std::pow(10.0, e);
      }
      const SpdMatrix precision = SpdMatrix::from_eig(u, lam);
      Rng mrng = root.fork(kTargetMeanTag);
      Eigen::VectorXd a(d);
      for (int i = 0; i < d; ++i) a[i] = mrng.uniform();
      ExperimentSetup setup{quadratic_potential(a, precision),
                            isotropic(d, cfg.sigma0_scale),
                            quadratic_target(a, precision),
                            std::nullopt,
                            std::nullopt,
                            Estimate{},
                            LogisticData{},
                            Eigen::VectorXd()};
      Rng frng = root.fork(kLaplaceFTag);
      setup.f_target = objective(setup.pot, *setup.target, MomentMode::exact, 0, frng);
      return setup;
    }
    case ExperimentKind::logistic_regression: {
      LogisticData data;
      Eigen::VectorXd theta;
      if (!cfg.dataset.empty()) {
        data = read_logistic_dataset(cfg.dataset);
        if (data.x.cols() != cfg.d) {
          throw ConfigError("dataset dimension does not match d", 0, "dataset");
        }
      } else {
        Rng trng = root.fork(kThetaTag);
        theta = cfg.theta_scale * trng.normal_vector(cfg.d);
        Rng drng = root.fork(kDataTag);
        data = generate_logistic_data(theta, cfg.n, drng);
      }
      ExperimentSetup setup{logistic_potential(data.x, data.y),
                            isotropic(cfg.d, cfg.sigma0_scale),
                            std::nullopt,
                            std::nullopt,
                            std::nullopt,
                            Estimate{},
                            std::move(data),
                            std::move(theta)};
      setup.laplace = laplace_approximation(setup.pot, Eigen::VectorXd::Zero(cfg.d),
                                            200, 1e-10);
      Rng frng = root.fork(kLaplaceFTag);
      const long n_mc = std::max<long>(cfg.objective_samples, 100000);
      setup.laplace_f = objective_estimate(setup.pot, *setup.laplace,
                                           MomentMode::monte_carlo, n_mc, frng);
      return setup;
    }
    case ExperimentKind::double_well: {
      return ExperimentSetup{double_well_potential(cfg.d, cfg.scale),
                             isotropic(cfg.d, cfg.sigma0_scale),
                             std::nullopt,
                             std::nullopt,
                             std::nullopt,
                             Estimate{},
                             LogisticData{},
                             Eigen::VectorXd()};
    }
  }
  throw Error("build_experiment: unreachable");
}

std::string resolve_output_dir(const std::string& configured) {
  const char* root = std::getenv("GVI_OUTPUT_ROOT");
  if (root && *root) {
    return (std::filesystem::path(root) / configured).string();
  }
  return configured;
}

std::optional<long> detect_divergence(const RunResult& result) {
  std::optional<long> found;
  if (result.divergence) found = result.divergence->step;
  double kl0 = 1.0;
  if (!result.trace.empty() && result.trace.front().kl_to_target) {
    kl0 = std::max(1.0, *result.trace.front().kl_to_target);
  }
  for (const auto& row : result.trace) {
    bool bad = !std::isfinite(row.lambda_max) || row.lambda_max > 1e12 ||
               !std::isfinite(row.f_gap_or_estimate);
    if (row.kl_to_target) {
      bad = bad || !std::isfinite(*row.kl_to_target) || *row.kl_to_target > 100.0 * kl0;
    }
    if (bad) {
      if (!found || row.k < *found) found = row.k;
      break;
    }
  }
  return found;
}

std::vector<CombinationResult> execute_combinations(const ExperimentConfig& cfg,
                                                    const ExperimentSetup& setup,
                                                    const std::string& out_dir) {
  TraceOptions topts;
  topts.record_every = cfg.record_every;
  topts.target = setup.target;
  topts.f_target = setup.f_target;
  topts.diag_moment_mode = setup.pot.exact_moments ? MomentMode::exact
                                                   : MomentMode::monte_carlo;
  topts.diag_samples = cfg.diag_samples;
  topts.objective_samples = cfg.objective_samples;
  topts.timing = cfg.timing;

  std::vector<CombinationResult> combos;
  for (int e = 0; e < static_cast<int>(cfg.eta.size()); ++e) {
    for (int r = 0; r < cfg.replicas; ++r) {
      CombinationResult c;
      c.eta_index = e;
      c.replica = r;
      c.eta = cfg.eta[e];
      c.stream_seed = derive_seed(cfg.seed, kComboTag + 1000003ull * static_cast<std::uint64_t>(e) +
                                                static_cast<std::uint64_t>(r));
      c.trace_path = (std::filesystem::path(out_dir) /
                      ("trace_eta" + std::to_string(e) + "_rep" + std::to_string(r) + ".csv"))
                         .string();
      combos.push_back(std::move(c));
    }
  }

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<std::size_t>(threads, combos.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= combos.size() || failed.load()) return;
      auto& combo = combos[i];
      StepConfig scfg;
      scfg.eta = combo.eta;
      scfg.variant = cfg.variant;
      scfg.moment_mode = setup.pot.exact_moments ? cfg.moment_mode
                                                 : MomentMode::monte_carlo;
      scfg.n_samples = cfg.moment_batch;
      scfg.seed = combo.stream_seed;
      try {
        combo.result = run(setup.pot, setup.p0, scfg, cfg.iters, topts);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = ex.what();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) throw Error("execute_combinations: " + first_error);
  return combos;
}

void write_trace_csv(std::ostream& os, const ExperimentConfig& cfg,
                     const CombinationResult& combo,
                     const std::optional<Estimate>& laplace_f) {
  os << "# gvi trace v1\n";
  std::istringstream rendered(render_config(cfg));
  std::string line;
  while (std::getline(rendered, line)) os << "# " << line << '\n';
  os << "# run_eta = " << g17(combo.eta) << '\n';
  os << "# run_eta_index = " << combo.eta_index << '\n';
  os << "# run_replica = " << combo.replica << '\n';
  os << "# run_stream_seed = " << combo.stream_seed << '\n';
  if (laplace_f && std::isfinite(laplace_f->value)) {
    os << "# laplace_f = " << g17(laplace_f->value) << '\n';
    os << "# laplace_f_se = " << g17(laplace_f->std_error) << '\n';
  }
  if (combo.result.divergence) {
    const auto& d = *combo.result.divergence;
    os << "# aborted_at_step = " << d.step << '\n';
    os << "# aborted_lambda_min = " << g17(d.lambda_min) << '\n';
    os << "# aborted_reason = " << d.what << '\n';
  }
  os << "k,kl,f,w2sq,gradnormsq,sigmasq,lmin,lmax,wall_ns\n";
  for (const auto& r : combo.result.trace) {
    os << r.k << ',' << opt17(r.kl_to_target) << ',' << g17(r.f_gap_or_estimate) << ','
       << opt17(r.w2_sq_to_target) << ',' << g17(r.grad_norm_sq) << ','
       << opt17(r.sigma_sq_hat) << ',' << g17(r.lambda_min) << ',' << g17(r.lambda_max)
       << ',' << (r.wall_time_ns ? std::to_string(*r.wall_time_ns) : std::string())
       << '\n';
  }
}

namespace {

int run_and_write(const ExperimentConfig& cfg, std::ostream& log,
                  std::vector<CombinationResult>* combos_out) {
  const std::string out_dir = resolve_output_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);
  ExperimentSetup setup = build_experiment(cfg);

  std::vector<CombinationResult> combos = execute_combinations(cfg, setup, out_dir);
  std::optional<Estimate> laplace_f;
  if (cfg.experiment == ExperimentKind::logistic_regression) laplace_f = setup.laplace_f;

  bool numerical_abort = false;
  for (const auto& combo : combos) {
    std::ofstream os(combo.trace_path, std::ios::binary);
    if (!os) throw Error("cannot open trace file for writing: " + combo.trace_path);
    write_trace_csv(os, cfg, combo, laplace_f);
    if (combo.result.divergence) {
      const auto& d = *combo.result.divergence;
      if (d.numerical) numerical_abort = true;
      log << "eta " << g17(combo.eta) << " replica " << combo.replica
          << (d.numerical ? " aborted: " : " instability recorded: ") << d.what << '\n';
    }
  }
  log << "wrote " << combos.size() << " trace file(s) to " << out_dir << '\n';
  if (combos_out) *combos_out = std::move(combos);
  return numerical_abort ? 3 : 0;
}

}  // namespace

int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  return run_and_write(cfg, log, nullptr);
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  std::vector<CombinationResult> combos;
  const int code = run_and_write(cfg, log, &combos);

  // Per-eta summary, replica-averaged, sorted ascending.
  std::map<double, std::vector<const CombinationResult*>> by_eta;
  for (const auto& c : combos) by_eta[c.eta].push_back(&c);

  const std::string out_dir = resolve_output_dir(cfg.output_dir);
  const std::string summary_path =
      (std::filesystem::path(out_dir) / "summary.csv").string();
  std::ofstream os(summary_path, std::ios::binary);
  if (!os) throw Error("cannot open summary file for writing: " + summary_path);
  os << "# gvi sweep v1\n";
  std::istringstream rendered(render_config(cfg));
  std::string line;
  while (std::getline(rendered, line)) os << "# " << line << '\n';
  os << "eta,final_kl,final_f,min_gradnormsq,divergence_step\n";
  for (const auto& [eta, group] : by_eta) {
    double kl_sum = 0.0;
    bool kl_present = true;
    double f_sum = 0.0;
    double min_gns = std::numeric_limits<double>::infinity();
    std::optional<long> div_step;
    for (const auto* c : group) {
      const auto& trace = c->result.trace;
      const auto& last = trace.back();
      if (last.kl_to_target) kl_sum += *last.kl_to_target; else kl_present = false;
      f_sum += last.f_gap_or_estimate;
      for (const auto& r : trace) min_gns = std::min(min_gns, r.grad_norm_sq);
      const auto d = detect_divergence(c->result);
      if (d && (!div_step || *d < *div_step)) div_step = d;
    }
    const double denom = static_cast<double>(group.size());
    os << g17(eta) << ',' << (kl_present ? g17(kl_sum / denom) : std::string()) << ','
       << g17(f_sum / denom) << ',' << g17(min_gns) << ','
       << (div_step ? std::to_string(*div_step) : std::string()) << '\n';
  }
  log << "wrote sweep summary to " << summary_path << '\n';
  return code;
}

int cmd_datagen(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.experiment != ExperimentKind::logistic_regression) {
    throw ConfigError("datagen requires experiment = logistic_regression", 0, "experiment");
  }
  if (cfg.n < 1) throw ConfigError("datagen needs n >= 1", 0, "n");
  Rng root(cfg.seed);
  Rng trng = root.fork(kThetaTag);
  const Eigen::VectorXd theta = cfg.theta_scale * trng.normal_vector(cfg.d);
  Rng drng = root.fork(kDataTag);
  const LogisticData data = generate_logistic_data(theta, cfg.n, drng);

  const std::string out_dir = resolve_output_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);
  const std::string path = (std::filesystem::path(out_dir) / "dataset.csv").string();
  DatasetMeta meta{cfg.seed, cfg.n, cfg.d, theta};
  write_logistic_dataset(path, data, meta);
  log << "wrote " << cfg.n << " rows to " << path << '\n';
  return 0;
}

}  // namespace gvi
