#include "gvi/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace gvi {

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::gaussian_target: return "gaussian_target";
    case ExperimentKind::logistic_regression: return "logistic_regression";
    case ExperimentKind::double_well: return "double_well";
  }
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& s) {
  if (s == "gaussian_target") return ExperimentKind::gaussian_target;
  if (s == "logistic_regression") return ExperimentKind::logistic_regression;
  if (s == "double_well") return ExperimentKind::double_well;
  throw ConfigError("unknown experiment '" + s + "'", 0, "experiment");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RawEntry {
  std::string value;
  int line;
};

double parse_double(const RawEntry& e, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number '" + e.value + "' for " + key, e.line, key);
  }
}

long parse_long(const RawEntry& e, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer '" + e.value + "' for " + key, e.line, key);
  }
}

std::uint64_t parse_u64(const RawEntry& e, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid seed '" + e.value + "' for " + key, e.line, key);
  }
}

bool parse_bool(const RawEntry& e, const std::string& key) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError("invalid boolean '" + e.value + "' for " + key, e.line, key);
}

std::vector<double> parse_double_list(const RawEntry& e, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) throw ConfigError("empty entry in list for " + key, e.line, key);
    out.push_back(parse_double(RawEntry{cell, e.line}, key));
  }
  if (out.empty()) throw ConfigError("empty list for " + key, e.line, key);
  return out;
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  std::map<std::string, RawEntry> kv;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value", line_no, line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", line_no, "");
    if (value.empty()) throw ConfigError("missing value for " + key, line_no, key);
    if (kv.count(key)) throw ConfigError("duplicate key " + key, line_no, key);
    kv[key] = RawEntry{value, line_no};
  }

  ExperimentConfig cfg;
  auto take = [&kv](const std::string& key) -> std::optional<RawEntry> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    RawEntry e = it->second;
    kv.erase(it);
    return e;
  };
  auto require = [&take](const std::string& key) -> RawEntry {
    auto e = take(key);
    if (!e) throw ConfigError("missing required key " + key, 0, key);
    return *e;
  };

  cfg.experiment = experiment_from_string(require("experiment").value);
  cfg.d = static_cast<int>(parse_long(require("d"), "d"));
  cfg.variant = variant_from_string(require("variant").value);
  cfg.eta = parse_double_list(require("eta"), "eta");
  cfg.iters = parse_long(require("N"), "N");
  cfg.seed = parse_u64(require("seed"), "seed");
  cfg.output_dir = require("output_dir").value;

  if (auto e = take("replicas")) cfg.replicas = static_cast<int>(parse_long(*e, "replicas"));
  if (auto e = take("moment_mode")) cfg.moment_mode = moment_mode_from_string(e->value);
  if (auto e = take("moment_batch")) cfg.moment_batch = parse_long(*e, "moment_batch");
  if (auto e = take("cond_exp_min")) cfg.cond_exp_min = parse_double(*e, "cond_exp_min");
  if (auto e = take("cond_exp_max")) cfg.cond_exp_max = parse_double(*e, "cond_exp_max");
  if (auto e = take("n")) cfg.n = parse_long(*e, "n");
  if (auto e = take("theta_scale")) cfg.theta_scale = parse_double(*e, "theta_scale");
  if (auto e = take("dataset")) cfg.dataset = e->value;
  if (auto e = take("scale")) cfg.scale = parse_double(*e, "scale");
  if (auto e = take("record_every")) cfg.record_every = parse_long(*e, "record_every");
  if (auto e = take("objective_samples"))
    cfg.objective_samples = parse_long(*e, "objective_samples");
  if (auto e = take("diag_samples")) cfg.diag_samples = parse_long(*e, "diag_samples");
  if (auto e = take("sigma0_scale")) cfg.sigma0_scale = parse_double(*e, "sigma0_scale");
  if (auto e = take("threads")) cfg.threads = static_cast<int>(parse_long(*e, "threads"));
  if (auto e = take("timing")) cfg.timing = parse_bool(*e, "timing");

  if (!kv.empty()) {
    const auto& bad = *kv.begin();
    throw ConfigError("unknown key " + bad.first, bad.second.line, bad.first);
  }

  // Schema checks.
  if (cfg.d < 1) throw ConfigError("d must be >= 1", 0, "d");
  if (cfg.iters < 1) throw ConfigError("N must be >= 1", 0, "N");
  if (cfg.replicas < 1) throw ConfigError("replicas must be >= 1", 0, "replicas");
  if (cfg.record_every < 1) throw ConfigError("record_every must be >= 1", 0, "record_every");
  if (cfg.moment_batch < 1) throw ConfigError("moment_batch must be >= 1", 0, "moment_batch");
  for (double eta : cfg.eta) {
    if (!(eta > 0.0)) throw ConfigError("eta entries must be positive", 0, "eta");
  }
  if (!(cfg.sigma0_scale > 0.0)) throw ConfigError("sigma0_scale must be positive", 0, "sigma0_scale");
  if (cfg.experiment == ExperimentKind::logistic_regression) {
    if (cfg.n < 1 && cfg.dataset.empty()) {
      throw ConfigError("logistic_regression needs n >= 1 or a dataset path", 0, "n");
    }
  }
  if (cfg.experiment == ExperimentKind::double_well && !(cfg.scale > 0.0)) {
    throw ConfigError("double_well needs scale > 0", 0, "scale");
  }
  if (cfg.experiment == ExperimentKind::gaussian_target &&
      cfg.cond_exp_min > cfg.cond_exp_max) {
    throw ConfigError("cond_exp_min must be <= cond_exp_max", 0, "cond_exp_min");
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

// Only keys that determine the run's content appear here: execution knobs
// (threads, output_dir) are deliberately left out so reruns of the same
// experiment produce byte-identical files wherever and however they execute.
std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "experiment = " << to_string(cfg.experiment) << '\n';
  os << "d = " << cfg.d << '\n';
  os << "variant = " << to_string(cfg.variant) << '\n';
  os << "eta = ";
  for (std::size_t i = 0; i < cfg.eta.size(); ++i) {
    if (i) os << ',';
    os << g17(cfg.eta[i]);
  }
  os << '\n';
  os << "N = " << cfg.iters << '\n';
  os << "replicas = " << cfg.replicas << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "moment_mode = " << to_string(cfg.moment_mode) << '\n';
  os << "moment_batch = " << cfg.moment_batch << '\n';
  if (cfg.experiment == ExperimentKind::gaussian_target) {
    os << "cond_exp_min = " << g17(cfg.cond_exp_min) << '\n';
    os << "cond_exp_max = " << g17(cfg.cond_exp_max) << '\n';
  }
  if (cfg.experiment == ExperimentKind::logistic_regression) {
    os << "n = " << cfg.n << '\n';
    os << "theta_scale = " << g17(cfg.theta_scale) << '\n';
    if (!cfg.dataset.empty()) os << "dataset = " << cfg.dataset << '\n';
  }
  if (cfg.experiment == ExperimentKind::double_well) {
    os << "scale = " << g17(cfg.scale) << '\n';
  }
  os << "record_every = " << cfg.record_every << '\n';
  os << "objective_samples = " << cfg.objective_samples << '\n';
  os << "diag_samples = " << cfg.diag_samples << '\n';
  os << "sigma0_scale = " << g17(cfg.sigma0_scale) << '\n';
  os << "timing = " << (cfg.timing ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace gvi
