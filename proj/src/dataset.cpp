#include "gvi/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gvi {

namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string meta_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

}  // namespace

void write_logistic_dataset(const std::string& path, const LogisticData& data,
                            const DatasetMeta& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open dataset file for writing: " + path);
  const long n = data.x.rows();
  const int d = static_cast<int>(data.x.cols());
  for (int j = 0; j < d; ++j) os << "x_" << (j + 1) << ',';
  os << "y\n";
  for (long i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) os << g17(data.x(i, j)) << ',';
    os << (data.y[i] == 1.0 ? '1' : '0') << '\n';
  }

  nlohmann::json j;
  j["seed"] = meta.seed;
  j["n"] = meta.n;
  j["d"] = meta.d;
  j["theta_true"] = std::vector<double>(meta.theta_true.data(),
                                        meta.theta_true.data() + meta.theta_true.size());
  std::ofstream ms(meta_path(path), std::ios::binary);
  if (!ms) throw Error("cannot open metadata sidecar for writing: " + meta_path(path));
  ms << j.dump(2) << '\n';
}

LogisticData read_logistic_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open dataset file: " + path);
  std::string header;
  if (!std::getline(is, header)) throw Error("empty dataset file: " + path);
  int d = 0;
  {
    std::stringstream hs(header);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(hs, col, ',')) cols.push_back(col);
    if (cols.empty() || cols.back() != "y") {
      throw Error("dataset header must end with column 'y'");
    }
    d = static_cast<int>(cols.size()) - 1;
    for (int j = 0; j < d; ++j) {
      if (cols[j] != "x_" + std::to_string(j + 1)) {
        throw Error("unexpected dataset column '" + cols[j] + "'");
      }
    }
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != d + 1) {
      throw Error("dataset row has wrong arity: " + line);
    }
    rows.push_back(std::move(row));
  }
  LogisticData data;
  data.x.resize(static_cast<long>(rows.size()), d);
  data.y.resize(static_cast<long>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) data.x(static_cast<long>(i), j) = rows[i][j];
    data.y[static_cast<long>(i)] = rows[i][d];
  }
  return data;
}

DatasetMeta read_dataset_meta(const std::string& path) {
  std::ifstream is(meta_path(path), std::ios::binary);
  if (!is) throw Error("cannot open metadata sidecar: " + meta_path(path));
  nlohmann::json j;
  is >> j;
  DatasetMeta meta;
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.n = j.at("n").get<long>();
  meta.d = j.at("d").get<int>();
  const auto theta = j.at("theta_true").get<std::vector<double>>();
  meta.theta_true = Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                      static_cast<long>(theta.size()));
  return meta;
}

}  // namespace gvi
