#pragma once

#include <cstdint>
#include <string>

#include "gvi/potentials.hpp"

namespace gvi {

struct DatasetMeta {
  std::uint64_t seed = 0;
  long n = 0;
  int d = 0;
  Eigen::VectorXd theta_true;
};

// CSV with header x_1,...,x_d,y (UTF-8, LF, '.' decimal separator, 17
// significant digits), plus a JSON sidecar <path>.meta.json recording the
// generation parameters.
void write_logistic_dataset(const std::string& path, const LogisticData& data,
                            const DatasetMeta& meta);

LogisticData read_logistic_dataset(const std::string& path);
DatasetMeta read_dataset_meta(const std::string& path);  // path of the CSV

}  // namespace gvi
