// Acceptance suite runner: one pass/fail line per criterion, nonzero exit on
// any failure. `--suite fast` runs the scaled-down smoke version.

#include <cstring>
#include <iostream>
#include <string>

#include "gvi/check_suite.hpp"

int main(int argc, char** argv) {
  gvi::Suite suite = gvi::Suite::full;
  std::uint64_t seed = 20230605;
  std::string report = "acceptance_report.csv";
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--suite") == 0 && i + 1 < argc) {
      suite = gvi::suite_from_string(argv[++i]);
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      seed = std::stoull(argv[++i]);
    } else if (std::strcmp(argv[i], "--report") == 0 && i + 1 < argc) {
      report = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--suite fast|full] [--seed S] [--report path]\n";
      return 2;
    }
  }
  try {
    return gvi::cmd_check(suite, seed, std::cout, report);
  } catch (const std::exception& e) {
    std::cerr << "acceptance suite aborted: " << e.what() << '\n';
    return 3;
  }
}
