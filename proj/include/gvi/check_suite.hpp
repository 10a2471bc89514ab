#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "gvi/diagnostics.hpp"

namespace gvi {

enum class Suite { fast, full };

Suite suite_from_string(const std::string& s);

struct CriterionResult {
  int number = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
  std::vector<BoundCheck> checks;
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  double total_seconds = 0.0;
  bool all_pass() const;
};

// Runs the acceptance criteria (full) or their scaled-down smoke versions
// (fast), printing one pass/fail line per criterion to `log`. When
// report_path is non-empty every emitted bound check is serialized there.
SuiteResult run_acceptance_suite(Suite suite, std::uint64_t seed, std::ostream& log,
                                 const std::string& report_path);

// CLI entry: exit 0 iff every criterion passed.
int cmd_check(Suite suite, std::uint64_t seed, std::ostream& log,
              const std::string& report_path);

}  // namespace gvi
