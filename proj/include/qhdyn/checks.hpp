#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qhdyn/io.hpp"

namespace qhdyn {

inline constexpr std::uint64_t kDefaultSeed = 20250611;

struct CheckOptions {
  bool full = false;  // full-size criteria; quick shrinks grids and sample counts
  std::uint64_t seed = kDefaultSeed;
  bool principal_branch = false;  // mutation: principal roots in state propagation
  std::vector<int> only;          // criterion ids to run; empty runs all
};

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double value = 0.0;      // worst observed error
  double tolerance = 0.0;
  double seconds = 0.0;
  double budget = 0.0;     // runtime budget in seconds (full level)
  std::string detail;
};

struct CheckInfo {
  int id;
  std::string name;
  std::string summary;
  double budget;
};

const std::vector<CheckInfo>& check_registry();

// Runs the selected criteria in id order. A criterion that throws is
// reported as a failure with the exception text. At the full level a
// criterion also fails when it exceeds its runtime budget.
std::vector<CheckResult> run_checks(const CheckOptions& opt,
                                    const std::function<void(const CheckResult&)>& progress = {});

// Excludes timing so that manifests stay byte-reproducible.
json to_json(const CheckResult& r);

}  // namespace qhdyn
