#pragma once

#include "selcrb/experiments/sweep.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

/// Cross-check suites shared by `selcrb selftest` and the acceptance binary.
/// Every check compares library output against an oracle computed here
/// (Boost special functions, finite differences, brute force, closed forms).
namespace selcrb::checks {

struct CheckContext {
  unsigned threads = 1;
  std::filesystem::path data_dir; // holds dict_7x14.csv
  std::ostream* log = nullptr;    // per-point diagnostics, optional
};

struct CheckResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<std::string> notes; // one line per sub-check or failure reason
  double seconds = 0.0;
};

struct CheckInfo {
  int id;
  const char* title;
  std::function<CheckResult(const CheckContext&)> run;
  bool quick; // part of selftest
};

const std::vector<CheckInfo>& registry();

/// Runs one check, turning an escaped exception into a failed result.
CheckResult run_check(const CheckInfo& info, const CheckContext& ctx);

// Scenario configurations, also shipped as JSON under configs/.
experiments::ExperimentConfig glm_snr_config();          // N = 1500, theta = [4, -3], AIC
experiments::ExperimentConfig dictionary_snr_config(const Matrix& dictionary); // 7 x 14, c = 0.95
experiments::ExperimentConfig identity_threshold_config(int scenario);         // A = I, M = 8

Matrix load_dictionary(const CheckContext& ctx);

} // namespace selcrb::checks
