#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "specinv/field.hpp"
#include "specinv/grid.hpp"

namespace specinv::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInput = 2;

struct RunResult {
  int exit_code = kExitPass;
  nlohmann::json report;
};

/// Runs one command line (without the program name). Never throws; input
/// problems become exit code 2 with an "error" entry in the report.
RunResult run(const std::vector<std::string>& args);

/// "s1:<n>", "t2:<n>x<m>" or "point".
GridDomain parse_base(const std::string& spec);

struct FieldSpec {
  std::string base = "s1:128";
  std::string fiber;   // "<k>:<samples>[:<halfwidth>]", empty for a graph field
  std::string signs;   // "+,-" or "1,-1"; all positive by default
  std::string cutoff;  // "<inner>:<outer>", default 0.3h:0.45h
};

/// Samples an expression on the grid; with a fiber it is deformed into the
/// quadratic form outside the cutoff radius.
GFQIField build_field(const std::string& expr, const FieldSpec& spec);

struct TrialOutcome {
  bool pass = false;
  nlohmann::json detail;
};

/// Names accepted by `fuzz --check`.
const std::vector<std::string>& trial_checks();

/// One seeded random instance of a check.
TrialOutcome run_trial(const std::string& check, std::uint64_t seed);

}  // namespace specinv::cli
