#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "specprec/dataset.hpp"
#include "specprec/kernel.hpp"
#include "specprec/solvers.hpp"
#include "specprec/verify.hpp"

// JSON for configs and reports, CSV for traces and tables. Doubles are written in shortest
// round-trip form; NaN becomes null and reads back as NaN.

namespace specprec {

std::string to_json(const KernelSpec& kernel);
std::string to_json(const SyntheticDistribution& dist);
std::string to_json(const SolverConfig& config);
std::string to_json(const TrialConfig& config);

/// Parsers overlay the fields present in `text` onto `base`. Unknown fields and type
/// mismatches throw ConfigError with a dotted path rooted at `path`.
KernelSpec kernel_from_json(std::string_view text, KernelSpec base = {}, std::string_view path = "kernel");
SyntheticDistribution distribution_from_json(std::string_view text, SyntheticDistribution base = {},
                                             std::string_view path = "distribution");
SolverConfig solver_config_from_json(std::string_view text, SolverConfig base = {},
                                     std::string_view path = "solver");
TrialConfig trial_config_from_json(std::string_view text, TrialConfig base = {}, std::string_view path = "verify");

std::string to_json(const RunReport& report, bool include_history = true);
std::string to_json(const SuiteResult& result);

/// t,hk_error,loss,elapsed_ms
std::string history_csv(const RunReport& report);
/// One row per (suite, property).
std::string suite_summary_csv(const std::vector<SuiteResult>& results);
/// Columns whose name ends in "_ms" are dropped unless `include_timing`.
std::string table_csv(const Table& table, bool include_timing = true);

/// Shortest decimal string that parses back to the same double ("nan", "inf" for non-finite).
std::string format_double(double value);

}  // namespace specprec
