#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "specprec/dataset.hpp"
#include "specprec/kernel.hpp"
#include "specprec/solvers.hpp"
#include "specprec/verify.hpp"

namespace specprec::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsage = 2, kNumerical = 3 };

/// Where the training data comes from: a CSV file or a synthetic generator.
struct DatasetSource {
  /// Non-empty selects the CSV file; the synthetic fields are then unused.
  std::string csv;
  SyntheticDistribution distribution = TrialConfig::default_distribution();
  Index n = 200;
  TargetRule rule = TargetRule::random_rkhs_function;
  Index anchors = 20;
  double noise = 0.1;

  friend bool operator==(const DatasetSource&, const DatasetSource&) = default;
};

/// Inputs for deriving s when the solver config leaves it at 0.
struct PrecondParams {
  double eps = 0.5;
  double delta = 0.1;
  double universal_c = 1.0;
  /// Population proxy size for C_Kq; 0 means 10 n.
  Index proxy_size = 0;

  friend bool operator==(const PrecondParams&, const PrecondParams&) = default;
};

struct ExperimentConfig {
  DatasetSource dataset;
  KernelSpec kernel = KernelSpec::gaussian(0.5);
  SolverConfig solver;
  PrecondParams precond;
  std::vector<std::string> suites;
  /// Canonical (compact) JSON object overlaid on each suite's default trial config.
  std::string verify_overrides = "{}";
  std::string output_dir;
  /// Master seed: mixed into the dataset, Nystrom sample and verification seeds.
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  /// Throws ConfigError naming the offending field. Checks that the CSV exists and that the
  /// output directory's parent exists.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string to_json(const ExperimentConfig& config);
/// Overlays the fields present in `text` onto `base`.
ExperimentConfig experiment_from_json(std::string_view text, ExperimentConfig base = {});

/// Parses argv and runs one subcommand; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace specprec::cli
