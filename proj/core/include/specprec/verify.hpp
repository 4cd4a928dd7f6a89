#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specprec/dataset.hpp"
#include "specprec/kernel.hpp"
#include "specprec/types.hpp"

namespace specprec {

/// Two-sided Clopper-Pearson interval for a binomial success fraction.
struct SuccessFraction {
  Index successes = 0;
  Index trials = 0;
  double target = 0.0;
  double lower = 0.0;
  double upper = 1.0;

  double value() const noexcept { return trials > 0 ? double(successes) / double(trials) : 0.0; }
  /// False only when the whole interval lies below the target.
  bool consistent() const noexcept { return upper >= target; }
};

SuccessFraction success_fraction(Index successes, Index trials, double target, double confidence = 0.95);

struct PropertyResult {
  std::string name;
  /// Gating properties are theorems: one violation fails the run.
  bool gating = true;
  bool passed = true;
  Index checked = 0;
  Index violations = 0;
  /// Largest observed value of the checked quantity (meaning depends on the property).
  double worst = 0.0;
  std::optional<SuccessFraction> fraction;
  std::string detail;
};

/// Labelled numeric table: curves, per-size rows and the like.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct SuiteResult {
  std::string name;
  std::vector<PropertyResult> properties;
  std::vector<std::pair<std::string, double>> measurements;
  std::vector<Table> tables;
  std::vector<std::string> notes;
  double elapsed_ms = 0.0;

  /// Every property passed.
  bool passed() const;
  /// Every gating property passed.
  bool gating_passed() const;

  void measure(std::string name, double value) { measurements.emplace_back(std::move(name), value); }
  double measurement(std::string_view name) const;
  const PropertyResult* property(std::string_view name) const;
};

struct TrialConfig {
  std::uint64_t seed = 0;
  Index n = 300;
  std::vector<Index> s_grid;
  /// Sizes for the concentration and speed-up experiments.
  std::vector<Index> n_grid;
  Index q = 10;
  double eps = 0.5;
  double delta = 0.1;
  double tau = 1e-4;
  SyntheticDistribution distribution = default_distribution();
  KernelSpec kernel = KernelSpec::gaussian(0.5);
  Index trials = 100;
  /// Population proxy size; 0 means 10 x the largest n consumed.
  Index proxy_size = 0;
  /// Universal constants C tried in c2 = 2^16 C^4.
  std::vector<double> universal_c = {0.25, 1.0, 4.0};
  /// Dimension of the random matrices in operator-only suites.
  Index matrix_dim = 20;
  unsigned jobs = 1;

  static SyntheticDistribution default_distribution();
  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

/// Defaults for a named suite; suite_names() lists the accepted names.
TrialConfig default_trial_config(std::string_view suite);
const std::vector<std::string>& suite_names();
/// Suites whose gating properties are theorems (failures mean a bug).
bool is_deterministic_suite(std::string_view suite);
SuiteResult run_suite(std::string_view suite, const TrialConfig& config);

/// Top-q eigenpairs of K from the Gram: residuals |K psi - lambda psi|_H relative to lambda_1
/// and H_K-orthonormality, both at 1e-8.
SuiteResult check_eigenfunction(const GramMatrix& gram, Index q);
/// Same over `trials` random point sets of size <= n.
SuiteResult check_eigenfunction(const TrialConfig& config);

/// |sqrt(A) - sqrt(B)| <= sqrt(|A - B|) for covariance / subsample pairs and random PSD pairs.
SuiteResult check_sqrt_perturbation(const TrialConfig& config);
/// Ratio bounds for |Af| / |Bf| from |A - B| and the smallest singular value.
SuiteResult check_ratio_lemma(const TrialConfig& config);
/// The four multiplicative-closeness constants coincide in the supremum.
SuiteResult check_equivalences(const TrialConfig& config);
/// Thresholded inverses: multiplicative closeness from the additive gap of the inverses.
SuiteResult check_additive_to_multiplicative(const TrialConfig& config);
/// Constant-free Hilbert-Schmidt form of the preconditioner closeness bound.
SuiteResult check_appendix_hs_bound(const TrialConfig& config);
/// kappa(sqrt(P') K sqrt(P')) <= (1 + gamma)^4 kappa(P K) with the tightest gamma.
SuiteResult check_ratio_to_condition(const TrialConfig& config);
/// h_0(S) = (S + |S|)/2 and h_a(A) = h_0(A - aI) + aI.
SuiteResult check_h_identities(const TrialConfig& config);
/// lambda*_q / 2 <= lambda_q, lambda'_q <= 3 lambda*_q / 2 once n, s >= 32 C_Kq^2 log(4/delta).
SuiteResult check_eigenvalue_sandwich(const TrialConfig& config);

/// |K_X - K_Z|_op for the empirical covariance operators of two point sets, evaluated in an
/// orthonormal basis of their joint span.
double covariance_deviation(const KernelSpec& kernel, const PointSet& x, const PointSet& z);

/// Deviation of K_n from a large proxy over n_grid: bound satisfaction and the n^{-1/2} rate.
SuiteResult concentration_experiment(const TrialConfig& config);
/// Preconditioner condition numbers against the Nystrom sample size, at s* and over s_grid.
SuiteResult theorem1_experiment(const TrialConfig& config);
/// Measured GD / PGD / nPGD iteration ratios, storage and setup costs over n_grid.
SuiteResult speedup_table(const TrialConfig& config);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs fn(0..count-1) on `jobs` threads and returns the results in index order.
template <typename T>
std::vector<T> run_trials(Index count, unsigned jobs, const std::function<T(Index)>& fn);

}  // namespace specprec

#include "specprec/detail/run_trials.hpp"
