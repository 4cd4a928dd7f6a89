#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "specprec/dataset.hpp"
#include "specprec/kernel.hpp"
#include "specprec/operators.hpp"
#include "specprec/precond.hpp"
#include "specprec/types.hpp"

namespace specprec {

enum class Method { gd, pgd, npgd };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

enum class StepPolicy {
  /// 1 / (top eigenvalue of the operator that governs convergence).
  inverse_top_eigenvalue,
  /// 1 / kappa of the governing operator, the literal textbook reading.
  inverse_condition,
  explicit_value,
};

std::string_view to_string(StepPolicy policy);
StepPolicy step_policy_from_string(std::string_view name);

struct SolverConfig {
  Method method = Method::gd;
  Index q = 1;
  /// Nystrom subsample; s = 0 means "derive from sample_size" (resolved by the caller).
  Index s = 0;
  SamplingPolicy sampling = SamplingPolicy::uniform;
  std::uint64_t sample_seed = 0;
  StepPolicy step_policy = StepPolicy::inverse_top_eigenvalue;
  double step = 0.0;
  Index max_iterations = 100000;
  /// Stop once |f^t - f*|^2 <= tau |f^0 - f*|^2.
  double tau = 1e-4;
  Index record_every = 1;
  double power_tol = 1e-6;
  Index power_max_iterations = 500;
  /// Compute the governing condition number and the iteration bound (dense, O(n^3)).
  bool predict = true;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct HistoryRow {
  Index t = 0;
  double hk_error = 0.0;
  double loss = 0.0;
  double elapsed_ms = 0.0;
};

struct TrainState {
  Vector alpha;
  Index iteration = 0;
  std::vector<HistoryRow> history;
};

struct RunReport {
  Method method = Method::gd;
  TrainState state;
  bool converged = false;
  /// Iterations to reach tau (or the iteration cap when not converged).
  Index iterations = 0;
  double step = 0.0;
  std::string step_source;
  double initial_error = 0.0;
  double final_error = 0.0;
  /// Condition number of the governing operator and kappa ln(1/tau); NaN unless predicted.
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double predicted_iterations = std::numeric_limits<double>::quiet_NaN();
  double setup_ms = 0.0;
  double loop_ms = 0.0;
  double per_iteration_ms = 0.0;
};

/// Training problem with its interpolation oracle. Keeps references to `data` and `gram`.
struct Problem {
  const Dataset& data;
  const GramMatrix& gram;
  Vector alpha_star;
  Vector gram_alpha_star;
  /// |f*|^2 in H_K: alpha*^T G alpha*.
  double star_norm_sq = 0.0;
};

Problem make_problem(const Dataset& data, const GramMatrix& gram);

/// Coefficients of the square-loss gradient K f - b: (1/n)(G alpha - y).
Vector gradient(const Matrix& gram, const Vector& alpha, const Vector& targets);

/// L(f) = (1/2n) |G alpha - y|^2.
double training_loss(const Matrix& gram, const Vector& alpha, const Vector& targets);

/// sqrt((alpha - alpha*)^T G (alpha - alpha*)). Throws GramIntegrityError when the
/// quadratic form is below -1e-10.
double hk_error(const Vector& alpha, const Vector& alpha_star, const Matrix& gram);

double iteration_bound(double kappa, double tau);

RunReport run_gd(const SolverConfig& config, const Problem& problem);
RunReport run_pgd(const SolverConfig& config, const Problem& problem, const SpectralPreconditioner& p);
RunReport run_npgd(const SolverConfig& config, const Problem& problem, const SpectralPreconditioner& p,
                   const Matrix& cross_gram);

RunReport run_gd(const SolverConfig& config, const Dataset& data, const GramMatrix& gram);
RunReport run_pgd(const SolverConfig& config, const Dataset& data, const GramMatrix& gram,
                  const SpectralPreconditioner& p);
RunReport run_npgd(const SolverConfig& config, const Dataset& data, const GramMatrix& gram,
                   const SpectralPreconditioner& p, const Matrix& cross_gram);

struct PowerEstimate {
  double value = 0.0;
  Index iterations = 0;
};

/// Largest eigenvalue of sqrt(P) K sqrt(P) by power iteration with the H_K Rayleigh quotient.
/// Throws EstimationError without convergence.
PowerEstimate estimate_top_eigenvalue(const Matrix& gram, const SpectralPreconditioner& p, const Matrix& cross_gram,
                                      double tol = 1e-6, Index max_iterations = 500);

/// sqrt(P) K sqrt(P) (or K when p is null) in the orthonormal basis. The basis must cover
/// the training points in order.
OrthoMatrix governing_operator(const OrthoBasis& basis, const SpectralPreconditioner* p = nullptr);

/// Eigenvalues of the governing operator, non-increasing.
Vector governing_spectrum(const OrthoBasis& basis, const SpectralPreconditioner* p = nullptr);

struct SpeedupPrediction {
  double kappa1 = 0.0;
  double kappa_q = 0.0;
  double kappa_sq = 0.0;
  /// kappa1 / (kappa_q + q/n)
  double pgd = 0.0;
  /// kappa1 / (kappa_sq + s/n + sq/n^2)
  double npgd = 0.0;
  /// lambda_1 / lambda_q
  double eigen_ratio = 0.0;
};

/// From a non-increasing spectrum of K (or a proxy). kappa_sq defaults to kappa_q.
SpeedupPrediction predict_speedups(const Vector& spectrum, Index q, Index s, Index n,
                                   double kappa_sq = std::numeric_limits<double>::quiet_NaN());

}  // namespace specprec
