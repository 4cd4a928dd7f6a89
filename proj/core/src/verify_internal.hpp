#pragma once

#include <algorithm>
#include <chrono>
#include <span>
#include <string>

#include "specprec/operators.hpp"
#include "specprec/random.hpp"
#include "specprec/verify.hpp"

namespace specprec::detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Counts checks and violations of one property across trials.
struct Tally {
  Index checked = 0;
  Index violations = 0;
  double worst = 0.0;
  std::string first_failure;

  void check(bool ok, double value, const std::string& what) {
    ++checked;
    worst = std::max(worst, value);
    if (!ok) {
      if (violations == 0) first_failure = what;
      ++violations;
    }
  }
  void merge(const Tally& other) {
    checked += other.checked;
    worst = std::max(worst, other.worst);
    if (violations == 0 && other.violations > 0) first_failure = other.first_failure;
    violations += other.violations;
  }
};

PropertyResult gating_property(std::string name, const Tally& tally, std::string detail);
PropertyResult reported_property(std::string name, const Tally& tally, std::string detail);
PropertyResult fraction_property(std::string name, Index successes, Index trials, double target, std::string detail);

/// Random symmetric A with |eigenvalues| log-uniform in [1e-3, 1]; random signs if `indefinite`.
Matrix random_invertible_symmetric(Index m, bool indefinite, Rng& rng);
/// Random symmetric E with operator norm 1.
Matrix random_unit_symmetric(Index m, Rng& rng);
/// PSD of rank `rank` with log-uniform spectrum in [1e-3, 1].
Matrix random_psd(Index m, Index rank, Rng& rng);
/// Positive part of a symmetric matrix.
Matrix positive_part(const Matrix& a);
/// Unit gaussian directions, one per column.
Matrix random_directions(Index m, Index count, Rng& rng);
/// Numerical rank: eigenvalues above 1e-12 of the largest.
Index psd_rank(const Vector& eigenvalues);

/// c2 = max(|A B^-1|, |B A^-1|) for symmetric invertible A, B, given the inverses.
double multiplicative_gap(const Matrix& a, const Matrix& a_inv, const Matrix& b, const Matrix& b_inv);

/// Per-trial kernel problem in the eigen-coordinates of its Gram.
struct KernelTrial {
  PointSet points;
  GramMatrix gram;
  OrthoBasis basis;
  OrthoMatrix covariance;
};

KernelTrial kernel_trial(const TrialConfig& config, Index n, std::uint64_t stream);

/// Covariance operator of the subsample `indices` in the trial's basis.
OrthoMatrix subsample_covariance(const KernelTrial& trial, std::span<const Index> indices);

}  // namespace specprec::detail
