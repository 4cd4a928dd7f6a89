#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "specprec/kernel.hpp"
#include "specprec/types.hpp"

namespace specprec {

struct Provenance {
  enum class Kind { file, synthetic };
  Kind kind = Kind::synthetic;
  std::string source;  // file path, or a description of the synthetic generator
  std::uint64_t seed = 0;
};

/// Training sample: n distinct points in R^d with real targets.
class Dataset {
 public:
  /// Validates shapes (n >= 1, d >= 1, one target per point) and that all points are
  /// pairwise distinct. Throws InputError listing the first duplicate pair otherwise.
  Dataset(PointSet points, Vector targets, Provenance provenance);

  const PointSet& points() const noexcept { return points_; }
  const Vector& targets() const noexcept { return targets_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }

 private:
  PointSet points_;
  Vector targets_;
  Provenance provenance_;
};

enum class DistributionKind { uniform_hypercube, isotropic_gaussian, gaussian_mixture };

std::string_view to_string(DistributionKind kind);
DistributionKind distribution_kind_from_string(std::string_view name);

/// A sampling distribution rho on R^d. Sampling is a pure function of (seed, stream).
struct SyntheticDistribution {
  DistributionKind kind = DistributionKind::uniform_hypercube;
  Index dim = 1;
  std::uint64_t seed = 0;
  // uniform_hypercube: [low, high]^d
  double low = 0.0;
  double high = 1.0;
  // isotropic_gaussian / gaussian_mixture
  double stddev = 1.0;
  // gaussian_mixture: component means drawn N(0, spread^2 I) from `seed`
  Index components = 3;
  double spread = 3.0;

  void validate() const;

  /// n fresh points. Different streams give independent samples from the same rho.
  PointSet sample(Index n, std::uint64_t stream = 0) const;

  friend bool operator==(const SyntheticDistribution&, const SyntheticDistribution&) = default;
};

enum class TargetRule { random_rkhs_function, linear, noisy_sin };

std::string_view to_string(TargetRule rule);
TargetRule target_rule_from_string(std::string_view name);

struct GenerateOptions {
  TargetRule rule = TargetRule::random_rkhs_function;
  /// Used by random_rkhs_function: targets are f(x) = sum_j c_j K(a_j, x).
  KernelSpec kernel;
  Index anchors = 20;
  double noise = 0.1;  // noisy_sin only
};

Dataset generate(const SyntheticDistribution& dist, Index n, const GenerateOptions& options = {});

/// CSV: header row, feature columns, then a final column named "target".
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace specprec
