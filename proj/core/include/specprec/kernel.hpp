#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specprec/types.hpp"

namespace specprec {

enum class KernelFamily { gaussian, laplacian };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Translation-invariant kernel k(x - z) with k(0) = 1.
///
/// gaussian:  exp(-|x - z|_2^2 / (2 sigma^2))
/// laplacian: exp(-|x - z|_1 / sigma)
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double bandwidth = 1.0;

  static KernelSpec gaussian(double bandwidth) { return {KernelFamily::gaussian, bandwidth}; }
  static KernelSpec laplacian(double bandwidth) { return {KernelFamily::laplacian, bandwidth}; }

  /// Throws InputError unless bandwidth is finite and positive.
  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

/// Row-vector overload used by the Gram builders.
template <typename A, typename B>
double eval_kernel(const KernelSpec& spec, const Eigen::MatrixBase<A>& x,
                   const Eigen::MatrixBase<B>& z);

/// sup_x K(x, x). Exactly 1 for both supported families.
double beta(const KernelSpec& spec);

/// Kernel matrix over one point set. Built by filling the upper triangle and mirroring,
/// so `values()` is exactly symmetric.
class GramMatrix {
 public:
  GramMatrix(Matrix values, KernelSpec spec, std::vector<std::pair<Index, Index>> duplicates = {});

  const Matrix& values() const noexcept { return values_; }
  const KernelSpec& kernel() const noexcept { return spec_; }
  Index size() const noexcept { return values_.rows(); }
  double operator()(Index i, Index j) const { return values_(i, j); }

  /// Pairs of identical points seen while building (the matrix is singular if non-empty).
  const std::vector<std::pair<Index, Index>>& duplicate_pairs() const noexcept {
    return duplicates_;
  }

 private:
  Matrix values_;
  KernelSpec spec_;
  std::vector<std::pair<Index, Index>> duplicates_;
};

struct GramOptions {
  /// Worker threads for the entry fill. Results are bit-identical for any value.
  unsigned jobs = 1;
  /// Receives a message when duplicate points are found. Defaults to std::clog.
  std::function<void(std::string_view)> warn;
};

GramMatrix gram(const KernelSpec& spec, const PointSet& points, const GramOptions& options = {});

/// a x b matrix of K(a_i, b_j).
Matrix cross_gram(const KernelSpec& spec, const PointSet& a, const PointSet& b);

/// Rows `indices` of the point set.
PointSet select_rows(const PointSet& points, std::span<const Index> indices);

/// Coefficients of the minimum-norm interpolant: solves G alpha = y.
/// Throws SingularityError if the condition estimate exceeds 1e14.
Vector min_norm_interpolant(const GramMatrix& gram, const Vector& targets);

// ---------------------------------------------------------------------------

template <typename A, typename B>
double eval_kernel(const KernelSpec& spec, const Eigen::MatrixBase<A>& x,
                   const Eigen::MatrixBase<B>& z) {
  const Index d = x.size();
  double acc = 0.0;
  if (spec.family == KernelFamily::gaussian) {
    for (Index k = 0; k < d; ++k) {
      const double diff = x(k) - z(k);
      acc += diff * diff;
    }
    return std::exp(-acc / (2.0 * spec.bandwidth * spec.bandwidth));
  }
  for (Index k = 0; k < d; ++k) acc += std::abs(x(k) - z(k));
  return std::exp(-acc / spec.bandwidth);
}

}  // namespace specprec
