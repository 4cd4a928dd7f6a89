#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specprec/kernel.hpp"
#include "specprec/linalg.hpp"
#include "specprec/operators.hpp"
#include "specprec/types.hpp"

namespace specprec {

/// Smallest tail eigenvalue accepted for a preconditioner level.
inline constexpr double kMinTailEigenvalue = 1e-12;

/// Leading eigenpairs of the empirical covariance operator over m points.
/// `values` are eigenvalues of (1/m) G; column i of `coeffs` is e_i / sqrt(m lambda_i), the
/// coefficient vector of an eigenfunction with unit H_K norm.
struct Eigenfunctions {
  Vector values;
  Matrix coeffs;
};

/// Throws LevelTooDeepError if lambda_q <= kMinTailEigenvalue, reporting the largest level
/// that would have been admissible.
Eigenfunctions top_q_eigenfunctions(const Matrix& gram, Index q,
                                    TopEigenMethod method = TopEigenMethod::automatic);

enum class PreconditionerKind { exact, nystrom };

std::string_view to_string(PreconditionerKind kind);

/// Which power of the preconditioner to apply: P or its square root.
enum class Root { full, sqrt };

///   P = I - sum_{i<q} w_i psi_i (x) psi_i,   w_i = 1 - (lambda_q / lambda_i)      (full)
///                                            w_i = 1 - sqrt(lambda_q / lambda_i) (sqrt)
///
/// psi_i = sum_b c_{bi} K(x_b,.) over the base points. The exact preconditioner uses every
/// training point as base; the Nystrom one uses a subsample.
class SpectralPreconditioner {
 public:
  SpectralPreconditioner(PreconditionerKind kind, Index n, std::vector<Index> base, Vector eigenvalues,
                         Matrix coeffs);

  PreconditionerKind kind() const noexcept { return kind_; }
  /// Size of the training set the preconditioner acts on.
  Index n() const noexcept { return n_; }
  Index level() const noexcept { return eigenvalues_.size(); }
  double tail() const noexcept { return eigenvalues_(eigenvalues_.size() - 1); }
  const std::vector<Index>& base() const noexcept { return base_; }
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  /// |base| x (q - 1).
  const Matrix& coeffs() const noexcept { return coeffs_; }
  bool is_identity() const noexcept { return level() == 1; }

  /// (q - 1) |base| coefficients plus q eigenvalues.
  Index storage_floats() const noexcept { return coeffs_.size() + eigenvalues_.size(); }

  Vector weights(Root root) const;

  /// P g for a coefficient vector g over the n training points. `cross_gram` holds
  /// K(x_b, x_j) with rows in base order (|base| x n). Costs about 2|base|n + 2|base|q.
  Vector apply(const Vector& g, const Matrix& cross_gram, Root root = Root::full) const;
  Vector apply_sqrt(const Vector& g, const Matrix& cross_gram) const { return apply(g, cross_gram, Root::sqrt); }

  /// Exact preconditioners only: uses G c_i = n lambda_i c_i, costing about 4nq.
  Vector apply(const Vector& g, Root root = Root::full) const;

  /// The same operator in weight form: shift 1, weights -C diag(w) C^T over the base.
  HilbertOperator as_operator(Root root = Root::full) const;

 private:
  Vector correct(const Vector& g, const Vector& inner, Root root) const;

  PreconditionerKind kind_;
  Index n_;
  std::vector<Index> base_;
  Vector eigenvalues_;
  Matrix coeffs_;
};

/// Coordinates of psi_1..psi_{q-1} in the orthonormal basis (dim x (q - 1)).
Matrix ortho_directions(const SpectralPreconditioner& p, const OrthoBasis& basis);
/// I - U diag(w) U^T with U = ortho_directions(p, basis).
OrthoMatrix to_ortho(const SpectralPreconditioner& p, const OrthoBasis& basis, Root root = Root::full);

/// P_q over the full training set.
SpectralPreconditioner build_exact(const GramMatrix& gram, Index q,
                                   TopEigenMethod method = TopEigenMethod::automatic);

enum class SamplingPolicy { uniform, fixed_prefix };

std::string_view to_string(SamplingPolicy policy);
SamplingPolicy sampling_policy_from_string(std::string_view name);

struct NystromSample {
  Index n = 0;
  std::vector<Index> indices;
  SamplingPolicy policy = SamplingPolicy::uniform;
  std::uint64_t seed = 0;

  Index size() const noexcept { return Index(indices.size()); }
};

/// s distinct indices in [0, n): a seeded uniform draw without replacement, or 0..s-1.
NystromSample nystrom_sample(Index n, Index s, SamplingPolicy policy, std::uint64_t seed);

/// P_{s,q} from the s x s Gram over the subsample.
SpectralPreconditioner build_nystrom(const KernelSpec& spec, const PointSet& points, const NystromSample& sample,
                                     Index q, TopEigenMethod method = TopEigenMethod::automatic);
/// Same, reading the subsample Gram out of a precomputed full Gram.
SpectralPreconditioner build_nystrom(const GramMatrix& gram, const NystromSample& sample, Index q,
                                     TopEigenMethod method = TopEigenMethod::automatic);

/// K(x_b, x_j) for the preconditioner's base rows against all points (|base| x n).
Matrix base_cross_gram(const SpectralPreconditioner& p, const KernelSpec& spec, const PointSet& points);

/// c2 = 2^16 C^4 for the universal constant C.
double default_c2(double universal_c = 1.0);

enum class SampleSizeBranch { eigenvalue, concentration };

std::string_view to_string(SampleSizeBranch branch);

struct SampleSize {
  double eigenvalue_term = 0.0;      // c1 C_Kq^2 log(4/delta)
  double concentration_term = 0.0;   // c2 C_Kq^4 log^4(n+1) / eps^4 log(4/delta)
  double uncapped = 0.0;             // ceiling of the larger term
  Index s = 0;                       // min(uncapped, floor(n))
  bool capped = false;
  SampleSizeBranch branch = SampleSizeBranch::concentration;
};

/// s = ceil(max{c1 C_Kq^2, c2 C_Kq^4 log^4(n+1) / eps^4} log(4/delta)), capped at n.
/// n is real-valued so the formula can be evaluated off the integers.
SampleSize sample_size(double eps, double delta, double n, double c_kq, double c1 = 32.0,
                       double c2 = default_c2());

/// beta(K) / lambda_q of the proxy.
double estimate_CKq(const PopulationProxy& proxy, const KernelSpec& spec, Index q);

/// Versioned JSON record {format, version, kind, n, q, s, indices, eigenvalues, coeffs}.
/// Doubles are written in shortest round-trip form, so reading back is exact.
std::string to_json(const SpectralPreconditioner& p);
SpectralPreconditioner preconditioner_from_json(std::string_view text);
void save_preconditioner(const SpectralPreconditioner& p, const std::filesystem::path& path);
SpectralPreconditioner load_preconditioner(const std::filesystem::path& path);

}  // namespace specprec
