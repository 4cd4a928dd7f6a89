#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "specprec/dataset.hpp"
#include "specprec/kernel.hpp"
#include "specprec/linalg.hpp"
#include "specprec/types.hpp"

namespace specprec {

/// An operator on a finite-dimensional subspace of H_K written in an orthonormal basis of
/// that subspace. Operator norms, Hilbert-Schmidt norms and condition numbers become the
/// Euclidean ones of this matrix.
struct OrthoMatrix {
  Matrix value;
  /// Set for self-adjoint operators; such matrices are stored exactly symmetric.
  bool symmetric = true;

  Index dim() const noexcept { return value.rows(); }

  static OrthoMatrix general(Matrix m) { return {std::move(m), false}; }
  /// Symmetrises (A + A^T) / 2.
  static OrthoMatrix self_adjoint(const Matrix& m);
  static OrthoMatrix identity(Index dim) { return {Matrix::Identity(dim, dim), true}; }
};

OrthoMatrix operator*(const OrthoMatrix& a, const OrthoMatrix& b);
OrthoMatrix operator+(const OrthoMatrix& a, const OrthoMatrix& b);
OrthoMatrix operator-(const OrthoMatrix& a, const OrthoMatrix& b);
OrthoMatrix operator*(double s, const OrthoMatrix& a);

/// Coordinates of K(z_1,.), ..., K(z_m,.) in an orthonormal basis of their span: row i of
/// `coords()` represents K(z_i,.), so the Gram matrix factors as coords * coords^T.
class OrthoBasis {
 public:
  enum class Kind { symmetric_root, eigen, pivoted_cholesky };

  /// coords = G^{1/2} (pseudo-root: eigenvalues below rel_tol * lambda_max dropped). The
  /// representation is m x m and to_ortho(K) reproduces (1/n) G.
  static OrthoBasis symmetric_root(const GramMatrix& gram, double rel_tol = 1e-12);
  /// coords = V_r Lambda_r^{1/2}; same spectra as symmetric_root, cheaper to use.
  static OrthoBasis eigen(const GramMatrix& gram, double rel_tol = 1e-12);
  /// Greedy pivoted Cholesky, stopped once every residual diagonal entry is <= tol.
  /// Suited to kernels whose Gram matrices have low numerical rank.
  static OrthoBasis pivoted_cholesky(const KernelSpec& spec, const PointSet& points,
                                     double tol = 1e-12, Index max_rank = -1);

  Kind kind() const noexcept { return kind_; }
  const Matrix& coords() const noexcept { return coords_; }
  /// (coords^T)^+ : maps orthonormal coordinates back to minimum-norm coefficients.
  const Matrix& coefficient_map() const noexcept { return coef_map_; }
  Index points() const noexcept { return coords_.rows(); }
  Index rank() const noexcept { return coords_.cols(); }
  /// Dimension of the orthonormal representation (m for symmetric_root, else rank).
  Index dim() const noexcept { return coords_.cols(); }
  /// Largest squared H_K-distance from any K(z_i,.) to the represented span.
  double truncation() const noexcept { return truncation_; }

 private:
  OrthoBasis(Kind kind, Matrix coords, Matrix coef_map, double truncation)
      : kind_(kind), coords_(std::move(coords)), coef_map_(std::move(coef_map)), truncation_(truncation) {}

  Kind kind_;
  Matrix coords_;
  Matrix coef_map_;
  double truncation_;
};

/// Finite-rank operator plus identity shift over base points x_b (indices into a point set):
///
///   A = sum_{i,j} W_ij K(x_{b_i},.) (x) K(x_{b_j},.) + shift * I.
///
/// A acts on g = sum_j beta_j K(x_j,.) through coefficients: beta -> E_b W G_{b,:} beta +
/// shift * beta. W symmetric makes A self-adjoint in H_K.
struct HilbertOperator {
  std::vector<Index> base;
  Matrix weights;
  double shift = 0.0;

  /// Coefficient-space action matrix over the full point set (m x m).
  Matrix action(const Matrix& gram) const;
  Vector apply(const Vector& coefficients, const Matrix& gram) const;
};

/// K = (1/n) sum_i K(x_i,.) (x) K(x_i,.); its action matrix is (1/n) G.
HilbertOperator covariance_operator(Index n);
/// K' over a subsample: base = indices, weights I / s.
HilbertOperator subsample_covariance_operator(std::span<const Index> indices);

/// Orthonormal image of a weight-form operator: coords_b^T W coords_b + shift * I.
OrthoMatrix to_ortho(const HilbertOperator& op, const OrthoBasis& basis);

/// Orthonormal image of a coefficient-space action matrix:  coords^T M coefficient_map.
/// If `self_adjoint`, asymmetry above 1e-6 (relative) throws ConsistencyError and the
/// result is symmetrised.
OrthoMatrix to_ortho(const Matrix& action, const OrthoBasis& basis, bool self_adjoint);

/// Largest singular value.
double op_norm(const OrthoMatrix& a);
/// Frobenius norm.
double hs_norm(const OrthoMatrix& a);
/// Singular values, non-increasing (|eigenvalues| for symmetric matrices).
Vector singular_spectrum(const OrthoMatrix& a);

/// sigma_1 / sigma_r, r being the number of singular values above rank_tol * sigma_1: the
/// infimum in the definition runs over the complement of the null space.
double condition_number(const OrthoMatrix& a, double rank_tol = 1e-10);
/// Same, from a precomputed singular spectrum.
double condition_number(const Vector& singular_values, double rank_tol = 1e-10);

struct ConditionInfo {
  double kappa = 0.0;
  Index rank = 0;
  /// sin of the largest principal angle between range(A) and range(A^T); zero iff the left
  /// and right null spaces coincide.
  double nullspace_mismatch = 0.0;
  bool nullspaces_differ = false;
};

/// condition_number plus a check that the singular-value reading is the null-space restricted
/// one: for non-normal A with rank deficiency the two null spaces can differ.
ConditionInfo condition_info(const OrthoMatrix& a, double rank_tol = 1e-10, double mismatch_tol = 1e-8);

EigenSystem eig(const OrthoMatrix& a);

/// h(A) = sum_i h(lambda_i) v_i v_i^T + h(0) (I - V V^T) for symmetric A.
OrthoMatrix spectral_function(const EigenSystem& e, Index ambient_dim,
                              const std::function<double(double)>& h);

/// Eigenvalue thresholding h_alpha(x) = max(x, alpha); on the null space h_alpha(0) = alpha.
OrthoMatrix threshold_h(const EigenSystem& e, double alpha, Index ambient_dim);
OrthoMatrix threshold_h(const OrthoMatrix& a, double alpha);

/// Self-adjoint square root. Eigenvalues in [-1e-6 * max(1, |A|), 0) are clamped to zero;
/// anything more negative throws NotPsdError.
OrthoMatrix sqrt_psd(const OrthoMatrix& a);
/// |A| = (A^* A)^{1/2}; for symmetric A, eigenvalues |lambda|.
OrthoMatrix abs_op(const OrthoMatrix& a);
/// Inverse of a symmetric invertible matrix via its eigendecomposition.
OrthoMatrix inverse(const OrthoMatrix& a);

/// Large-sample stand-in for the population integral operator: the empirical covariance
/// operator over N fresh draws from the data distribution. All quantities derived from it
/// are estimates.
struct PopulationProxy {
  SyntheticDistribution distribution;
  KernelSpec kernel;
  std::uint64_t stream = 0;
  PointSet points;
  /// Leading eigenvalues of the proxy operator, non-increasing.
  Vector eigenvalues;

  Index size() const noexcept { return points.rows(); }
};

struct ProxyOptions {
  Index top_k = 32;
  std::uint64_t stream = 9001;
  /// Size n of the experiment that consumes the proxy; requires N >= 10 n when set.
  Index consumer_n = 0;
  /// Rank up to which a pivoted Cholesky factorisation is tried before forming the Gram.
  Index low_rank_cap = 400;
  /// Largest N for which the dense N x N Gram is formed.
  Index dense_limit = 20000;
};

PopulationProxy population_proxy(const SyntheticDistribution& dist, Index size,
                                 const KernelSpec& kernel, const ProxyOptions& options = {});

}  // namespace specprec
