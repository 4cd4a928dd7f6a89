#pragma once

#include "specprec/types.hpp"

namespace specprec {

/// Largest matrix the dense oracles accept.
inline constexpr Index kDenseLimit = 4000;

/// Eigenpairs sorted by non-increasing eigenvalue. Columns of `vectors` are orthonormal and
/// each is signed so that its largest-magnitude entry is positive.
struct EigenSystem {
  Vector values;
  Matrix vectors;

  Index count() const noexcept { return values.size(); }
  Index dim() const noexcept { return vectors.rows(); }
};

/// Throws InputError if max|A - A^T| exceeds tol * max(1, max|A|).
void require_symmetric(const Matrix& a, double tol, const char* who);

/// Full dense symmetric eigendecomposition (tridiagonalisation + implicit QR).
EigenSystem sym_eig(const Matrix& a, double sym_tol = 1e-10, Index dense_limit = kDenseLimit);

/// Eigenvalues only, non-increasing.
Vector sym_eigenvalues(const Matrix& a, double sym_tol = 1e-10, Index dense_limit = kDenseLimit);

enum class TopEigenMethod { automatic, dense, lanczos };

/// The k largest eigenpairs. `dense` takes the head of the full decomposition; `lanczos` uses
/// Lanczos with full reorthogonalisation, costing O(n^2) per step. `automatic` picks
/// Lanczos for n > 256 and k <= n / 8.
EigenSystem top_eigenpairs(const Matrix& a, Index k, TopEigenMethod method = TopEigenMethod::automatic);

/// Singular values, non-increasing (divide and conquer SVD).
Vector singular_values(const Matrix& a);

/// Applies the deterministic sign convention in place.
void normalize_signs(Matrix& vectors);

}  // namespace specprec
