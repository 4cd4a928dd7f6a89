#pragma once

#include <cstdint>
#include <random>

#include "specprec/types.hpp"

namespace specprec {

using Rng = std::mt19937_64;

/// Mixes a master seed with a stream index (splitmix64). Used for per-trial seeds so
/// results do not depend on scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);
Vector gaussian_vector(Index size, Rng& rng);

/// Haar-distributed orthogonal matrix (QR of a gaussian matrix with sign fix).
Matrix random_orthogonal(Index m, Rng& rng);

/// Symmetric V diag(lambda) V^T with random orthogonal V.
Matrix random_symmetric_with_spectrum(const Vector& spectrum, Rng& rng);

/// `count` values log-uniform in [lo, hi], sorted descending.
Vector log_uniform_spectrum(Index count, double lo, double hi, Rng& rng);

}  // namespace specprec
