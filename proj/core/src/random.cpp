#include "specprec/random.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>

namespace specprec {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

Vector gaussian_vector(Index size, Rng& rng) { return gaussian_matrix(size, 1, rng).col(0); }

Matrix random_orthogonal(Index m, Rng& rng) {
  const Matrix g = gaussian_matrix(m, m, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Matrix random_symmetric_with_spectrum(const Vector& spectrum, Rng& rng) {
  const Matrix v = random_orthogonal(spectrum.size(), rng);
  Matrix a = v * spectrum.asDiagonal() * v.transpose();
  return 0.5 * (a + a.transpose());
}

Vector log_uniform_spectrum(Index count, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Vector s(count);
  for (Index i = 0; i < count; ++i) s(i) = std::exp(u(rng));
  std::sort(s.data(), s.data() + count, std::greater<>());
  return s;
}

}  // namespace specprec
