#pragma once

// Reference computations used by the tests. They are written from the defining formulas with
// naive loops or a different Eigen algorithm than the library, so a shared bug is unlikely.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "specprec/types.hpp"

namespace oracle {

using specprec::Index;
using specprec::Matrix;
using specprec::Vector;

inline Matrix gaussian_gram(const Matrix& x, double sigma) {
  const Index n = x.rows();
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      double d2 = 0.0;
      for (Index k = 0; k < x.cols(); ++k) d2 += (x(i, k) - x(j, k)) * (x(i, k) - x(j, k));
      g(i, j) = std::exp(-d2 / (2.0 * sigma * sigma));
    }
  return g;
}

/// Singular values by one-sided Jacobi, non-increasing. For PSD input these are the eigenvalues.
inline Vector singular_values(const Matrix& a) { return Eigen::JacobiSVD<Matrix>(a).singularValues(); }

/// Symmetric PSD square root via Jacobi SVD (U = V for PSD input).
inline Matrix psd_sqrt(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  return svd.matrixU() * svd.singularValues().cwiseSqrt().asDiagonal() * svd.matrixU().transpose();
}

/// sigma_1 / smallest sigma above tol * sigma_1.
inline double kappa(const Vector& sv, double tol = 1e-10) {
  double last = sv(0);
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) last = sv(i);
  return sv(0) / last;
}

/// Coefficient-space action of I - sum_i w_i psi_i (x) psi_i with psi_i = sum_b c_bi K(x_b,.):
/// beta -> beta - E_b C diag(w) C^T G_{b,:} beta.
inline Matrix precond_action(const Matrix& g, const std::vector<Index>& base, const Matrix& c, const Vector& lambda,
                             bool sqrt_root) {
  const Index n = g.rows();
  const Index q = lambda.size();
  Matrix m = Matrix::Identity(n, n);
  for (Index i = 0; i + 1 < q; ++i) {
    const double r = lambda(q - 1) / lambda(i);
    const double w = 1.0 - (sqrt_root ? std::sqrt(r) : r);
    Vector inner = Vector::Zero(n);  // row vector psi_i^T G restricted to the base rows
    Vector embed = Vector::Zero(n);
    for (std::size_t b = 0; b < base.size(); ++b) {
      embed(base[b]) = c(Index(b), i);
      inner += c(Index(b), i) * g.row(base[b]).transpose();
    }
    m -= w * embed * inner.transpose();
  }
  return m;
}

/// Eigenvalues of a coefficient-space action M that is self-adjoint in H_K, computed as the
/// spectrum of G^{1/2} M G^{-1/2} for full-rank G.
inline Vector hk_spectrum(const Matrix& g, const Matrix& action) {
  const Matrix r = psd_sqrt(g);
  const Matrix t = r * action * r.inverse();
  Eigen::EigenSolver<Matrix> es(0.5 * (t + t.transpose()));
  Vector v = es.eigenvalues().real();
  std::sort(v.data(), v.data() + v.size(), [](double a, double b) { return a > b; });
  return v;
}

inline double sample_size(double eps, double delta, double n, double ckq, double c1, double c2) {
  const double l = std::log(4.0 / delta);
  const double a = c1 * ckq * ckq * l;
  const double b = c2 * std::pow(ckq, 4) * std::pow(std::log(n + 1.0), 4) / std::pow(eps, 4) * l;
  return std::ceil(std::max(a, b));
}

inline double loss(const Matrix& g, const Vector& alpha, const Vector& y) {
  double acc = 0.0;
  for (Index i = 0; i < g.rows(); ++i) {
    double fi = 0.0;
    for (Index j = 0; j < g.cols(); ++j) fi += g(i, j) * alpha(j);
    acc += (fi - y(i)) * (fi - y(i));
  }
  return acc / (2.0 * double(g.rows()));
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1e-300, std::max(a.norm(), b.norm()));
}

}  // namespace oracle
