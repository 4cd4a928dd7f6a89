#include "specprec/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "specprec/errors.hpp"
#include "specprec/random.hpp"

namespace specprec {

void require_symmetric(const Matrix& a, double tol, const char* who) {
  if (a.rows() != a.cols()) throw InputError(std::string(who) + ": matrix is not square");
  if (a.size() == 0) throw InputError(std::string(who) + ": empty matrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= tol * scale)) {
    std::ostringstream os;
    os << who << ": matrix is not symmetric (max asymmetry " << asym << ")";
    throw InputError(os.str());
  }
}

void normalize_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

namespace {

void check_dense_limit(const Matrix& a, Index limit, const char* who) {
  if (a.rows() > limit) {
    std::ostringstream os;
    os << who << ": dimension " << a.rows() << " exceeds the dense limit " << limit;
    throw InputError(os.str());
  }
}

EigenSystem reverse(Vector ascending, Matrix vecs) {
  EigenSystem es;
  es.values = ascending.reverse();
  es.vectors = vecs.rowwise().reverse();
  normalize_signs(es.vectors);
  return es;
}

EigenSystem full_eig(const Matrix& a) {
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return reverse(solver.eigenvalues(), solver.eigenvectors());
}

EigenSystem dense_top(const Matrix& a, Index k) {
  EigenSystem es = full_eig(a);
  es.values.conservativeResize(k);
  es.vectors.conservativeResize(Eigen::NoChange, k);
  return es;
}

// Lanczos with two-pass classical Gram-Schmidt reorthogonalisation against the whole basis.
// Exact eigenvalue multiplicities in A are only resolved through restarts after breakdown.
EigenSystem lanczos_top(const Matrix& a, Index k, double tol) {
  const Index n = a.rows();
  Index cap = std::min<Index>(n, std::max<Index>(4 * k + 20, 60));
  Matrix q(n, cap);
  std::vector<double> alpha, beta;
  Rng rng(0x1a2c05ULL);

  auto orthogonalize = [&](Vector& w, Index m) {
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= q.leftCols(m) * (q.leftCols(m).transpose() * w);
  };
  auto fresh_vector = [&](Index m) -> bool {
    for (int attempt = 0; attempt < 5; ++attempt) {
      Vector v = gaussian_vector(n, rng);
      orthogonalize(v, m);
      const double nv = v.norm();
      if (nv > 1e-8) {
        q.col(m) = v / nv;
        return true;
      }
    }
    return false;
  };

  fresh_vector(0);
  Vector w(n);
  double scale = 0.0;
  Index m = 0;
  Eigen::SelfAdjointEigenSolver<Matrix> tri;
  while (true) {
    w.noalias() = a * q.col(m);
    const double al = q.col(m).dot(w);
    alpha.push_back(al);
    orthogonalize(w, m + 1);
    const double b = w.norm();
    ++m;
    scale = std::max({scale, std::abs(al), b});

    const bool breakdown = b <= 1e-13 * scale;
    const bool exhausted = m >= n;
    if (m >= k && (exhausted || (!breakdown && (m % 5 == 0)))) {
      Vector diag = Eigen::Map<Vector>(alpha.data(), m);
      Vector off = m > 1 ? Vector(Eigen::Map<Vector>(beta.data(), m - 1)) : Vector();
      tri.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
      const Vector& theta = tri.eigenvalues();
      const Matrix& s = tri.eigenvectors();
      const double top = std::abs(theta(m - 1));
      bool converged = true;
      if (!exhausted) {
        for (Index i = 0; i < k && converged; ++i)
          converged = std::abs(b * s(m - 1, m - 1 - i)) <= tol * top;
      }
      if (converged) {
        Vector vals = theta.tail(k);
        Matrix vecs = q.leftCols(m) * s.rightCols(k);
        // Re-orthonormalise the Ritz vectors (they are orthonormal up to rounding).
        Eigen::HouseholderQR<Matrix> qr(vecs);
        Matrix qv = qr.householderQ() * Matrix::Identity(n, k);
        for (Index j = 0; j < k; ++j)
          if (qv.col(j).dot(vecs.col(j)) < 0.0) qv.col(j) = -qv.col(j);
        return reverse(std::move(vals), std::move(qv));
      }
    }
    if (exhausted) break;

    if (m == cap) {
      cap = std::min<Index>(n, 2 * cap);
      q.conservativeResize(Eigen::NoChange, cap);
    }
    if (breakdown) {
      beta.push_back(0.0);
      if (!fresh_vector(m)) break;
    } else {
      beta.push_back(b);
      q.col(m) = w / b;
    }
  }
  return dense_top(a, k);
}

}  // namespace

EigenSystem sym_eig(const Matrix& a, double sym_tol, Index dense_limit) {
  require_symmetric(a, sym_tol, "sym_eig");
  check_dense_limit(a, dense_limit, "sym_eig");
  return full_eig(a);
}

Vector sym_eigenvalues(const Matrix& a, double sym_tol, Index dense_limit) {
  require_symmetric(a, sym_tol, "sym_eigenvalues");
  check_dense_limit(a, dense_limit, "sym_eigenvalues");
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return solver.eigenvalues().reverse();
}

EigenSystem top_eigenpairs(const Matrix& a, Index k, TopEigenMethod method) {
  require_symmetric(a, 1e-10, "top_eigenpairs");
  const Index n = a.rows();
  if (k < 1 || k > n) throw InputError("top_eigenpairs: k must lie in [1, n]");
  if (method == TopEigenMethod::automatic)
    method = (n > 256 && k <= n / 8) ? TopEigenMethod::lanczos : TopEigenMethod::dense;
  if (method == TopEigenMethod::lanczos) return lanczos_top(a, k, 1e-12);
  return dense_top(a, k);
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) throw InputError("singular_values: empty matrix");
  const Eigen::BDCSVD<Matrix> svd(a);
  if (svd.info() != Eigen::Success) throw NumericalError("singular value decomposition did not converge");
  return svd.singularValues();
}

}  // namespace specprec
