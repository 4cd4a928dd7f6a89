#include "specprec/operators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "specprec/errors.hpp"

namespace specprec {

OrthoMatrix OrthoMatrix::self_adjoint(const Matrix& m) {
  if (m.rows() != m.cols()) throw InputError("OrthoMatrix: matrix is not square");
  return {0.5 * (m + m.transpose()), true};
}

namespace {

void require_same_dim(const OrthoMatrix& a, const OrthoMatrix& b, const char* op) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "OrthoMatrix " << op << ": dimension mismatch " << a.dim() << " vs " << b.dim();
    throw InputError(os.str());
  }
}

}  // namespace

OrthoMatrix operator*(const OrthoMatrix& a, const OrthoMatrix& b) {
  require_same_dim(a, b, "product");
  return OrthoMatrix::general(a.value * b.value);
}

OrthoMatrix operator+(const OrthoMatrix& a, const OrthoMatrix& b) {
  require_same_dim(a, b, "sum");
  return {a.value + b.value, a.symmetric && b.symmetric};
}

OrthoMatrix operator-(const OrthoMatrix& a, const OrthoMatrix& b) {
  require_same_dim(a, b, "difference");
  return {a.value - b.value, a.symmetric && b.symmetric};
}

OrthoMatrix operator*(double s, const OrthoMatrix& a) { return {s * a.value, a.symmetric}; }

// ---------------------------------------------------------------------------

namespace {

struct KeptSpectrum {
  Matrix vectors;
  Vector values;
  double dropped;
};

KeptSpectrum keep_above(const Matrix& g, double rel_tol) {
  const EigenSystem e = sym_eig(g);
  const double top = e.values(0);
  if (!(top > 0.0)) throw NotPsdError(e.values(e.count() - 1));
  Index r = 0;
  while (r < e.count() && e.values(r) > rel_tol * top) ++r;
  const double dropped = r < e.count() ? std::max(0.0, e.values(r)) : 0.0;
  return {e.vectors.leftCols(r), e.values.head(r), dropped};
}

}  // namespace

OrthoBasis OrthoBasis::symmetric_root(const GramMatrix& gram, double rel_tol) {
  const KeptSpectrum k = keep_above(gram.values(), rel_tol);
  const Vector root = k.values.cwiseSqrt();
  Matrix coords = k.vectors * root.asDiagonal() * k.vectors.transpose();
  Matrix coef = k.vectors * root.cwiseInverse().asDiagonal() * k.vectors.transpose();
  return OrthoBasis(Kind::symmetric_root, std::move(coords), std::move(coef), k.dropped);
}

OrthoBasis OrthoBasis::eigen(const GramMatrix& gram, double rel_tol) {
  const KeptSpectrum k = keep_above(gram.values(), rel_tol);
  const Vector root = k.values.cwiseSqrt();
  Matrix coords = k.vectors * root.asDiagonal();
  Matrix coef = k.vectors * root.cwiseInverse().asDiagonal();
  return OrthoBasis(Kind::eigen, std::move(coords), std::move(coef), k.dropped);
}

OrthoBasis OrthoBasis::pivoted_cholesky(const KernelSpec& spec, const PointSet& points, double tol,
                                        Index max_rank) {
  spec.validate();
  const Index m = points.rows();
  if (m == 0) throw InputError("pivoted_cholesky: empty point set");
  if (max_rank < 0 || max_rank > m) max_rank = m;

  Vector residual(m);
  for (Index i = 0; i < m; ++i) residual(i) = eval_kernel(spec, points.row(i), points.row(i));
  Matrix l(m, std::min<Index>(max_rank, 64));
  Index r = 0;
  while (r < max_rank) {
    Index pivot = 0;
    const double d = residual.maxCoeff(&pivot);
    if (d <= tol) break;
    if (r == l.cols()) l.conservativeResize(Eigen::NoChange, std::min<Index>(max_rank, 2 * l.cols()));
    Vector col(m);
    for (Index i = 0; i < m; ++i) col(i) = eval_kernel(spec, points.row(i), points.row(pivot));
    if (r > 0) col.noalias() -= l.leftCols(r) * l.row(pivot).head(r).transpose();
    col /= std::sqrt(d);
    l.col(r) = col;
    residual -= col.cwiseAbs2();
    residual(pivot) = 0.0;
    ++r;
  }
  l.conservativeResize(Eigen::NoChange, r);
  const double truncation = r < m ? std::max(0.0, residual.maxCoeff()) : 0.0;
  const Matrix gram_small = l.transpose() * l;
  Matrix coef = l * gram_small.ldlt().solve(Matrix::Identity(r, r));
  return OrthoBasis(Kind::pivoted_cholesky, std::move(l), std::move(coef), truncation);
}

// ---------------------------------------------------------------------------

Matrix HilbertOperator::action(const Matrix& gram) const {
  const Index m = gram.rows();
  const Index b = Index(base.size());
  if (weights.rows() != b || weights.cols() != b) throw InputError("HilbertOperator: weight shape mismatch");
  Matrix out = shift * Matrix::Identity(m, m);
  Matrix rows(b, m);
  for (Index i = 0; i < b; ++i) rows.row(i) = gram.row(base[std::size_t(i)]);
  const Matrix weighted = weights * rows;
  for (Index i = 0; i < b; ++i) out.row(base[std::size_t(i)]) += weighted.row(i);
  return out;
}

Vector HilbertOperator::apply(const Vector& coefficients, const Matrix& gram) const {
  if (coefficients.size() != gram.rows()) throw InputError("HilbertOperator: coefficient size mismatch");
  const Index b = Index(base.size());
  Vector values(b);
  for (Index i = 0; i < b; ++i) values(i) = gram.row(base[std::size_t(i)]).dot(coefficients);
  const Vector weighted = weights * values;
  Vector out = shift * coefficients;
  for (Index i = 0; i < b; ++i) out(base[std::size_t(i)]) += weighted(i);
  return out;
}

HilbertOperator covariance_operator(Index n) {
  if (n < 1) throw InputError("covariance_operator: n must be positive");
  HilbertOperator op;
  op.base.resize(std::size_t(n));
  for (Index i = 0; i < n; ++i) op.base[std::size_t(i)] = i;
  op.weights = Matrix::Identity(n, n) / double(n);
  return op;
}

HilbertOperator subsample_covariance_operator(std::span<const Index> indices) {
  const Index s = Index(indices.size());
  if (s < 1) throw InputError("subsample_covariance_operator: empty subsample");
  HilbertOperator op;
  op.base.assign(indices.begin(), indices.end());
  op.weights = Matrix::Identity(s, s) / double(s);
  return op;
}

OrthoMatrix to_ortho(const HilbertOperator& op, const OrthoBasis& basis) {
  const Index b = Index(op.base.size());
  if (op.weights.rows() != b || op.weights.cols() != b) throw InputError("to_ortho: weight shape mismatch");
  Matrix rb(b, basis.dim());
  for (Index i = 0; i < b; ++i) {
    const Index row = op.base[std::size_t(i)];
    if (row < 0 || row >= basis.points()) throw InputError("to_ortho: base index outside the basis");
    rb.row(i) = basis.coords().row(row);
  }
  const bool sym = b == 0 || (op.weights - op.weights.transpose()).cwiseAbs().maxCoeff() <=
                   1e-12 * std::max(1.0, op.weights.cwiseAbs().maxCoeff());
  Matrix value = rb.transpose() * op.weights * rb;
  value.diagonal().array() += op.shift;
  if (sym) return OrthoMatrix::self_adjoint(value);
  return OrthoMatrix::general(std::move(value));
}

OrthoMatrix to_ortho(const Matrix& action, const OrthoBasis& basis, bool self_adjoint) {
  if (action.rows() != basis.points() || action.cols() != basis.points())
    throw InputError("to_ortho: action matrix does not match the basis point set");
  Matrix value = basis.coords().transpose() * action * basis.coefficient_map();
  if (!self_adjoint) return OrthoMatrix::general(std::move(value));
  const double scale = std::max(1.0, value.cwiseAbs().maxCoeff());
  const double asym = (value - value.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-6 * scale) {
    std::ostringstream os;
    os << "to_ortho: operator declared self-adjoint has asymmetry " << asym;
    throw ConsistencyError(os.str());
  }
  return OrthoMatrix::self_adjoint(value);
}

// ---------------------------------------------------------------------------

Vector singular_spectrum(const OrthoMatrix& a) {
  if (a.dim() == 0) return Vector();
  if (a.symmetric) {
    Vector s = sym_eigenvalues(a.value).cwiseAbs();
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    return s;
  }
  return singular_values(a.value);
}

double op_norm(const OrthoMatrix& a) {
  if (a.dim() == 0) return 0.0;
  return singular_spectrum(a)(0);
}

double hs_norm(const OrthoMatrix& a) { return a.value.norm(); }

double condition_number(const Vector& sv, double rank_tol) {
  if (sv.size() == 0 || !(sv(0) > 0.0)) throw UndefinedConditionError("condition number of the zero operator");
  Index r = 0;
  while (r < sv.size() && sv(r) > rank_tol * sv(0)) ++r;
  return sv(0) / sv(r - 1);
}

double condition_number(const OrthoMatrix& a, double rank_tol) {
  return condition_number(singular_spectrum(a), rank_tol);
}

ConditionInfo condition_info(const OrthoMatrix& a, double rank_tol, double mismatch_tol) {
  ConditionInfo out;
  if (a.symmetric) {
    const Vector sv = singular_spectrum(a);
    out.kappa = condition_number(sv, rank_tol);
    out.rank = Index((sv.array() > rank_tol * sv(0)).count());
    return out;
  }
  if (a.dim() == 0) throw UndefinedConditionError("condition number of the zero operator");
  const Eigen::BDCSVD<Matrix> svd(a.value, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  out.kappa = condition_number(sv, rank_tol);
  out.rank = Index((sv.array() > rank_tol * sv(0)).count());
  if (out.rank < a.dim()) {
    const Matrix u = svd.matrixU().leftCols(out.rank), v = svd.matrixV().leftCols(out.rank);
    const Matrix off = u - v * (v.transpose() * u);
    out.nullspace_mismatch = Eigen::BDCSVD<Matrix>(off).singularValues()(0);
  }
  out.nullspaces_differ = out.nullspace_mismatch > mismatch_tol;
  return out;
}

EigenSystem eig(const OrthoMatrix& a) {
  if (!a.symmetric) throw InputError("eig: operator is not marked self-adjoint");
  return sym_eig(a.value);
}

OrthoMatrix spectral_function(const EigenSystem& e, Index ambient_dim, const std::function<double(double)>& h) {
  if (e.dim() != ambient_dim) throw InputError("spectral_function: eigenvectors do not match the ambient dimension");
  const double h0 = h(0.0);
  Vector shifted(e.count());
  for (Index i = 0; i < e.count(); ++i) shifted(i) = h(e.values(i)) - h0;
  Matrix value = e.vectors * shifted.asDiagonal() * e.vectors.transpose();
  value.diagonal().array() += h0;
  return OrthoMatrix::self_adjoint(value);
}

OrthoMatrix threshold_h(const EigenSystem& e, double alpha, Index ambient_dim) {
  if (!(alpha >= 0.0)) throw InputError("threshold_h: alpha must be non-negative");
  return spectral_function(e, ambient_dim, [alpha](double x) { return std::max(x, alpha); });
}

OrthoMatrix threshold_h(const OrthoMatrix& a, double alpha) { return threshold_h(eig(a), alpha, a.dim()); }

OrthoMatrix sqrt_psd(const OrthoMatrix& a) {
  const EigenSystem e = eig(a);
  const double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  const double low = e.values(e.count() - 1);
  if (low < -1e-6 * scale) throw NotPsdError(low);
  return spectral_function(e, a.dim(), [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

OrthoMatrix abs_op(const OrthoMatrix& a) {
  if (a.symmetric) return spectral_function(eig(a), a.dim(), [](double x) { return std::abs(x); });
  return sqrt_psd(OrthoMatrix::self_adjoint(a.value.transpose() * a.value));
}

OrthoMatrix inverse(const OrthoMatrix& a) {
  if (!a.symmetric) {
    Eigen::PartialPivLU<Matrix> lu(a.value);
    return OrthoMatrix::general(lu.inverse());
  }
  const EigenSystem e = eig(a);
  const Vector mags = e.values.cwiseAbs();
  const double big = mags.maxCoeff();
  const double small = mags.minCoeff();
  if (!(small > 1e-14 * big)) throw SingularityError(small, small > 0 ? big / small : INFINITY);
  return OrthoMatrix::self_adjoint(e.vectors * e.values.cwiseInverse().asDiagonal() * e.vectors.transpose());
}

// ---------------------------------------------------------------------------

PopulationProxy population_proxy(const SyntheticDistribution& dist, Index size, const KernelSpec& kernel,
                                 const ProxyOptions& options) {
  dist.validate();
  kernel.validate();
  if (size < 1) throw InputError("population_proxy: size must be positive");
  if (options.consumer_n > 0 && size < 10 * options.consumer_n) {
    std::ostringstream os;
    os << "population_proxy: size " << size << " is below 10 x n = " << 10 * options.consumer_n;
    throw InputError(os.str());
  }
  PopulationProxy proxy{dist, kernel, options.stream, dist.sample(size, options.stream), Vector()};
  if (options.top_k <= 0) return proxy;
  const Index k = std::min(options.top_k, size);

  // Smooth kernels in low dimension have small numerical rank: eigenvalues of (1/N) L^T L
  // then match those of (1/N) G to the factorisation tolerance.
  const Index rank_cap = std::min<Index>(size, options.low_rank_cap);
  if (rank_cap >= k) {
    const OrthoBasis basis = OrthoBasis::pivoted_cholesky(kernel, proxy.points, 1e-12, rank_cap);
    if (basis.truncation() <= 1e-12) {
      const Matrix& l = basis.coords();
      const Vector ev = sym_eigenvalues(l.transpose() * l) / double(size);
      proxy.eigenvalues = Vector::Zero(k);
      const Index kept = std::min(k, ev.size());
      proxy.eigenvalues.head(kept) = ev.head(kept).cwiseMax(0.0);
      return proxy;
    }
  }
  if (size > options.dense_limit) {
    std::ostringstream os;
    os << "population_proxy: size " << size << " exceeds the dense limit " << options.dense_limit
       << " and the kernel matrix is not of low numerical rank";
    throw InputError(os.str());
  }
  GramOptions gopts;
  gopts.warn = [](std::string_view) {};
  const GramMatrix g = gram(kernel, proxy.points, gopts);
  proxy.eigenvalues = top_eigenpairs(g.values(), k).values / double(size);
  return proxy;
}

}  // namespace specprec
