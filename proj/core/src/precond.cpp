#include "specprec/precond.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "specprec/errors.hpp"
#include "specprec/random.hpp"

namespace specprec {

Eigenfunctions top_q_eigenfunctions(const Matrix& gram, Index q, TopEigenMethod method) {
  const Index m = gram.rows();
  if (gram.cols() != m) throw InputError("top_q_eigenfunctions: Gram matrix is not square");
  if (q < 1 || q > m) {
    std::ostringstream os;
    os << "top_q_eigenfunctions: level " << q << " outside [1, " << m << "]";
    throw InputError(os.str());
  }
  const EigenSystem es = top_eigenpairs(gram, q, method);
  Eigenfunctions out;
  out.values = es.values / double(m);
  if (!(out.values(q - 1) > kMinTailEigenvalue)) {
    Index admissible = 0;
    while (admissible < q && out.values(admissible) > kMinTailEigenvalue) ++admissible;
    throw LevelTooDeepError(std::size_t(q), std::size_t(admissible), out.values(q - 1));
  }
  out.coeffs = es.vectors * es.values.cwiseSqrt().cwiseInverse().asDiagonal();
  return out;
}

std::string_view to_string(PreconditionerKind kind) {
  return kind == PreconditionerKind::exact ? "exact" : "nystrom";
}

SpectralPreconditioner::SpectralPreconditioner(PreconditionerKind kind, Index n, std::vector<Index> base,
                                               Vector eigenvalues, Matrix coeffs)
    : kind_(kind), n_(n), base_(std::move(base)), eigenvalues_(std::move(eigenvalues)), coeffs_(std::move(coeffs)) {
  const Index q = eigenvalues_.size();
  const Index b = Index(base_.size());
  if (q < 1) throw InputError("preconditioner: at least one eigenvalue is required");
  if (coeffs_.rows() != b || coeffs_.cols() != q - 1) {
    std::ostringstream os;
    os << "preconditioner: coefficient matrix is " << coeffs_.rows() << "x" << coeffs_.cols() << ", expected " << b
       << "x" << q - 1;
    throw InputError(os.str());
  }
  if (!(eigenvalues_(q - 1) > 0.0)) throw LevelTooDeepError(std::size_t(q), std::size_t(q - 1), eigenvalues_(q - 1));
  for (Index i = 1; i < q; ++i)
    if (eigenvalues_(i) > eigenvalues_(i - 1)) throw InputError("preconditioner: eigenvalues must be non-increasing");
  std::vector<Index> sorted = base_;
  std::sort(sorted.begin(), sorted.end());
  if (b < 1 || sorted.front() < 0 || sorted.back() >= n_) throw InputError("preconditioner: base index out of range");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InputError("preconditioner: base indices must be distinct");
}

Vector SpectralPreconditioner::weights(Root root) const {
  const Index k = level() - 1;
  Vector w(k);
  for (Index i = 0; i < k; ++i) {
    const double ratio = tail() / eigenvalues_(i);
    w(i) = 1.0 - (root == Root::full ? ratio : std::sqrt(ratio));
  }
  return w;
}

Vector SpectralPreconditioner::correct(const Vector& g, const Vector& inner, Root root) const {
  const Vector proj = weights(root).cwiseProduct(inner);
  const Vector delta = coeffs_ * proj;
  Vector out = g;
  for (std::size_t b = 0; b < base_.size(); ++b) out(base_[b]) -= delta(Index(b));
  return out;
}

Vector SpectralPreconditioner::apply(const Vector& g, const Matrix& cross_gram, Root root) const {
  if (g.size() != n_) throw InputError("preconditioner apply: gradient size does not match n");
  if (cross_gram.rows() != Index(base_.size()) || cross_gram.cols() != n_)
    throw InputError("preconditioner apply: cross Gram must be |base| x n");
  if (is_identity()) return g;
  const Vector values = cross_gram * g;
  return correct(g, coeffs_.transpose() * values, root);
}

Vector SpectralPreconditioner::apply(const Vector& g, Root root) const {
  if (kind_ != PreconditionerKind::exact)
    throw InputError("preconditioner apply: the Gram-free path needs an exact preconditioner");
  if (g.size() != n_) throw InputError("preconditioner apply: gradient size does not match n");
  if (is_identity()) return g;
  const Index k = level() - 1;
  const Vector scale = double(n_) * eigenvalues_.head(k);
  return correct(g, scale.cwiseProduct(coeffs_.transpose() * g), root);
}

HilbertOperator SpectralPreconditioner::as_operator(Root root) const {
  HilbertOperator op;
  op.base = base_;
  op.weights = -(coeffs_ * weights(root).asDiagonal() * coeffs_.transpose());
  op.shift = 1.0;
  return op;
}

Matrix ortho_directions(const SpectralPreconditioner& p, const OrthoBasis& basis) {
  const auto& base = p.base();
  Matrix rb(Index(base.size()), basis.dim());
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i] >= basis.points()) throw InputError("ortho_directions: base index outside the basis");
    rb.row(Index(i)) = basis.coords().row(base[i]);
  }
  return rb.transpose() * p.coeffs();
}

OrthoMatrix to_ortho(const SpectralPreconditioner& p, const OrthoBasis& basis, Root root) {
  const Matrix u = ortho_directions(p, basis);
  Matrix value = -(u * p.weights(root).asDiagonal() * u.transpose());
  value.diagonal().array() += 1.0;
  return OrthoMatrix::self_adjoint(value);
}

SpectralPreconditioner build_exact(const GramMatrix& gram, Index q, TopEigenMethod method) {
  const Index n = gram.size();
  Eigenfunctions ef = top_q_eigenfunctions(gram.values(), q, method);
  std::vector<Index> base(static_cast<std::size_t>(n));
  std::iota(base.begin(), base.end(), Index{0});
  return SpectralPreconditioner(PreconditionerKind::exact, n, std::move(base), std::move(ef.values),
                                ef.coeffs.leftCols(q - 1));
}

std::string_view to_string(SamplingPolicy policy) {
  return policy == SamplingPolicy::uniform ? "uniform" : "fixed-prefix";
}

SamplingPolicy sampling_policy_from_string(std::string_view name) {
  if (name == "uniform") return SamplingPolicy::uniform;
  if (name == "fixed-prefix") return SamplingPolicy::fixed_prefix;
  throw InputError("unknown sampling policy '" + std::string(name) + "' (expected uniform or fixed-prefix)");
}

NystromSample nystrom_sample(Index n, Index s, SamplingPolicy policy, std::uint64_t seed) {
  if (n < 1 || s < 1 || s > n) {
    std::ostringstream os;
    os << "nystrom_sample: need 1 <= s <= n, got s=" << s << " n=" << n;
    throw InputError(os.str());
  }
  NystromSample out{n, {}, policy, seed};
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  if (policy == SamplingPolicy::uniform) {
    Rng rng(seed);
    for (Index i = 0; i < s; ++i) {
      std::uniform_int_distribution<Index> pick(i, n - 1);
      std::swap(all[std::size_t(i)], all[std::size_t(pick(rng))]);
    }
  }
  all.resize(std::size_t(s));
  out.indices = std::move(all);
  return out;
}

namespace {

SpectralPreconditioner from_subsample_gram(const Matrix& gss, const NystromSample& sample, Index q,
                                           TopEigenMethod method) {
  Eigenfunctions ef = top_q_eigenfunctions(gss, q, method);
  return SpectralPreconditioner(PreconditionerKind::nystrom, sample.n, sample.indices, std::move(ef.values),
                                ef.coeffs.leftCols(q - 1));
}

}  // namespace

SpectralPreconditioner build_nystrom(const KernelSpec& spec, const PointSet& points, const NystromSample& sample,
                                     Index q, TopEigenMethod method) {
  if (sample.n != points.rows()) throw InputError("build_nystrom: sample was drawn for a different n");
  GramOptions opts;
  opts.warn = [](std::string_view) {};
  const GramMatrix gss = gram(spec, select_rows(points, sample.indices), opts);
  return from_subsample_gram(gss.values(), sample, q, method);
}

SpectralPreconditioner build_nystrom(const GramMatrix& gram, const NystromSample& sample, Index q,
                                     TopEigenMethod method) {
  if (sample.n != gram.size()) throw InputError("build_nystrom: sample was drawn for a different n");
  const Index s = sample.size();
  Matrix gss(s, s);
  for (Index j = 0; j < s; ++j)
    for (Index i = 0; i < s; ++i) gss(i, j) = gram(sample.indices[std::size_t(i)], sample.indices[std::size_t(j)]);
  return from_subsample_gram(gss, sample, q, method);
}

Matrix base_cross_gram(const SpectralPreconditioner& p, const KernelSpec& spec, const PointSet& points) {
  if (points.rows() != p.n()) throw InputError("base_cross_gram: point count does not match the preconditioner");
  return cross_gram(spec, select_rows(points, p.base()), points);
}

double default_c2(double universal_c) {
  const double c2 = universal_c * universal_c;
  return 65536.0 * c2 * c2;
}

std::string_view to_string(SampleSizeBranch branch) {
  return branch == SampleSizeBranch::eigenvalue ? "eigenvalue" : "concentration";
}

SampleSize sample_size(double eps, double delta, double n, double c_kq, double c1, double c2) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("sample_size: eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("sample_size: delta must lie in (0, 1)");
  if (!(n >= 1.0) || !std::isfinite(n)) throw InputError("sample_size: n must be at least 1");
  if (!(c_kq >= 1.0) || !std::isfinite(c_kq)) throw InputError("sample_size: C_Kq must be at least 1");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw InputError("sample_size: constants must be positive");

  const double log_delta = std::log(4.0 / delta);
  const double log_n = std::log(n + 1.0);
  const double c_sq = c_kq * c_kq;
  SampleSize out;
  out.eigenvalue_term = c1 * c_sq * log_delta;
  out.concentration_term = c2 * c_sq * c_sq * std::pow(log_n / eps, 4.0) * log_delta;
  out.branch = out.concentration_term >= out.eigenvalue_term ? SampleSizeBranch::concentration
                                                             : SampleSizeBranch::eigenvalue;
  const double bound = std::max(out.eigenvalue_term, out.concentration_term);
  // Values a few ulps above an integer come from rounding in log/pow, not from the bound.
  const double nearest = std::round(bound);
  out.uncapped = std::abs(bound - nearest) <= 8.0 * std::numeric_limits<double>::epsilon() * bound ? nearest
                                                                                                 : std::ceil(bound);
  const double limit = std::floor(n);
  out.capped = out.uncapped > limit;
  out.s = Index(std::max(1.0, std::min(out.uncapped, limit)));
  return out;
}

double estimate_CKq(const PopulationProxy& proxy, const KernelSpec& spec, Index q) {
  const Index k = proxy.eigenvalues.size();
  if (q < 1) throw InputError("estimate_CKq: q must be positive");
  if (q > k) throw LevelTooDeepError(std::size_t(q), std::size_t(k), 0.0);
  const double lam = proxy.eigenvalues(q - 1);
  if (!(lam > 0.0)) {
    Index admissible = 0;
    while (admissible < k && proxy.eigenvalues(admissible) > 0.0) ++admissible;
    throw LevelTooDeepError(std::size_t(q), std::size_t(admissible), lam);
  }
  return beta(spec) / lam;
}

}  // namespace specprec
