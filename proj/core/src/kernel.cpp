#include "specprec/kernel.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "specprec/errors.hpp"

namespace specprec {

std::string_view to_string(KernelFamily family) {
  return family == KernelFamily::gaussian ? "gaussian" : "laplacian";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "laplacian") return KernelFamily::laplacian;
  throw InputError("unknown kernel family '" + std::string(name) +
                   "' (expected gaussian or laplacian)");
}

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw InputError("kernel bandwidth must be a positive finite number");
}

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) {
    std::ostringstream os;
    os << "eval_kernel: dimension mismatch (" << x.size() << " vs " << z.size() << ")";
    throw InputError(os.str());
  }
  spec.validate();
  using Map = Eigen::Map<const Vector>;
  return eval_kernel(spec, Map(x.data(), Index(x.size())), Map(z.data(), Index(z.size())));
}

double beta(const KernelSpec&) { return 1.0; }

GramMatrix::GramMatrix(Matrix values, KernelSpec spec,
                       std::vector<std::pair<Index, Index>> duplicates)
    : values_(std::move(values)), spec_(spec), duplicates_(std::move(duplicates)) {
  if (values_.rows() != values_.cols()) throw InputError("Gram matrix must be square");
}

namespace {

// Fills rows [begin, end) of the upper triangle. Each entry is written by exactly one
// worker and no reductions cross entries, so any partition gives identical bits.
void fill_upper_rows(const KernelSpec& spec, const PointSet& points, Matrix& g, Index begin,
                     Index end) {
  const Index n = points.rows();
  for (Index i = begin; i < end; ++i) {
    g(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) g(i, j) = eval_kernel(spec, points.row(i), points.row(j));
  }
}

}  // namespace

GramMatrix gram(const KernelSpec& spec, const PointSet& points, const GramOptions& options) {
  spec.validate();
  const Index n = points.rows();
  if (n == 0) throw InputError("gram: point set is empty");
  Matrix g(n, n);

  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1 || n < 256) {
    fill_upper_rows(spec, points, g, 0, n);
  } else {
    // Balance the triangle: row i costs n - i entries.
    std::vector<Index> bounds{0};
    const double total = 0.5 * double(n) * double(n + 1);
    double acc = 0.0;
    for (Index i = 0; i < n && bounds.size() < jobs; ++i) {
      acc += double(n - i);
      if (acc >= total * double(bounds.size()) / jobs) bounds.push_back(i + 1);
    }
    bounds.push_back(n);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w + 1 < bounds.size(); ++w)
      workers.emplace_back(fill_upper_rows, std::cref(spec), std::cref(points), std::ref(g),
                           bounds[w], bounds[w + 1]);
    for (auto& t : workers) t.join();
  }

  std::vector<std::pair<Index, Index>> duplicates;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      g(i, j) = g(j, i);
      if (g(j, i) == 1.0 && points.row(i) == points.row(j)) duplicates.emplace_back(j, i);
    }
  }
  if (!duplicates.empty()) {
    std::ostringstream os;
    os << "gram: " << duplicates.size() << " duplicate point pair(s), first (" << duplicates[0].first
       << ", " << duplicates[0].second << "); the Gram matrix is singular";
    if (options.warn)
      options.warn(os.str());
    else
      std::clog << "warning: " << os.str() << '\n';
  }
  return GramMatrix(std::move(g), spec, std::move(duplicates));
}

Matrix cross_gram(const KernelSpec& spec, const PointSet& a, const PointSet& b) {
  spec.validate();
  if (a.rows() == 0 || b.rows() == 0) throw InputError("cross_gram: point set is empty");
  if (a.cols() != b.cols()) throw InputError("cross_gram: dimension mismatch");
  Matrix k(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j)
    for (Index i = 0; i < a.rows(); ++i) k(i, j) = eval_kernel(spec, a.row(i), b.row(j));
  return k;
}

PointSet select_rows(const PointSet& points, std::span<const Index> indices) {
  PointSet out(Index(indices.size()), points.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= points.rows())
      throw InputError("select_rows: index out of range");
    out.row(Index(k)) = points.row(indices[k]);
  }
  return out;
}

Vector min_norm_interpolant(const GramMatrix& gram, const Vector& targets) {
  const Matrix& g = gram.values();
  if (targets.size() != g.rows()) throw InputError("min_norm_interpolant: target size mismatch");
  Eigen::LDLT<Matrix> ldlt(g);
  const Vector d = ldlt.vectorD();
  const double smallest_pivot = d.cwiseAbs().minCoeff();
  const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e14) || smallest_pivot <= 0.0) throw SingularityError(smallest_pivot, cond);
  return ldlt.solve(targets);
}

}  // namespace specprec
