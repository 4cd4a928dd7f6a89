#include "specprec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <vector>

#include "specprec/errors.hpp"
#include "specprec/random.hpp"

namespace specprec {

namespace {

bool row_less(const PointSet& p, Index a, Index b) {
  for (Index k = 0; k < p.cols(); ++k) {
    if (p(a, k) < p(b, k)) return true;
    if (p(b, k) < p(a, k)) return false;
  }
  return false;
}

// First duplicate pair (smaller index first), or (-1, -1).
std::pair<Index, Index> find_duplicate(const PointSet& p) {
  std::vector<Index> order(std::size_t(p.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return row_less(p, a, b); });
  std::pair<Index, Index> best{-1, -1};
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Index a = order[k - 1], b = order[k];
    if (p.row(a) == p.row(b)) {
      const std::pair<Index, Index> pr{std::min(a, b), std::max(a, b)};
      if (best.first < 0 || pr < best) best = pr;
    }
  }
  return best;
}

}  // namespace

Dataset::Dataset(PointSet points, Vector targets, Provenance provenance)
    : points_(std::move(points)), targets_(std::move(targets)), provenance_(std::move(provenance)) {
  if (points_.rows() < 1 || points_.cols() < 1)
    throw InputError("dataset needs n >= 1 points of dimension d >= 1");
  if (targets_.size() != points_.rows())
    throw InputError("dataset: number of targets does not match number of points");
  if (!points_.allFinite() || !targets_.allFinite())
    throw InputError("dataset: non-finite values");
  const auto [a, b] = find_duplicate(points_);
  if (a >= 0) {
    std::ostringstream os;
    os << "dataset: duplicate points at rows " << a << " and " << b;
    throw InputError(os.str());
  }
}

std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::uniform_hypercube: return "uniform-hypercube";
    case DistributionKind::isotropic_gaussian: return "isotropic-gaussian";
    case DistributionKind::gaussian_mixture: return "gaussian-mixture";
  }
  return "?";
}

DistributionKind distribution_kind_from_string(std::string_view name) {
  if (name == "uniform-hypercube") return DistributionKind::uniform_hypercube;
  if (name == "isotropic-gaussian") return DistributionKind::isotropic_gaussian;
  if (name == "gaussian-mixture") return DistributionKind::gaussian_mixture;
  throw InputError("unknown distribution '" + std::string(name) + "'");
}

void SyntheticDistribution::validate() const {
  if (dim < 1) throw InputError("distribution dimension must be >= 1");
  if (kind == DistributionKind::uniform_hypercube && !(high > low))
    throw InputError("uniform hypercube needs high > low");
  if (kind != DistributionKind::uniform_hypercube && !(stddev > 0.0))
    throw InputError("distribution stddev must be positive");
  if (kind == DistributionKind::gaussian_mixture && components < 1)
    throw InputError("gaussian mixture needs at least one component");
}

PointSet SyntheticDistribution::sample(Index n, std::uint64_t stream) const {
  validate();
  Rng rng(derive_seed(seed, 1000 + stream));
  PointSet x(n, dim);
  switch (kind) {
    case DistributionKind::uniform_hypercube: {
      std::uniform_real_distribution<double> u(low, high);
      for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < dim; ++k) x(i, k) = u(rng);
      break;
    }
    case DistributionKind::isotropic_gaussian: {
      std::normal_distribution<double> g(0.0, stddev);
      for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < dim; ++k) x(i, k) = g(rng);
      break;
    }
    case DistributionKind::gaussian_mixture: {
      Rng center_rng(derive_seed(seed, 7));
      std::normal_distribution<double> c(0.0, spread);
      Matrix centers(components, dim);
      for (Index j = 0; j < components; ++j)
        for (Index k = 0; k < dim; ++k) centers(j, k) = c(center_rng);
      std::uniform_int_distribution<Index> pick(0, components - 1);
      std::normal_distribution<double> g(0.0, stddev);
      for (Index i = 0; i < n; ++i) {
        const Index j = pick(rng);
        for (Index k = 0; k < dim; ++k) x(i, k) = centers(j, k) + g(rng);
      }
      break;
    }
  }
  return x;
}

std::string_view to_string(TargetRule rule) {
  switch (rule) {
    case TargetRule::random_rkhs_function: return "random-rkhs-function";
    case TargetRule::linear: return "linear";
    case TargetRule::noisy_sin: return "noisy-sin";
  }
  return "?";
}

TargetRule target_rule_from_string(std::string_view name) {
  if (name == "random-rkhs-function") return TargetRule::random_rkhs_function;
  if (name == "linear") return TargetRule::linear;
  if (name == "noisy-sin") return TargetRule::noisy_sin;
  throw InputError("unknown target rule '" + std::string(name) + "'");
}

Dataset generate(const SyntheticDistribution& dist, Index n, const GenerateOptions& options) {
  if (n < 1) throw InputError("generate: n must be >= 1");
  PointSet x = dist.sample(n, 0);
  Rng rng(derive_seed(dist.seed, 2));
  Vector y(n);
  switch (options.rule) {
    case TargetRule::random_rkhs_function: {
      options.kernel.validate();
      const Index m = std::max<Index>(1, options.anchors);
      const PointSet anchors = dist.sample(m, 1);
      const Vector c = gaussian_vector(m, rng);
      y = cross_gram(options.kernel, x, anchors) * c;
      break;
    }
    case TargetRule::linear: {
      const Vector w = gaussian_vector(dist.dim, rng);
      y = x * w;
      break;
    }
    case TargetRule::noisy_sin: {
      std::normal_distribution<double> noise(0.0, options.noise);
      constexpr double two_pi = 6.283185307179586;
      for (Index i = 0; i < n; ++i) y(i) = std::sin(two_pi * x(i, 0)) + noise(rng);
      break;
    }
  }
  std::ostringstream desc;
  desc << to_string(dist.kind) << " d=" << dist.dim << " n=" << n << " targets=" << to_string(options.rule);
  return Dataset(std::move(x), std::move(y), {Provenance::Kind::synthetic, desc.str(), dist.seed});
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open CSV file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file, expected a header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_commas(line);
  if (header.size() < 2 || trim(header.back()) != "target")
    throw InputError(path.string() +
                     ":1: header must list feature columns followed by a final 'target' column");
  const std::size_t cols = header.size();

  std::vector<double> values;
  std::vector<std::size_t> line_numbers;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != cols) {
      std::ostringstream os;
      os << path.string() << ":" << line_no << ": expected " << cols << " fields, found " << fields.size();
      throw InputError(os.str());
    }
    for (const auto raw : fields) {
      const auto f = trim(raw);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty() || !std::isfinite(v)) {
        std::ostringstream os;
        os << path.string() << ":" << line_no << ": malformed number '" << f << "'";
        throw InputError(os.str());
      }
      values.push_back(v);
    }
    line_numbers.push_back(line_no);
  }
  const Index n = Index(line_numbers.size());
  if (n == 0) throw InputError(path.string() + ": no data rows");
  const Index d = Index(cols) - 1;
  PointSet x(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) x(i, k) = values[std::size_t(i) * cols + std::size_t(k)];
    y(i) = values[std::size_t(i) * cols + std::size_t(d)];
  }
  const auto [a, b] = find_duplicate(x);
  if (a >= 0) {
    std::ostringstream os;
    os << path.string() << ": duplicate points on lines " << line_numbers[std::size_t(a)] << " and "
       << line_numbers[std::size_t(b)];
    throw InputError(os.str());
  }
  return Dataset(std::move(x), std::move(y), {Provenance::Kind::file, path.string(), 0});
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write CSV file '" + path.string() + "'");
  for (Index k = 0; k < data.dim(); ++k) out << 'x' << k << ',';
  out << "target\n" << std::setprecision(17);
  for (Index i = 0; i < data.size(); ++i) {
    for (Index k = 0; k < data.dim(); ++k) out << data.points()(i, k) << ',';
    out << data.targets()(i) << '\n';
  }
}

}  // namespace specprec
