#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "specprec/errors.hpp"
#include "specprec/precond.hpp"
#include "specprec/solvers.hpp"
#include "verify_internal.hpp"

namespace specprec {

using namespace detail;

SuccessFraction success_fraction(Index successes, Index trials, double target, double confidence) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw InputError("success_fraction: need 0 <= successes <= trials and trials >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InputError("success_fraction: confidence must lie in (0, 1)");
  SuccessFraction f;
  f.successes = successes;
  f.trials = trials;
  f.target = target;
  const double alpha = 1.0 - confidence;
  const double k = double(successes), n = double(trials);
  f.lower = successes == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1.0), alpha / 2);
  f.upper = successes == trials ? 1.0
                                : boost::math::quantile(boost::math::beta_distribution<>(k + 1.0, n - k), 1.0 - alpha / 2);
  return f;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("log_log_slope: need at least two (x, y) pairs");
  double mx = 0.0, my = 0.0;
  const double m = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw InputError("log_log_slope: values must be positive");
    mx += std::log(x[i]) / m;
    my += std::log(y[i]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw InputError("log_log_slope: x values must not all coincide");
  return sxy / sxx;
}

bool SuiteResult::passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed; });
}

bool SuiteResult::gating_passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return !p.gating || p.passed; });
}

double SuiteResult::measurement(std::string_view key) const {
  for (const auto& [k, v] : measurements)
    if (k == key) return v;
  throw InputError("suite " + name + " has no measurement '" + std::string(key) + "'");
}

const PropertyResult* SuiteResult::property(std::string_view key) const {
  for (const auto& p : properties)
    if (p.name == key) return &p;
  return nullptr;
}

SyntheticDistribution TrialConfig::default_distribution() {
  SyntheticDistribution d;
  d.kind = DistributionKind::uniform_hypercube;
  d.dim = 10;
  return d;
}

void TrialConfig::validate() const {
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (q < 1) throw ConfigError("q", "must be >= 1");
  if (!(eps > 0.0)) throw ConfigError("eps", "must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau", "must lie in (0, 1]");
  if (matrix_dim < 2) throw ConfigError("matrix_dim", "must be >= 2");
  if (proxy_size < 0) throw ConfigError("proxy_size", "must be >= 0");
  if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
  for (const Index s : s_grid)
    if (s < 1) throw ConfigError("s_grid", "entries must be >= 1");
  for (const Index m : n_grid)
    if (m < 1) throw ConfigError("n_grid", "entries must be >= 1");
  for (const double c : universal_c)
    if (!(c > 0.0)) throw ConfigError("universal_c", "entries must be positive");
  try {
    distribution.validate();
  } catch (const InputError& e) {
    throw ConfigError("distribution", e.what());
  }
  try {
    kernel.validate();
  } catch (const InputError& e) {
    throw ConfigError("kernel", e.what());
  }
}

namespace {

/// |A B^{-1}| for symmetric positive definite B, via a Cholesky solve.
double ratio_norm(const OrthoMatrix& a, const OrthoMatrix& b) {
  const Eigen::LLT<Matrix> llt(b.value);
  if (llt.info() != Eigen::Success) throw NumericalError("ratio_norm: operator is not positive definite");
  // B^{-1} A is the transpose of A B^{-1} and has the same norm.
  return singular_values(llt.solve(a.value))(0);
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// kappa from a symmetric spectrum under the rank convention.
double spectrum_kappa(Vector spectrum) {
  spectrum = spectrum.cwiseAbs();
  std::sort(spectrum.data(), spectrum.data() + spectrum.size(), std::greater<>());
  return condition_number(spectrum);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

GramMatrix quiet_gram(const KernelSpec& kernel, const PointSet& points) {
  GramOptions opts;
  opts.warn = [](std::string_view) {};
  return gram(kernel, points, opts);
}

}  // namespace

double covariance_deviation(const KernelSpec& kernel, const PointSet& x, const PointSet& z) {
  if (x.rows() < 1 || z.rows() < 1 || x.cols() != z.cols())
    throw InputError("covariance_deviation: need two non-empty point sets of the same dimension");
  PointSet joint(x.rows() + z.rows(), x.cols());
  joint << x, z;
  const OrthoBasis basis = OrthoBasis::pivoted_cholesky(kernel, joint);
  const Matrix& l = basis.coords();
  const Matrix lx = l.topRows(x.rows()), lz = l.bottomRows(z.rows());
  const Matrix diff = lx.transpose() * lx / double(x.rows()) - lz.transpose() * lz / double(z.rows());
  return sym_eigenvalues(0.5 * (diff + diff.transpose())).cwiseAbs().maxCoeff();
}

SuiteResult concentration_experiment(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  std::vector<Index> sizes = config.n_grid;
  if (sizes.empty()) sizes = {50, 100, 200, 400, 800};
  const Index largest = *std::max_element(sizes.begin(), sizes.end());
  const Index proxy_n = config.proxy_size > 0 ? config.proxy_size : 10 * largest;
  if (proxy_n < 10 * largest)
    throw ConfigError("proxy_size", "must be >= 10 x the largest n (" + std::to_string(10 * largest) + ")");
  if (config.trials < 30) throw ConfigError("trials", "the concentration experiment needs at least 30 seeds per size");

  ProxyOptions popts;
  popts.top_k = 0;
  popts.consumer_n = largest;
  const PopulationProxy proxy = population_proxy(config.distribution, proxy_n, config.kernel, popts);
  const double b = beta(config.kernel);

  struct Cell {
    Index n;
    Index trial;
  };
  std::vector<Cell> cells;
  for (const Index n : sizes)
    for (Index t = 0; t < config.trials; ++t) cells.push_back({n, t});
  const auto deviations = run_trials<double>(Index(cells.size()), config.jobs, [&](Index i) {
    const Cell c = cells[std::size_t(i)];
    const PointSet x = config.distribution.sample(c.n, derive_seed(config.seed, std::uint64_t(c.n) << 20 | std::uint64_t(c.trial)));
    return covariance_deviation(config.kernel, x, proxy.points);
  });

  SuiteResult r;
  r.name = "concentration";
  Table table{"deviation-by-n", {"n", "median_deviation", "bound", "fraction_within_bound"}, {}};
  Index hits = 0;
  std::vector<double> xs, medians;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const Index n = sizes[k];
    const double bound = 2.0 * b * std::sqrt(2.0 / double(n) * std::log(4.0 / config.delta));
    std::vector<double> devs(deviations.begin() + std::ptrdiff_t(k * std::size_t(config.trials)),
                             deviations.begin() + std::ptrdiff_t((k + 1) * std::size_t(config.trials)));
    const Index within = Index(std::count_if(devs.begin(), devs.end(), [&](double d) { return d <= bound; }));
    hits += within;
    const double med = median(devs);
    xs.push_back(double(n));
    medians.push_back(med);
    table.rows.push_back({double(n), med, bound, double(within) / double(config.trials)});
  }
  const Index total = Index(cells.size());
  r.properties.push_back(fraction_property("bound-satisfaction", hits, total, 1.0 - config.delta / 2,
                                           "|K_n - K_proxy| <= 2 beta sqrt(2/n log(4/delta)) over all sizes and seeds"));
  Tally slope_tally;
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (sizes.size() >= 2) {
    slope = log_log_slope(xs, medians);
    slope_tally.check(slope >= -0.7 && slope <= -0.3, slope, "slope " + fmt(slope) + " outside [-0.7, -0.3]");
  }
  r.properties.push_back(reported_property("rate-slope", slope_tally,
                                           "log-log slope of the median deviation against n lies in [-0.7, -0.3]"));
  r.measure("slope", slope);
  r.measure("proxy_size", double(proxy.size()));
  r.tables.push_back(std::move(table));
  r.notes.push_back("the population operator is replaced by the empirical operator over the proxy sample");
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult theorem1_experiment(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index n = config.n, q = config.q;
  if (n > kDenseLimit) throw ConfigError("n", "the dense oracle accepts n <= " + std::to_string(kDenseLimit));
  if (q > n) throw ConfigError("q", "must not exceed n");

  ProxyOptions popts;
  popts.top_k = q;
  popts.consumer_n = n;
  const Index proxy_n = config.proxy_size > 0 ? config.proxy_size : 10 * n;
  if (proxy_n < 10 * n) throw ConfigError("proxy_size", "must be >= 10 n = " + std::to_string(10 * n));
  const PopulationProxy proxy = population_proxy(config.distribution, proxy_n, config.kernel, popts);
  const double c_kq = estimate_CKq(proxy, config.kernel, q);
  const SampleSize star = sample_size(config.eps, config.delta, double(n), c_kq, 32.0, default_c2(1.0));

  std::vector<Index> grid = config.s_grid;
  if (grid.empty()) grid = {q, 2 * q, 5 * q, 10 * q, n};
  grid.push_back(star.s);
  std::erase_if(grid, [&](Index s) { return s < q || s > n; });
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t star_slot = std::size_t(std::find(grid.begin(), grid.end(), star.s) - grid.begin());
  const double factor = std::pow(1.0 + config.eps, 4);

  struct Seed {
    double kappa1 = 0.0, kappa_q = 0.0;
    std::vector<double> kappa_sq;
    double gamma = 0.0, zeta_log = 0.0, zeta_rank = 0.0;
  };
  const auto seeds = run_trials<Seed>(config.trials, config.jobs, [&](Index t) {
    const std::uint64_t seed_t = derive_seed(config.seed, std::uint64_t(t));
    const GramMatrix g = quiet_gram(config.kernel, config.distribution.sample(n, seed_t));
    const OrthoBasis basis = OrthoBasis::eigen(g);
    const SpectralPreconditioner pq = build_exact(g, q);
    Seed out;
    out.kappa1 = spectrum_kappa(governing_spectrum(basis));
    out.kappa_q = spectrum_kappa(governing_spectrum(basis, &pq));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Index s = grid[k];
      const NystromSample sample = nystrom_sample(n, s, SamplingPolicy::uniform, derive_seed(seed_t, std::uint64_t(s)));
      try {
        const SpectralPreconditioner psq = build_nystrom(g, sample, q);
        out.kappa_sq.push_back(spectrum_kappa(governing_spectrum(basis, &psq)));
        if (k == star_slot) {
          const OrthoMatrix sq = to_ortho(pq, basis, Root::sqrt), ssq = to_ortho(psq, basis, Root::sqrt);
          out.gamma = std::max(ratio_norm(sq, ssq), ratio_norm(ssq, sq)) - 1.0;
          // The eigen basis has orthogonal columns, so the full operator is diagonal there.
          const Matrix& rc = basis.coords();
          const Vector k_diag = rc.colwise().squaredNorm().transpose() / double(n);
          Matrix rs(s, rc.cols());
          for (Index i = 0; i < s; ++i) rs.row(i) = rc.row(sample.indices[std::size_t(i)]);
          const OrthoMatrix k_sub = OrthoMatrix::self_adjoint(rs.transpose() * rs / double(s));
          const EigenSystem sub = eig(k_sub);
          const OrthoMatrix root_sub =
              spectral_function(sub, k_sub.dim(), [](double x) { return std::sqrt(std::max(x, 0.0)); });
          Matrix diff = -root_sub.value;
          diff.diagonal() += k_diag.cwiseSqrt();
          const double lam_q = pq.tail(), lam_sq = psq.tail();
          const double core = op_norm(OrthoMatrix::self_adjoint(diff)) / std::sqrt(lam_q) *
                              (1.0 + std::sqrt(k_diag.maxCoeff()) / std::sqrt(lam_sq));
          const double ranks = double(psd_rank(k_diag) + psd_rank(sub.values));
          out.zeta_log = 2.0 * std::log(double(n) + 1.0) * core;
          out.zeta_rank = std::log(ranks + 1.0) * core;
        }
      } catch (const LevelTooDeepError&) {
        out.kappa_sq.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    return out;
  });

  SuiteResult r;
  r.name = "theorem1";
  Table curve{"kappa-vs-s", {"s", "median_kappa_sq", "median_kappa_q", "fraction_within"}, {}};
  std::vector<double> med_curve;
  Index star_hits = 0;
  Tally exact;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> ks, kq;
    Index within = 0;
    for (const Seed& sd : seeds) {
      const double v = sd.kappa_sq[k];
      ks.push_back(v);
      kq.push_back(sd.kappa_q);
      const bool ok = std::isfinite(v) && v <= factor * sd.kappa_q;
      within += ok ? 1 : 0;
      if (k == star_slot && ok) ++star_hits;
      if (grid[k] == n) {
        const double gap = std::isfinite(v) ? std::abs(v / sd.kappa_q - 1.0) : INFINITY;
        exact.check(gap <= 1e-8, gap, "kappa_sq / kappa_q - 1 = " + fmt(gap));
      }
    }
    med_curve.push_back(median(ks));
    curve.rows.push_back({double(grid[k]), med_curve.back(), median(kq), double(within) / double(config.trials)});
  }
  r.properties.push_back(fraction_property("success-at-s-star", star_hits, config.trials, 1.0 - config.delta,
                                           "kappa_sq <= (1+eps)^4 kappa_q at s* = " + std::to_string(star.s) +
                                               (star.capped ? " (capped at n)" : "")));
  Index inversions = 0;
  for (std::size_t k = 1; k < med_curve.size(); ++k)
    if (!(med_curve[k] <= med_curve[k - 1] * (1.0 + 1e-9))) ++inversions;
  Tally trend;
  trend.check(inversions <= 1, double(inversions), std::to_string(inversions) + " inversions of the median curve");
  r.properties.push_back(reported_property("monotone-median", trend,
                                           "median kappa_sq is non-increasing in s, one inversion tolerated"));
  r.properties.push_back(gating_property("full-sample-recovery", exact, "s = n gives kappa_sq = kappa_q to 1e-8"));

  std::vector<double> k1, gam, zl, zr;
  for (const Seed& sd : seeds) {
    k1.push_back(sd.kappa1);
    gam.push_back(sd.gamma);
    zl.push_back(sd.zeta_log);
    zr.push_back(sd.zeta_rank);
  }
  r.measure("C_Kq_estimate", c_kq);
  r.measure("s_star", double(star.s));
  r.measure("s_star_uncapped", star.uncapped);
  r.measure("s_star_capped", star.capped ? 1.0 : 0.0);
  for (const double c : config.universal_c)
    r.measure("s_star_uncapped_C=" + fmt(c), sample_size(config.eps, config.delta, double(n), c_kq, 32.0, default_c2(c)).uncapped);
  r.measure("median_kappa1", median(k1));
  r.measure("median_gamma_at_s_star", median(gam));
  r.measure("median_zeta_log_n_at_s_star", median(zl));
  r.measure("median_zeta_rank_at_s_star", median(zr));
  r.measure("success_fraction", double(star_hits) / double(config.trials));
  r.measure("median_inversions", double(inversions));
  r.tables.push_back(std::move(curve));
  r.notes.push_back("C_Kq = beta / lambda*_q with lambda*_q estimated from a proxy of " + std::to_string(proxy.size()) +
                    " points");
  r.notes.push_back("zeta evaluated with C = 1, once with 2 log(n+1) and once with log(rk K + rk K' + 1)");
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult speedup_table(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  std::vector<Index> sizes = config.n_grid;
  if (sizes.empty()) sizes = {config.n};
  const Index q = config.q;
  SuiteResult r;
  r.name = "speedup";
  Table rows{"speedup",
             {"n", "q", "s", "gd_iterations", "pgd_iterations", "npgd_iterations", "gd_over_pgd", "gd_over_npgd",
              "predicted_pgd", "predicted_npgd", "pgd_floats", "npgd_floats", "exact_setup_ms", "nystrom_setup_ms",
              "converged"},
             {}};
  Tally band, storage, converged;
  std::vector<double> ns, exact_ms;
  for (const Index n : sizes) {
    SyntheticDistribution dist = config.distribution;
    dist.seed = derive_seed(config.seed, std::uint64_t(n));
    GenerateOptions gopts;
    gopts.kernel = config.kernel;
    const Dataset data = generate(dist, n, gopts);
    const GramMatrix g = quiet_gram(config.kernel, data.points());
    const Problem problem = make_problem(data, g);

    // Predictions use the proxy spectrum when a proxy is configured, else the training Gram's.
    Vector spectrum;
    double c_kq = 0.0;
    if (config.proxy_size > 0) {
      ProxyOptions popts;
      popts.top_k = q;
      popts.consumer_n = n;
      const PopulationProxy proxy = population_proxy(dist, config.proxy_size, config.kernel, popts);
      spectrum = proxy.eigenvalues;
      c_kq = estimate_CKq(proxy, config.kernel, q);
    } else {
      spectrum = top_eigenpairs(g.values(), q).values / double(n);
      c_kq = beta(config.kernel) / spectrum(q - 1);
    }
    const double ratio = spectrum(0) / spectrum(q - 1);
    const Index s = config.s_grid.empty()
                        ? sample_size(config.eps, config.delta, double(n), c_kq, 32.0, default_c2(1.0)).s
                        : std::min(config.s_grid.front(), n);

    SolverConfig sc;
    sc.q = q;
    sc.tau = config.tau;
    sc.predict = false;
    sc.record_every = 1000000;
    sc.method = Method::gd;
    const RunReport gd = run_gd(sc, problem);

    auto t0 = Clock::now();
    const SpectralPreconditioner pe = build_exact(g, q);
    const double exact_setup = ms_since(t0);
    sc.method = Method::pgd;
    const RunReport pgd = run_pgd(sc, problem, pe);

    const NystromSample sample = nystrom_sample(n, s, SamplingPolicy::uniform, derive_seed(config.seed, 77 + std::uint64_t(n)));
    t0 = Clock::now();
    const SpectralPreconditioner pn = build_nystrom(config.kernel, data.points(), sample, q);
    const double nystrom_setup = ms_since(t0);
    const Matrix cross = base_cross_gram(pn, config.kernel, data.points());
    sc.method = Method::npgd;
    const RunReport npgd = run_npgd(sc, problem, pn, cross);

    const bool all_converged = gd.converged && pgd.converged && npgd.converged;
    converged.check(all_converged, 0.0, "n=" + std::to_string(n) + " has a run that hit the iteration cap");
    const double r_pgd = double(gd.iterations) / double(std::max<Index>(pgd.iterations, 1));
    const double r_npgd = double(gd.iterations) / double(std::max<Index>(npgd.iterations, 1));
    const double pred_npgd = ratio / std::pow(1.0 + config.eps, 4);
    band.check(r_pgd >= ratio / 3.0 && r_pgd <= 3.0 * ratio, r_pgd / ratio,
               "n=" + std::to_string(n) + ": GD/PGD " + fmt(r_pgd) + " vs predicted " + fmt(ratio));
    const Index want_pgd = (q - 1) * n + q, want_npgd = (q - 1) * s + q;
    storage.check(pe.storage_floats() == want_pgd && pn.storage_floats() == want_npgd, 0.0,
                  "storage " + std::to_string(pe.storage_floats()) + "/" + std::to_string(pn.storage_floats()));
    rows.rows.push_back({double(n), double(q), double(s), double(gd.iterations), double(pgd.iterations),
                         double(npgd.iterations), r_pgd, r_npgd, ratio, pred_npgd, double(pe.storage_floats()),
                         double(pn.storage_floats()), exact_setup, nystrom_setup, all_converged ? 1.0 : 0.0});
    ns.push_back(double(n));
    exact_ms.push_back(exact_setup);
  }
  r.properties.push_back(reported_property("pgd-ratio-band", band,
                                           "GD/PGD iteration ratio within [1/3, 3] x lambda_1 / lambda_q"));
  r.properties.push_back(gating_property("storage-counts", storage, "(q-1) n + q and (q-1) s + q floats"));
  r.properties.push_back(reported_property("converged", converged, "every run reached tau"));
  r.tables.push_back(std::move(rows));

  // Setup cost of the Nystrom build against s at fixed q.
  if (config.s_grid.size() >= 2) {
    const Index n = *std::max_element(sizes.begin(), sizes.end());
    const Index top = *std::max_element(config.s_grid.begin(), config.s_grid.end());
    const PointSet points = config.distribution.sample(std::max(n, top), derive_seed(config.seed, 5));
    Table cost{"nystrom-setup", {"s", "median_setup_ms", "floats"}, {}};
    std::vector<double> ss, ms;
    for (const Index s : config.s_grid) {
      const NystromSample sample = nystrom_sample(points.rows(), s, SamplingPolicy::uniform, derive_seed(config.seed, 9));
      std::vector<double> reps;
      Index floats = 0;
      for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = Clock::now();
        const SpectralPreconditioner p = build_nystrom(config.kernel, points, sample, q);
        reps.push_back(ms_since(t0));
        floats = p.storage_floats();
      }
      ss.push_back(double(s));
      ms.push_back(median(reps));
      cost.rows.push_back({double(s), ms.back(), double(floats)});
    }
    r.measure("nystrom_setup_slope", log_log_slope(ss, ms));
    r.tables.push_back(std::move(cost));
  }
  if (ns.size() >= 2) r.measure("exact_setup_slope", log_log_slope(ns, exact_ms));
  r.notes.push_back(config.proxy_size > 0 ? "predictions use the proxy spectrum"
                                          : "predictions use the training Gram spectrum");
  r.elapsed_ms = ms_since(start);
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "eigenfunction", "sqrt-perturbation", "ratio-lemma", "equivalences", "additive-to-multiplicative",
      "appendix-hs-bound", "ratio-to-condition", "h-identities", "sandwich", "concentration", "theorem1", "speedup"};
  return names;
}

bool is_deterministic_suite(std::string_view suite) {
  return suite == "eigenfunction" || suite == "sqrt-perturbation" || suite == "ratio-lemma" ||
         suite == "equivalences" || suite == "additive-to-multiplicative" || suite == "ratio-to-condition" ||
         suite == "h-identities";
}

namespace {

void require_suite(std::string_view suite) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) != names.end()) return;
  std::string list;
  for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("suite", "unknown suite '" + std::string(suite) + "'; available: " + list);
}

}  // namespace

TrialConfig default_trial_config(std::string_view suite) {
  require_suite(suite);
  TrialConfig c;
  if (suite == "eigenfunction") {
    c.trials = 20;
    c.q = 20;
  } else if (suite == "sqrt-perturbation") {
    c.trials = 500;
    c.n = 100;
    c.s_grid = {25, 50};
  } else if (suite == "ratio-lemma") {
    c.trials = 1000;
    c.matrix_dim = 10;
  } else if (suite == "equivalences") {
    c.trials = 500;
  } else if (suite == "additive-to-multiplicative" || suite == "appendix-hs-bound") {
    c.trials = 500;
    c.matrix_dim = 40;
  } else if (suite == "ratio-to-condition") {
    c.trials = 100;
    c.s_grid = {30, 100, 300};
  } else if (suite == "h-identities") {
    c.trials = 500;
  } else if (suite == "sandwich") {
    c.distribution.dim = 1;
    c.kernel = KernelSpec::gaussian(0.3);
    c.q = 2;
    c.n = 2000;
    c.trials = 50;
    c.proxy_size = 20000;
  } else if (suite == "concentration") {
    c.distribution.dim = 2;
    c.n_grid = {50, 100, 200, 400, 800};
    c.trials = 30;
    c.delta = 0.2;
    c.proxy_size = 8000;
  } else if (suite == "theorem1") {
    c.n = 1000;
    c.trials = 50;
  } else if (suite == "speedup") {
    c.n = 1000;
    c.n_grid = {1000};
    c.trials = 1;
  }
  return c;
}

SuiteResult run_suite(std::string_view suite, const TrialConfig& config) {
  require_suite(suite);
  if (suite == "eigenfunction") return check_eigenfunction(config);
  if (suite == "sqrt-perturbation") return check_sqrt_perturbation(config);
  if (suite == "ratio-lemma") return check_ratio_lemma(config);
  if (suite == "equivalences") return check_equivalences(config);
  if (suite == "additive-to-multiplicative") return check_additive_to_multiplicative(config);
  if (suite == "appendix-hs-bound") return check_appendix_hs_bound(config);
  if (suite == "ratio-to-condition") return check_ratio_to_condition(config);
  if (suite == "h-identities") return check_h_identities(config);
  if (suite == "sandwich") return check_eigenvalue_sandwich(config);
  if (suite == "concentration") return concentration_experiment(config);
  if (suite == "theorem1") return theorem1_experiment(config);
  return speedup_table(config);
}

}  // namespace specprec
