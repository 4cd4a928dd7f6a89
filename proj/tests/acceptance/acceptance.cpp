// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if
// any criterion fails or exceeds its time limit. `--only 1,3,9` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "oracles.hpp"
#include "specprec/errors.hpp"
#include "specprec/operators.hpp"
#include "specprec/precond.hpp"
#include "specprec/random.hpp"
#include "specprec/solvers.hpp"
#include "specprec/verify.hpp"

using namespace specprec;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const PropertyResult& prop(const SuiteResult& r, std::string_view name) {
  const PropertyResult* p = r.property(name);
  if (!p) throw InputError(r.name + ": missing property " + std::string(name));
  return *p;
}

std::vector<double> column(const Table& t, std::string_view name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw InputError(t.name + ": missing column " + std::string(name));
  const std::size_t c = std::size_t(it - t.columns.begin());
  std::vector<double> out;
  for (const auto& row : t.rows) out.push_back(row[c]);
  return out;
}

Dataset problem_data(Index n, std::uint64_t seed) {
  SyntheticDistribution d = TrialConfig::default_distribution();
  d.seed = seed;
  GenerateOptions o;
  o.kernel = KernelSpec::gaussian(0.5);
  return generate(d, n, o);
}

GramMatrix quiet_gram(const PointSet& x) {
  GramOptions o;
  o.warn = [](std::string_view) {};
  return gram(KernelSpec::gaussian(0.5), x, o);
}

Outcome exact_recovery() {
  const Index n = 500, q = 10;
  const Dataset data = problem_data(n, 1);
  const GramMatrix g = quiet_gram(data.points());
  const SpectralPreconditioner pe = build_exact(g, q);
  const SpectralPreconditioner pn =
      build_nystrom(g.kernel(), data.points(), nystrom_sample(n, n, SamplingPolicy::uniform, 2), q);
  const OrthoBasis basis = OrthoBasis::eigen(g);
  const double kq = condition_number(governing_spectrum(basis, &pe));
  const double ksq = condition_number(governing_spectrum(basis, &pn));
  const double kappa_gap = std::abs(ksq / kq - 1.0);

  SolverConfig c;
  c.step_policy = StepPolicy::explicit_value;
  c.step = 1.0 / pe.tail();
  c.max_iterations = 100;
  c.tau = 1e-300;
  c.predict = false;
  c.method = Method::pgd;
  const Problem problem = make_problem(data, g);
  const RunReport a = run_pgd(c, problem, pe);
  c.method = Method::npgd;
  const RunReport b = run_npgd(c, problem, pn, base_cross_gram(pn, g.kernel(), data.points()));
  double traj_gap = a.state.history.size() == b.state.history.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.state.history.size(), b.state.history.size()); ++i)
    traj_gap = std::max(traj_gap, std::abs(a.state.history[i].hk_error - b.state.history[i].hk_error) /
                                      a.state.history.front().hk_error);
  traj_gap = std::max(traj_gap, (a.state.alpha - b.state.alpha).norm() / a.state.alpha.norm());
  const bool iters = a.iterations == 100 && b.iterations == 100;
  return {kappa_gap <= 1e-8 && traj_gap <= 1e-8 && iters,
          "|kappa_sq/kappa_q - 1| = " + fmt(kappa_gap) + ", trajectory gap " + fmt(traj_gap) + " over " +
              std::to_string(a.iterations) + " iterations"};
}

Outcome eigenfunction_identity() {
  TrialConfig c = default_trial_config("eigenfunction");
  c.trials = 20;
  c.q = 20;
  const SuiteResult r = check_eigenfunction(c);
  const double worst = r.measurement("max_relative_residual");
  return {r.gating_passed() && c.n <= 300 && worst <= 1e-8,
          "20 Grams, n <= " + std::to_string(c.n) + ", max residual / lambda_1 = " + fmt(worst)};
}

Outcome spectrum_flattening() {
  const Index n = 400, q = 10;
  double worst = 0.0, kappa_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GramMatrix g = quiet_gram(problem_data(n, 100 + seed).points());
    const SpectralPreconditioner p = build_exact(g, q);
    const OrthoBasis basis = OrthoBasis::symmetric_root(g);
    const OrthoMatrix pk = to_ortho(p, basis) * to_ortho(covariance_operator(n), basis);
    // P_q and K commute, so the product is symmetric up to round-off.
    const Vector got = sym_eigenvalues(0.5 * (pk.value + pk.value.transpose()));
    const Vector lam = Eigen::BDCSVD<Matrix>(g.values() / double(n)).singularValues();
    Vector want = lam;
    want.head(q).setConstant(lam(q - 1));
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff() / lam(0));
    const double measured = condition_number(got);
    kappa_gap = std::max(kappa_gap, std::abs(measured / (lam(q - 1) / lam(n - 1)) - 1.0));
  }
  return {worst <= 1e-8 && kappa_gap <= 1e-8,
          "max eigenvalue error / lambda_1 = " + fmt(worst) + ", |kappa_q / (lambda_q/lambda_n) - 1| = " + fmt(kappa_gap)};
}

Outcome deterministic_suites() {
  std::vector<SuiteResult> results;
  const auto cfg = [](std::string_view name, Index trials) {
    TrialConfig c = default_trial_config(name);
    c.trials = std::max(c.trials, trials);
    return c;
  };
  results.push_back(check_sqrt_perturbation(cfg("sqrt-perturbation", 500)));
  results.push_back(check_ratio_lemma(cfg("ratio-lemma", 500)));
  results.push_back(check_equivalences(cfg("equivalences", 500)));
  TrialConfig rc = cfg("ratio-to-condition", 500);
  rc.n = 120;
  rc.s_grid = {12, 40, 120};
  results.push_back(check_ratio_to_condition(rc));
  results.push_back(check_h_identities(cfg("h-identities", 500)));

  bool ok = true;
  std::ostringstream os;
  for (const SuiteResult& r : results) {
    Index violations = 0, checked = 0;
    for (const auto& p : r.properties)
      if (p.gating) {
        violations += p.violations;
        checked += p.checked;
        ok = ok && p.passed;
      }
    os << r.name << " " << violations << "/" << checked << "; ";
  }
  const SuiteResult& eq = results[2];
  const double gap = eq.measurement("max_c2_c3_relative_gap");
  ok = ok && gap <= 1e-8;
  os << "c2-c3 gap " << fmt(gap) << ", h errors " << fmt(results[4].measurement("max_positive_part_error")) << "/"
     << fmt(results[4].measurement("max_shift_error"));
  return {ok, os.str()};
}

Outcome speedup_reproduction() {
  TrialConfig c = default_trial_config("speedup");
  c.n_grid = {1000};
  c.q = 10;
  c.tau = 1e-4;
  c.distribution.dim = 10;
  const SuiteResult r = speedup_table(c);
  const Table& t = r.tables.front();
  const double measured = column(t, "gd_over_pgd").front();
  const double predicted = column(t, "predicted_pgd").front();
  const bool ok = measured >= predicted / 3.0 && measured <= 3.0 * predicted && prop(r, "converged").passed;
  return {ok, "GD/PGD = " + fmt(measured) + " vs lambda_1/lambda_q = " + fmt(predicted) + " (GD " +
                  fmt(column(t, "gd_iterations").front()) + ", PGD " + fmt(column(t, "pgd_iterations").front()) + ")"};
}

Outcome theorem1() {
  TrialConfig c = default_trial_config("theorem1");
  c.n = 1000;
  c.q = 10;
  c.eps = 0.5;
  c.delta = 0.1;
  c.trials = 50;
  const SuiteResult r = theorem1_experiment(c);
  const PropertyResult& success = prop(r, "success-at-s-star");
  const SuccessFraction& f = *success.fraction;
  const Table& curve = r.tables.front();
  const std::vector<double> s = column(curve, "s"), med = column(curve, "median_kappa_sq");
  const std::set<double> grid{10.0, 20.0, 50.0, 100.0, 1000.0};
  double prev = INFINITY;
  bool monotone = true;
  std::ostringstream trend;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!grid.count(s[i])) continue;
    monotone = monotone && med[i] <= prev * (1.0 + 1e-12);
    prev = med[i];
    trend << (trend.tellp() > 0 ? " " : "") << fmt(med[i]);
  }
  const bool ok = f.value() >= 0.9 && f.consistent() && monotone && prop(r, "full-sample-recovery").passed;
  return {ok, "s* = " + fmt(r.measurement("s_star")) + (r.measurement("s_star_capped") > 0 ? " (capped)" : "") +
                  ", success " + fmt(f.value()) + " CI [" + fmt(f.lower) + ", " + fmt(f.upper) +
                  "], median kappa_sq over s in {q,2q,5q,10q,n}: " + trend.str()};
}

Outcome concentration() {
  TrialConfig c = default_trial_config("concentration");
  c.n_grid = {50, 100, 200, 400, 800};
  c.delta = 0.2;
  c.proxy_size = 8000;
  const SuiteResult r = concentration_experiment(c);
  const double slope = r.measurement("slope");
  const SuccessFraction& f = *prop(r, "bound-satisfaction").fraction;
  const bool ok = slope >= -0.7 && slope <= -0.3 && f.value() >= 1.0 - c.delta / 2.0;
  return {ok, "slope " + fmt(slope) + ", bound holds in " + std::to_string(f.successes) + " of " + std::to_string(f.trials) +
                  " trials"};
}

Outcome cost_model() {
  const Index q = 10;
  const std::vector<Index> sizes{400, 800, 1600, 3200};
  SyntheticDistribution d = TrialConfig::default_distribution();
  d.seed = 5;
  const PointSet x = d.sample(sizes.back());
  const KernelSpec k = KernelSpec::gaussian(0.5);
  std::vector<double> ss, ms;
  bool storage = true;
  std::ostringstream os;
  for (const Index s : sizes) {
    const NystromSample sample = nystrom_sample(x.rows(), s, SamplingPolicy::uniform, 9);
    std::vector<double> reps;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const SpectralPreconditioner p = build_nystrom(k, x, sample, q);
      reps.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      storage = storage && p.storage_floats() == (q - 1) * s + q;
    }
    std::sort(reps.begin(), reps.end());
    ss.push_back(double(s));
    ms.push_back(reps[1]);
    os << "s=" << s << ":" << fmt(reps[1]) << "ms ";
  }
  const double slope = log_log_slope(ss, ms);
  return {slope >= 1.6 && slope <= 2.4 && storage,
          "setup exponent " + fmt(slope) + " (" + os.str() + "), storage (q-1)s+q " + (storage ? "exact" : "WRONG")};
}

Outcome gradient_check() {
  const Index n = 200;
  const Dataset data = problem_data(n, 9);
  const GramMatrix g = quiet_gram(data.points());
  Rng rng(10);
  const Vector alpha = gaussian_vector(n, rng);
  const Vector grad = gradient(g.values(), alpha, data.targets());
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Vector v = gaussian_vector(n, rng).normalized();
    const double h = 1e-4;
    const double fd = (training_loss(g.values(), alpha + h * v, data.targets()) -
                       training_loss(g.values(), alpha - h * v, data.targets())) / (2.0 * h);
    // <grad L, g_v>_H with g_v = sum_j v_j K(x_j,.)
    const double an = v.dot(g.values() * grad);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
  }
  return {worst <= 1e-5, "max relative error over 20 directions " + fmt(worst)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: specprec_acceptance [--only 1,2,...]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "exact recovery at s = n", 30, exact_recovery},
      {2, "eigenfunction identity", 10, eigenfunction_identity},
      {3, "spectrum flattening", 10, spectrum_flattening},
      {4, "deterministic inequality suites", 120, deterministic_suites},
      {5, "GD/PGD speed-up", 300, speedup_reproduction},
      {6, "Nystrom condition number at s*", 900, theorem1},
      {7, "concentration rate", 600, concentration},
      {8, "Nystrom cost model", 300, cost_model},
      {9, "gradient correctness", 5, gradient_check},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.ok && in_time;
    failures += pass ? 0 : 1;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.1f s / %.0f s%s", secs, c.limit_s, in_time ? "" : " TOO SLOW");
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << ": " << o.detail << " (" << timing
              << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
