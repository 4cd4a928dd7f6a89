#include <atomic>
#include <cmath>

#include <doctest.h>

#include "specprec/errors.hpp"
#include "specprec/random.hpp"
#include "specprec/verify.hpp"

using namespace specprec;

namespace {

TrialConfig small(std::string_view suite, Index trials) {
  TrialConfig c = default_trial_config(suite);
  c.trials = trials;
  c.seed = 42;
  return c;
}

void check_gating(const SuiteResult& r) {
  for (const auto& p : r.properties) {
    INFO(r.name << "/" << p.name << ": " << p.detail);
    if (p.gating) CHECK(p.passed);
    CHECK(p.checked > 0);
  }
  CHECK(r.gating_passed());
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("Clopper-Pearson interval") {
    const SuccessFraction all = success_fraction(50, 50, 0.9);
    CHECK(all.upper == 1.0);
    CHECK(all.lower == doctest::Approx(0.92890).epsilon(1e-4));
    const SuccessFraction none = success_fraction(0, 20, 0.5);
    CHECK(none.lower == 0.0);
    CHECK(!none.consistent());
    const SuccessFraction mid = success_fraction(45, 50, 0.9);
    CHECK(mid.lower < 0.9);
    CHECK(mid.upper > 0.9);
    CHECK(mid.consistent());
  }

  TEST_CASE("log-log slope") {
    CHECK(log_log_slope({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0));
    CHECK(log_log_slope({10, 100}, {1, 0.1}) == doctest::Approx(-1.0));
  }

  TEST_CASE("run_trials keeps index order for any worker count") {
    for (unsigned jobs : {1u, 3u, 8u}) {
      const auto out = run_trials<Index>(25, jobs, [](Index i) { return i * i; });
      REQUIRE(out.size() == 25);
      for (Index i = 0; i < 25; ++i) CHECK(out[std::size_t(i)] == i * i);
    }
    CHECK_THROWS_AS(run_trials<int>(5, 2, [](Index i) -> int { if (i == 3) throw InputError("boom"); return 0; }),
                    InputError);
  }

  TEST_CASE("eigenfunction suite on fixed Grams") {
    PointSet x(2, 1);
    x << 0, 1;
    check_gating(check_eigenfunction(gram(KernelSpec::gaussian(1.0), x), 2));
    PointSet far(4, 1);
    far << 0, 100, 200, 300;
    const SuiteResult id = check_eigenfunction(gram(KernelSpec::gaussian(1.0), far), 4);
    check_gating(id);
    CHECK(id.property("eigen-residual")->worst == 0.0);
    SyntheticDistribution d;
    d.dim = 4;
    check_gating(check_eigenfunction(gram(KernelSpec::gaussian(1.0), d.sample(200)), 20));
  }

  TEST_CASE("deterministic suites hold on short runs") {
    check_gating(check_eigenfunction(small("eigenfunction", 3)));
    check_gating(check_sqrt_perturbation(small("sqrt-perturbation", 20)));
    check_gating(check_ratio_lemma(small("ratio-lemma", 100)));
    check_gating(check_equivalences(small("equivalences", 50)));
    check_gating(check_additive_to_multiplicative(small("additive-to-multiplicative", 50)));
    check_gating(check_h_identities(small("h-identities", 50)));
    TrialConfig rc = small("ratio-to-condition", 4);
    rc.n = 60;
    rc.s_grid = {6, 20, 60};
    check_gating(check_ratio_to_condition(rc));
  }

  TEST_CASE("reported suites produce measurements") {
    const SuiteResult hs = check_appendix_hs_bound(small("appendix-hs-bound", 30));
    CHECK(!hs.properties.empty());
    TrialConfig sc = small("sandwich", 5);
    const SuiteResult sw = check_eigenvalue_sandwich(sc);
    CHECK(sw.measurement("C_Kq_estimate") >= 1.0);
  }

  TEST_CASE("covariance deviation is zero for the same sample") {
    SyntheticDistribution d;
    d.dim = 2;
    const PointSet x = d.sample(80);
    CHECK(covariance_deviation(KernelSpec::gaussian(0.5), x, x) < 1e-12);
    CHECK(covariance_deviation(KernelSpec::gaussian(0.5), x, d.sample(80, 1)) > 0.0);
  }

  TEST_CASE("q = 1 speed-up row is one") {
    TrialConfig c = small("speedup", 1);
    c.n_grid = {120};
    c.q = 1;
    c.s_grid = {40};
    const SuiteResult r = speedup_table(c);
    const Table& t = r.tables.front();
    const auto col = [&](std::string_view name) {
      for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return t.rows.front()[i];
      FAIL("missing column");
      return 0.0;
    };
    CHECK(col("gd_over_pgd") == 1.0);
    CHECK(col("gd_over_npgd") == 1.0);
    CHECK(col("pgd_floats") == 1.0);
    check_gating(r);
  }

  TEST_CASE("suite registry and config validation") {
    CHECK(suite_names().size() == 12);
    for (const auto& name : suite_names()) CHECK_NOTHROW(default_trial_config(name).validate());
    CHECK(is_deterministic_suite("h-identities"));
    CHECK(!is_deterministic_suite("theorem1"));
    CHECK_THROWS_AS(run_suite("nonsense", TrialConfig{}), ConfigError);
    TrialConfig c;
    c.trials = 0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("trials"), ConfigError);
    TrialConfig cc = default_trial_config("concentration");
    cc.trials = 5;
    CHECK_THROWS_AS(concentration_experiment(cc), ConfigError);
  }
}
