#include <cmath>
#include <limits>

#include <doctest.h>

#include "specprec/errors.hpp"
#include "specprec/serialize.hpp"

using namespace specprec;

TEST_SUITE("serialize") {
  TEST_CASE("doubles print in shortest round-trip form") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  }

  TEST_CASE("configs round-trip") {
    KernelSpec k = KernelSpec::laplacian(0.37);
    CHECK(kernel_from_json(to_json(k)) == k);

    SyntheticDistribution d;
    d.kind = DistributionKind::gaussian_mixture;
    d.dim = 7;
    d.seed = 1234567890123ULL;
    d.spread = 0.1;
    CHECK(distribution_from_json(to_json(d)) == d);

    SolverConfig s;
    s.method = Method::npgd;
    s.q = 12;
    s.s = 300;
    s.tau = 1e-6;
    s.step_policy = StepPolicy::explicit_value;
    s.step = 0.123;
    CHECK(solver_config_from_json(to_json(s)) == s);

    TrialConfig t = default_trial_config("theorem1");
    t.s_grid = {3, 9};
    t.universal_c = {0.5};
    CHECK(trial_config_from_json(to_json(t)) == t);
  }

  TEST_CASE("partial json overlays the base") {
    SolverConfig base;
    base.q = 5;
    const SolverConfig c = solver_config_from_json(R"({"tau": 0.01})", base);
    CHECK(c.q == 5);
    CHECK(c.tau == 0.01);
  }

  TEST_CASE("bad json names the field") {
    CHECK_THROWS_WITH_AS(solver_config_from_json(R"({"tua": 0.1})"), doctest::Contains("solver.tua"), ConfigError);
    CHECK_THROWS_WITH_AS(solver_config_from_json(R"({"q": "ten"})"), doctest::Contains("solver.q"), ConfigError);
    CHECK_THROWS_WITH_AS(trial_config_from_json(R"({"distribution": {"dim": "ten"}})"),
                         doctest::Contains("verify.distribution.dim"), ConfigError);
    CHECK_THROWS_AS(kernel_from_json("[1, 2"), ConfigError);
  }

  TEST_CASE("tables and histories as csv") {
    Table t{"demo", {"n", "iterations", "setup_ms"}, {{10, 4, 1.5}, {20, 8, 3.25}}};
    CHECK(table_csv(t) == "n,iterations,setup_ms\n10,4,1.5\n20,8,3.25\n");
    CHECK(table_csv(t, false) == "n,iterations\n10,4\n20,8\n");

    RunReport r;
    r.state.history = {{0, 2.0, 1.0, 0.0}, {1, 1.0, 0.5, 0.25}};
    CHECK(history_csv(r) == "t,hk_error,loss,elapsed_ms\n0,2,1,0\n1,1,0.5,0.25\n");
  }

  TEST_CASE("report json writes NaN as null") {
    RunReport r;
    const std::string j = to_json(r, false);
    CHECK(j.find("\"kappa\": null") != std::string::npos);
    CHECK(j.find("history") == std::string::npos);
  }
}
