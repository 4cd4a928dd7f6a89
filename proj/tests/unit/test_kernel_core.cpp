#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "specprec/dataset.hpp"
#include "specprec/errors.hpp"
#include "specprec/kernel.hpp"
#include "specprec/random.hpp"

using namespace specprec;

namespace {

const double g_half = std::exp(-0.5);

GramMatrix two_point_gram() {
  PointSet x(2, 1);
  x << 0.0, 1.0;
  return gram(KernelSpec::gaussian(1.0), x);
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_SUITE("kernel-core") {
  TEST_CASE("kernel closed forms") {
    const std::vector<double> zero{0.0}, one{1.0};
    CHECK(eval_kernel(KernelSpec::gaussian(1.0), zero, zero) == 1.0);
    CHECK(eval_kernel(KernelSpec::gaussian(1.0), zero, one) == doctest::Approx(0.60653066).epsilon(1e-8));
    const std::vector<double> o2{0.0, 0.0}, p{3.0, 4.0};
    CHECK(eval_kernel(KernelSpec::laplacian(1.0), o2, p) == doctest::Approx(std::exp(-7.0)).epsilon(1e-14));
  }

  TEST_CASE("beta is one for every family and bandwidth") {
    CHECK(beta(KernelSpec::gaussian(1.0)) == 1.0);
    CHECK(beta(KernelSpec::laplacian(1.0)) == 1.0);
    CHECK(beta(KernelSpec::gaussian(37.5)) == 1.0);
  }

  TEST_CASE("invalid bandwidth is rejected") {
    CHECK_THROWS_AS(KernelSpec::gaussian(0.0).validate(), InputError);
    CHECK_THROWS_AS(KernelSpec::laplacian(-1.0).validate(), InputError);
    CHECK_THROWS_AS(KernelSpec::gaussian(std::nan("")).validate(), InputError);
  }

  TEST_CASE("gram of two points") {
    const GramMatrix g = two_point_gram();
    CHECK(g(0, 0) == 1.0);
    CHECK(g(0, 1) == doctest::Approx(g_half).epsilon(1e-14));
    CHECK(g(1, 0) == g(0, 1));

    PointSet same(2, 2);
    same << 0.5, 0.5, 0.5, 0.5;
    std::string warned;
    GramOptions opt;
    opt.warn = [&](std::string_view m) { warned = std::string(m); };
    const GramMatrix d = gram(KernelSpec::gaussian(1.0), same, opt);
    CHECK(d.values() == Matrix::Ones(2, 2));
    CHECK(d.duplicate_pairs().size() == 1);
    CHECK(!warned.empty());
  }

  TEST_CASE("gram matches the naive oracle and cross_gram(A, A)") {
    Rng rng(3);
    const PointSet x = gaussian_matrix(40, 3, rng);
    const KernelSpec k = KernelSpec::gaussian(0.8);
    const GramMatrix g = gram(k, x);
    CHECK(oracle::rel_diff(g.values(), oracle::gaussian_gram(x, 0.8)) < 1e-14);
    CHECK(g.values() == g.values().transpose());
    CHECK(oracle::rel_diff(cross_gram(k, x, x), g.values()) < 1e-15);

    GramOptions par;
    par.jobs = 4;
    CHECK(gram(k, x, par).values() == g.values());
  }

  TEST_CASE("min-norm interpolant") {
    PointSet far(3, 1);
    far << 0.0, 100.0, 200.0;
    const GramMatrix id = gram(KernelSpec::gaussian(1.0), far);
    Vector y(3);
    y << 1.0, -2.0, 0.5;
    CHECK((min_norm_interpolant(id, y) - y).norm() < 1e-15);

    const GramMatrix g = two_point_gram();
    Vector y2(2);
    y2 << 1.0, 0.0;
    const Vector a = min_norm_interpolant(g, y2);
    const double det = 1.0 - g_half * g_half;
    CHECK(a(0) == doctest::Approx(1.0 / det).epsilon(1e-12));
    CHECK(a(1) == doctest::Approx(-g_half / det).epsilon(1e-12));
    CHECK((g.values() * a - y2).norm() < 1e-10);
  }

  TEST_CASE("singular Gram raises SingularityError") {
    PointSet same(2, 1);
    same << 1.0, 1.0;
    GramOptions quiet;
    quiet.warn = [](std::string_view) {};
    const GramMatrix g = gram(KernelSpec::gaussian(1.0), same, quiet);
    CHECK_THROWS_AS(min_norm_interpolant(g, Vector::Ones(2)), SingularityError);
  }

  TEST_CASE("csv load, save and duplicates") {
    const auto path = temp_file("specprec_three.csv", "a,b,target\n0,1,2\n1,1,3\n2,0.5,-1\n");
    const Dataset d = load_csv(path);
    CHECK(d.size() == 3);
    CHECK(d.dim() == 2);
    CHECK(d.targets()(2) == -1.0);
    CHECK(d.provenance().kind == Provenance::Kind::file);

    const auto copy = std::filesystem::temp_directory_path() / "specprec_three_copy.csv";
    save_csv(d, copy);
    const Dataset e = load_csv(copy);
    CHECK(e.points() == d.points());
    CHECK(e.targets() == d.targets());

    const auto dup = temp_file("specprec_dup.csv", "x,target\n0.5,1\n0.25,2\n0.5,3\n");
    try {
      load_csv(dup);
      FAIL("expected InputError");
    } catch (const InputError& err) {
      const std::string m = err.what();
      CHECK(m.find("2") != std::string::npos);
      CHECK(m.find("4") != std::string::npos);
    }
    CHECK_THROWS_AS(load_csv(temp_file("specprec_bad.csv", "x,y\n1,2\n")), InputError);
    CHECK_THROWS_AS(load_csv(temp_file("specprec_ragged.csv", "x,target\n1,2,3\n")), InputError);
    CHECK_THROWS_AS(load_csv("/nonexistent/specprec.csv"), InputError);
  }

  TEST_CASE("duplicate points in a dataset name both rows") {
    PointSet x(3, 1);
    x << 0.0, 1.0, 0.0;
    CHECK_THROWS_WITH_AS(Dataset(x, Vector::Zero(3), {}), doctest::Contains("rows 0 and 2"), InputError);
  }

  TEST_CASE("generation is a pure function of the seed") {
    SyntheticDistribution dist;
    dist.dim = 3;
    dist.seed = 11;
    for (const auto rule : {TargetRule::random_rkhs_function, TargetRule::linear, TargetRule::noisy_sin}) {
      GenerateOptions opt;
      opt.rule = rule;
      const Dataset a = generate(dist, 50, opt);
      const Dataset b = generate(dist, 50, opt);
      CHECK(a.points() == b.points());
      CHECK(a.targets() == b.targets());
    }
    CHECK(dist.sample(20, 0) != dist.sample(20, 1));

    dist.kind = DistributionKind::gaussian_mixture;
    CHECK(dist.sample(10, 2) == dist.sample(10, 2));
    dist.components = 0;
    CHECK_THROWS_AS(dist.validate(), InputError);
  }

  TEST_CASE("uniform samples stay in the hypercube") {
    SyntheticDistribution dist;
    dist.dim = 4;
    dist.low = -2.0;
    dist.high = 3.0;
    const PointSet x = dist.sample(500);
    CHECK(x.minCoeff() >= -2.0);
    CHECK(x.maxCoeff() <= 3.0);
  }

  TEST_CASE("enum names round-trip") {
    for (const auto k : {DistributionKind::uniform_hypercube, DistributionKind::isotropic_gaussian,
                         DistributionKind::gaussian_mixture})
      CHECK(distribution_kind_from_string(to_string(k)) == k);
    for (const auto r : {TargetRule::random_rkhs_function, TargetRule::linear, TargetRule::noisy_sin})
      CHECK(target_rule_from_string(to_string(r)) == r);
    CHECK(kernel_family_from_string("laplacian") == KernelFamily::laplacian);
    CHECK_THROWS_AS(kernel_family_from_string("cauchy"), InputError);
  }

  TEST_CASE("derive_seed separates streams") {
    CHECK(derive_seed(0, 0) != derive_seed(0, 1));
    CHECK(derive_seed(1, 0) != derive_seed(0, 1));
    CHECK(derive_seed(5, 7) == derive_seed(5, 7));
  }
}
