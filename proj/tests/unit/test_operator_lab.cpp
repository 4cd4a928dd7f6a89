#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "specprec/errors.hpp"
#include "specprec/linalg.hpp"
#include "specprec/operators.hpp"
#include "specprec/random.hpp"

using namespace specprec;

namespace {

OrthoMatrix diag(std::initializer_list<double> d) {
  Vector v(Index(d.size()));
  Index i = 0;
  for (double x : d) v(i++) = x;
  return {Matrix(v.asDiagonal()), true};
}

Matrix random_symmetric(Index m, Rng& rng) {
  const Matrix a = gaussian_matrix(m, m, rng);
  return 0.5 * (a + a.transpose());
}

GramMatrix random_gram(Index n, std::uint64_t seed) {
  SyntheticDistribution d;
  d.dim = 3;
  d.seed = seed;
  return gram(KernelSpec::gaussian(1.0), d.sample(n));
}

}  // namespace

TEST_SUITE("operator-lab") {
  TEST_CASE("sym_eig") {
    const EigenSystem e = sym_eig(diag({1, 2, 3}).value);
    CHECK(e.values(0) == doctest::Approx(3.0));
    CHECK(e.values(1) == doctest::Approx(2.0));
    CHECK(e.values(2) == doctest::Approx(1.0));

    Vector v = Vector::Ones(4).normalized();
    const Vector r1 = sym_eigenvalues(v * v.transpose());
    CHECK(r1(0) == doctest::Approx(1.0));
    CHECK(r1.tail(3).cwiseAbs().maxCoeff() < 1e-14);

    Rng rng(1);
    const Matrix a = random_symmetric(50, rng);
    const EigenSystem f = sym_eig(a);
    CHECK((f.vectors * f.values.asDiagonal() * f.vectors.transpose() - a).norm() < 1e-8 * a.norm());
    CHECK((f.vectors.transpose() * f.vectors - Matrix::Identity(50, 50)).norm() < 1e-10);

    Matrix asym = a;
    asym(0, 1) += 1.0;
    CHECK_THROWS_AS(sym_eig(asym), InputError);
  }

  TEST_CASE("top eigenpairs agree across methods") {
    const GramMatrix g = random_gram(400, 2);
    const EigenSystem d = top_eigenpairs(g.values(), 10, TopEigenMethod::dense);
    const EigenSystem l = top_eigenpairs(g.values(), 10, TopEigenMethod::lanczos);
    const Vector ref = oracle::singular_values(g.values()).head(10);
    CHECK((d.values - ref).norm() < 1e-10 * ref(0));
    CHECK((l.values - ref).norm() < 1e-9 * ref(0));
    // Same sign convention, so the vectors agree up to round-off for separated eigenvalues.
    CHECK((d.vectors.leftCols(5) - l.vectors.leftCols(5)).norm() < 1e-6);
  }

  TEST_CASE("covariance operator action") {
    const GramMatrix g = random_gram(6, 3);
    const HilbertOperator k = covariance_operator(6);
    Vector e1 = Vector::Zero(6);
    e1(0) = 1.0;
    CHECK((k.apply(e1, g.values()) - g.values().col(0) / 6.0).norm() < 1e-15);
    CHECK((k.action(g.values()) - g.values() / 6.0).norm() < 1e-15);
  }

  TEST_CASE("covariance spectrum for the identity and the two-point Gram") {
    PointSet far(4, 1);
    far << 0, 50, 100, 150;
    const OrthoBasis id = OrthoBasis::symmetric_root(gram(KernelSpec::gaussian(1.0), far));
    const Vector lam = sym_eigenvalues(to_ortho(covariance_operator(4), id).value);
    CHECK((lam - Vector::Constant(4, 0.25)).norm() < 1e-15);

    PointSet x(2, 1);
    x << 0, 1;
    const GramMatrix g = gram(KernelSpec::gaussian(1.0), x);
    const double gh = std::exp(-0.5);
    const OrthoMatrix k = to_ortho(covariance_operator(2), OrthoBasis::symmetric_root(g));
    const Vector l2 = sym_eigenvalues(k.value);
    CHECK(l2(0) == doctest::Approx((1 + gh) / 2).epsilon(1e-14));
    CHECK(l2(1) == doctest::Approx((1 - gh) / 2).epsilon(1e-14));
    CHECK(condition_number(k) == doctest::Approx((1 + gh) / (1 - gh)).epsilon(1e-12));
    CHECK(condition_number(k) == doctest::Approx(4.0829).epsilon(1e-4));
  }

  TEST_CASE("to_ortho of the covariance is (1/n) G in the symmetric root basis") {
    const GramMatrix g = random_gram(30, 4);
    const OrthoBasis r = OrthoBasis::symmetric_root(g);
    CHECK((r.coords() * r.coords().transpose() - g.values()).norm() < 1e-10);
    CHECK((to_ortho(covariance_operator(30), r).value - g.values() / 30.0).norm() < 1e-10);

    HilbertOperator ident{{}, Matrix(), 1.0};
    CHECK((to_ortho(ident, r).value - Matrix::Identity(30, 30)).norm() < 1e-15);

    const Vector ref = oracle::singular_values(g.values() / 30.0);
    const Vector via_eigen = sym_eigenvalues(to_ortho(covariance_operator(30), OrthoBasis::eigen(g)).value);
    CHECK((via_eigen - ref.head(via_eigen.size())).norm() < 1e-12);
  }

  TEST_CASE("action-matrix and weight-form images agree") {
    const GramMatrix g = random_gram(25, 5);
    const OrthoBasis b = OrthoBasis::eigen(g);
    const HilbertOperator sub = subsample_covariance_operator(std::vector<Index>{1, 4, 7, 9});
    const OrthoMatrix w = to_ortho(sub, b);
    const OrthoMatrix a = to_ortho(sub.action(g.values()), b, true);
    CHECK((w.value - a.value).norm() < 1e-10);
  }

  TEST_CASE("pivoted Cholesky basis spans the points") {
    SyntheticDistribution d;
    d.dim = 1;
    const PointSet x = d.sample(200);
    const KernelSpec k = KernelSpec::gaussian(0.3);
    const OrthoBasis b = OrthoBasis::pivoted_cholesky(k, x, 1e-12);
    CHECK(b.rank() < 200);
    CHECK(b.truncation() <= 1e-12);
    CHECK((b.coords() * b.coords().transpose() - gram(k, x).values()).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("norms") {
    const OrthoMatrix a = diag({3, -4});
    CHECK(op_norm(a) == doctest::Approx(4.0));
    CHECK(hs_norm(a) == doctest::Approx(5.0));
    const OrthoMatrix z{Matrix::Zero(3, 3), true};
    CHECK(op_norm(z) == 0.0);
    CHECK(hs_norm(z) == 0.0);
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
      const OrthoMatrix r = OrthoMatrix::general(gaussian_matrix(20, 20, rng));
      CHECK(op_norm(r) <= hs_norm(r));
      CHECK(op_norm(r) == doctest::Approx(oracle::singular_values(r.value)(0)).epsilon(1e-12));
    }
  }

  TEST_CASE("condition number uses the null-space complement") {
    CHECK(condition_number(diag({4, 2, 1})) == doctest::Approx(4.0));
    CHECK(condition_number(diag({4, 2, 0})) == doctest::Approx(2.0));
    CHECK(condition_number(diag({-4, 2, 1e-12})) == doctest::Approx(2.0));
  }

  TEST_CASE("thresholding") {
    const OrthoMatrix h2 = threshold_h(diag({3, 1}), 2.0);
    CHECK((h2.value - diag({3, 2}).value).norm() == 0.0);
    const OrthoMatrix h0 = threshold_h(diag({1, -1}), 0.0);
    CHECK((h0.value - diag({1, 0}).value).norm() == 0.0);

    // Null-space directions of a rank-deficient eigensystem are lifted to alpha.
    EigenSystem e{Vector::Constant(1, 5.0), Matrix::Identity(3, 1)};
    CHECK((threshold_h(e, 0.5, 3).value - diag({5, 0.5, 0.5}).value).norm() < 1e-15);

    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
      const OrthoMatrix a = OrthoMatrix::self_adjoint(random_symmetric(8, rng));
      const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const OrthoMatrix lhs = threshold_h(a, alpha);
      const OrthoMatrix rhs = threshold_h(a - alpha * OrthoMatrix::identity(8), 0.0) + alpha * OrthoMatrix::identity(8);
      CHECK((lhs.value - rhs.value).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("square root and absolute value") {
    const OrthoMatrix s = sqrt_psd(diag({4, 9}));
    CHECK((s.value - diag({2, 3}).value).norm() < 1e-15);

    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
      const Matrix b = gaussian_matrix(12, 12, rng);
      const OrthoMatrix a = OrthoMatrix::self_adjoint(b * b.transpose());
      const OrthoMatrix r = sqrt_psd(a);
      CHECK((r * r).value.isApprox(a.value, 1e-9));
      CHECK(oracle::rel_diff(r.value, oracle::psd_sqrt(a.value)) < 1e-9);

      const OrthoMatrix sym = OrthoMatrix::self_adjoint(random_symmetric(12, rng));
      const OrthoMatrix pos = 0.5 * (sym + abs_op(sym));
      CHECK((pos.value - threshold_h(sym, 0.0).value).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK_THROWS_AS(sqrt_psd(diag({1, -1})), NotPsdError);
  }

  TEST_CASE("inverse") {
    const OrthoMatrix a = diag({2, -4});
    CHECK((inverse(a).value - diag({0.5, -0.25}).value).norm() < 1e-15);
  }

  TEST_CASE("population proxy") {
    SyntheticDistribution d;
    d.dim = 2;
    const KernelSpec k = KernelSpec::gaussian(0.5);
    const PopulationProxy p = population_proxy(d, 2000, k);
    for (Index i = 1; i < p.eigenvalues.size(); ++i) CHECK(p.eigenvalues(i) <= p.eigenvalues(i - 1));
    CHECK(p.eigenvalues(0) <= beta(k));

    ProxyOptions small;
    small.consumer_n = 500;
    CHECK_THROWS_AS(population_proxy(d, 2000, k, small), InputError);
  }

  TEST_CASE("proxies at N and 2N agree within the concentration bound") {
    SyntheticDistribution d;
    d.dim = 2;
    const KernelSpec k = KernelSpec::gaussian(0.5);
    const Index n = 1000;
    const double bound = 2.0 * 4.0 * std::sqrt(2.0 * std::log(4.0 / 0.1) / double(n));
    int ok = 0;
    const int trials = 10;
    for (int t = 0; t < trials; ++t) {
      d.seed = std::uint64_t(t);
      ProxyOptions o;
      o.top_k = 1;
      const double a = population_proxy(d, n, k, o).eigenvalues(0);
      o.stream = 77;
      const double b = population_proxy(d, 2 * n, k, o).eigenvalues(0);
      ok += std::abs(a - b) <= bound;
    }
    CHECK(ok >= 9);
  }

  TEST_CASE("condition_info flags differing null spaces") {
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 4, 2, 0;
    const ConditionInfo sym = condition_info(OrthoMatrix::self_adjoint(d));
    CHECK(sym.kappa == doctest::Approx(2.0));
    CHECK(sym.rank == 2);
    CHECK_FALSE(sym.nullspaces_differ);

    // e1 e2^T: range e1, co-range e2, so the null spaces are orthogonal complements of different lines.
    Matrix shift = Matrix::Zero(2, 2);
    shift(0, 1) = 1.0;
    const ConditionInfo nil = condition_info(OrthoMatrix::general(shift));
    CHECK(nil.rank == 1);
    CHECK(nil.kappa == 1.0);
    CHECK(nil.nullspace_mismatch == doctest::Approx(1.0));
    CHECK(nil.nullspaces_differ);

    // A non-symmetric but invertible operator has trivial null spaces on both sides.
    Matrix up(2, 2);
    up << 2, 1, 0, 1;
    const ConditionInfo inv = condition_info(OrthoMatrix::general(up));
    CHECK(inv.rank == 2);
    CHECK_FALSE(inv.nullspaces_differ);
  }
}
