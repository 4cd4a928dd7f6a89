#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "specprec/errors.hpp"
#include "specprec/precond.hpp"
#include "specprec/solvers.hpp"
#include "verify_internal.hpp"

namespace specprec {

namespace detail {

namespace {

PropertyResult make_property(std::string name, const Tally& tally, std::string detail, bool gating) {
  PropertyResult p;
  p.name = std::move(name);
  p.gating = gating;
  p.checked = tally.checked;
  p.violations = tally.violations;
  p.worst = tally.worst;
  p.passed = tally.violations == 0;
  p.detail = std::move(detail);
  if (tally.violations > 0) p.detail += "; first violation: " + tally.first_failure;
  return p;
}

}  // namespace

PropertyResult gating_property(std::string name, const Tally& tally, std::string detail) {
  return make_property(std::move(name), tally, std::move(detail), true);
}

PropertyResult reported_property(std::string name, const Tally& tally, std::string detail) {
  return make_property(std::move(name), tally, std::move(detail), false);
}

PropertyResult fraction_property(std::string name, Index successes, Index trials, double target, std::string detail) {
  PropertyResult p;
  p.name = std::move(name);
  p.gating = false;
  p.checked = trials;
  p.violations = trials - successes;
  p.fraction = success_fraction(successes, trials, target);
  p.worst = p.fraction->value();
  p.passed = p.fraction->consistent();
  p.detail = std::move(detail);
  return p;
}

Matrix random_invertible_symmetric(Index m, bool indefinite, Rng& rng) {
  Vector spectrum = log_uniform_spectrum(m, 1e-3, 1.0, rng);
  if (indefinite) {
    std::bernoulli_distribution flip(0.5);
    for (Index i = 0; i < m; ++i)
      if (flip(rng)) spectrum(i) = -spectrum(i);
  }
  return random_symmetric_with_spectrum(spectrum, rng);
}

Matrix random_unit_symmetric(Index m, Rng& rng) {
  const Matrix g = gaussian_matrix(m, m, rng);
  const Matrix s = 0.5 * (g + g.transpose());
  return s / sym_eigenvalues(s).cwiseAbs().maxCoeff();
}

Matrix random_psd(Index m, Index rank, Rng& rng) {
  const Matrix q = random_orthogonal(m, rng);
  const Vector spectrum = log_uniform_spectrum(rank, 1e-3, 1.0, rng);
  const Matrix out = q.leftCols(rank) * spectrum.asDiagonal() * q.leftCols(rank).transpose();
  return 0.5 * (out + out.transpose());
}

Matrix positive_part(const Matrix& a) {
  const EigenSystem e = sym_eig(0.5 * (a + a.transpose()));
  const Matrix out = e.vectors * e.values.cwiseMax(0.0).asDiagonal() * e.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix random_directions(Index m, Index count, Rng& rng) {
  Matrix f = gaussian_matrix(m, count, rng);
  f.colwise().normalize();
  return f;
}

Index psd_rank(const Vector& eigenvalues) {
  const double top = eigenvalues.maxCoeff();
  if (!(top > 0.0)) return 0;
  return Index((eigenvalues.array() > 1e-12 * top).count());
}

double multiplicative_gap(const Matrix& a, const Matrix& a_inv, const Matrix& b, const Matrix& b_inv) {
  return std::max(singular_values(a * b_inv)(0), singular_values(b * a_inv)(0));
}

KernelTrial kernel_trial(const TrialConfig& config, Index n, std::uint64_t stream) {
  PointSet points = config.distribution.sample(n, stream);
  GramOptions opts;
  opts.warn = [](std::string_view) {};
  GramMatrix g = gram(config.kernel, points, opts);
  OrthoBasis basis = OrthoBasis::eigen(g);
  OrthoMatrix cov = governing_operator(basis);
  return {std::move(points), std::move(g), std::move(basis), std::move(cov)};
}

OrthoMatrix subsample_covariance(const KernelTrial& trial, std::span<const Index> indices) {
  const Matrix& r = trial.basis.coords();
  Matrix rs(Index(indices.size()), r.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) rs.row(Index(i)) = r.row(indices[i]);
  return OrthoMatrix::self_adjoint(rs.transpose() * rs / double(indices.size()));
}

}  // namespace detail

using namespace detail;

namespace {

std::string describe(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [k, v] : items) {
    os << (first ? "" : ", ") << k << "=" << v;
    first = false;
  }
  return os.str();
}

double log_uniform(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

Index uniform_index(Index lo, Index hi, Rng& rng) {
  std::uniform_int_distribution<Index> u(lo, hi);
  return u(rng);
}

struct EigenTallies {
  Tally residual;
  Tally orthonormality;
};

EigenTallies eigen_tallies(const Matrix& g, Index q) {
  const Index n = g.rows();
  const Eigenfunctions ef = top_q_eigenfunctions(g, q);
  const double top = ef.values(0);
  EigenTallies out;
  for (Index i = 0; i < q; ++i) {
    const Vector c = ef.coeffs.col(i);
    const Vector d = g * c / double(n) - ef.values(i) * c;
    const double res = std::sqrt(std::max(d.dot(g * d), 0.0)) / top;
    out.residual.check(res <= 1e-8, res, describe({{"pair", double(i + 1)}, {"relative residual", res}}));
  }
  const Matrix gram_c = ef.coeffs.transpose() * g * ef.coeffs - Matrix::Identity(q, q);
  const double orth = gram_c.cwiseAbs().maxCoeff();
  out.orthonormality.check(orth <= 1e-8, orth, describe({{"max |C^T G C - I|", orth}}));
  return out;
}

SuiteResult eigen_result(const EigenTallies& t) {
  SuiteResult r;
  r.name = "eigenfunction";
  r.properties.push_back(
      gating_property("eigen-residual", t.residual, "|K psi - lambda psi|_H <= 1e-8 lambda_1 for each top-q pair"));
  r.properties.push_back(
      gating_property("h-orthonormality", t.orthonormality, "c_i^T G c_j = delta_ij to 1e-8"));
  r.measure("max_relative_residual", t.residual.worst);
  r.measure("max_orthonormality_error", t.orthonormality.worst);
  return r;
}

}  // namespace

SuiteResult check_eigenfunction(const GramMatrix& gram, Index q) {
  const auto start = Clock::now();
  SuiteResult r = eigen_result(eigen_tallies(gram.values(), q));
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult check_eigenfunction(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto outcomes = run_trials<EigenTallies>(config.trials, config.jobs, [&](Index t) {
    Rng rng(derive_seed(config.seed, std::uint64_t(t)));
    const Index n = uniform_index(std::min<Index>(config.n, std::max<Index>(config.q, 20)), config.n, rng);
    GramOptions opts;
    opts.warn = [](std::string_view) {};
    const GramMatrix g = gram(config.kernel, config.distribution.sample(n, derive_seed(config.seed, 1000 + t)), opts);
    return eigen_tallies(g.values(), std::min(config.q, n));
  });
  EigenTallies total;
  for (const auto& o : outcomes) {
    total.residual.merge(o.residual);
    total.orthonormality.merge(o.orthonormality);
  }
  SuiteResult r = eigen_result(total);
  r.measure("trials", double(config.trials));
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult check_sqrt_perturbation(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  struct Outcome {
    Tally kernel;
    Tally random;
    bool event = false;
  };
  const double beta_k = beta(config.kernel);
  auto check_pair = [](const Matrix& a, const Matrix& b, Tally& tally, double* lhs_out) {
    const OrthoMatrix oa = OrthoMatrix::self_adjoint(a), ob = OrthoMatrix::self_adjoint(b);
    const double lhs = op_norm(sqrt_psd(oa) - sqrt_psd(ob));
    const double rhs = std::sqrt(op_norm(oa - ob));
    // Eigenvalues at rounding level have square roots near sqrt(machine eps).
    const double slack = 1e-7 * std::sqrt(std::max(op_norm(oa), op_norm(ob)));
    const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > slack ? INFINITY : 0.0);
    tally.check(lhs <= rhs * (1.0 + 1e-9) + slack, ratio, describe({{"lhs", lhs}, {"rhs", rhs}}));
    if (lhs_out) *lhs_out = lhs;
  };
  const auto outcomes = run_trials<Outcome>(config.trials, config.jobs, [&](Index t) {
    const std::uint64_t seed_t = derive_seed(config.seed, std::uint64_t(t));
    Outcome o;
    const KernelTrial trial = kernel_trial(config, config.n, seed_t);
    Index s = config.s_grid.empty() ? std::max<Index>(1, config.n / 4)
                                    : config.s_grid[std::size_t(t) % config.s_grid.size()];
    s = std::min(s, config.n);
    const NystromSample sample = nystrom_sample(config.n, s, SamplingPolicy::uniform, derive_seed(seed_t, 1));
    const OrthoMatrix sub = subsample_covariance(trial, sample.indices);
    double lhs = 0.0;
    check_pair(trial.covariance.value, sub.value, o.kernel, &lhs);
    const double bound = 2.0 * std::sqrt(beta_k * std::sqrt(2.0 / double(s) * std::log(4.0 / config.delta)));
    o.event = lhs <= bound;

    Rng rng(derive_seed(seed_t, 2));
    const Index m = config.matrix_dim;
    const Matrix a = random_psd(m, uniform_index(1, m, rng), rng);
    const Matrix b = t % 2 == 0 ? positive_part(a + log_uniform(1e-4, 1.0, rng) * random_unit_symmetric(m, rng))
                                : random_psd(m, uniform_index(1, m, rng), rng);
    check_pair(a, b, o.random, nullptr);
    return o;
  });
  Tally kernel, random;
  Index events = 0;
  for (const auto& o : outcomes) {
    kernel.merge(o.kernel);
    random.merge(o.random);
    events += o.event ? 1 : 0;
  }
  SuiteResult r;
  r.name = "sqrt-perturbation";
  r.properties.push_back(gating_property("covariance-pairs", kernel,
                                         "|sqrt(K) - sqrt(K')| <= sqrt(|K - K'|) for K over X_n, K' over a subsample"));
  r.properties.push_back(
      gating_property("random-psd-pairs", random, "|sqrt(A) - sqrt(B)| <= sqrt(|A - B|) for random PSD A, B"));
  r.properties.push_back(fraction_property("subsample-bound", events, config.trials, 1.0 - config.delta,
                                           "|sqrt(K) - sqrt(K')| <= 2 sqrt(beta sqrt(2/s log(4/delta)))"));
  r.measure("max_lhs_over_rhs_covariance", kernel.worst);
  r.measure("max_lhs_over_rhs_random", random.worst);
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult check_ratio_lemma(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index m = config.matrix_dim;
  const auto outcomes = run_trials<Tally>(config.trials, config.jobs, [&](Index t) {
    Rng rng(derive_seed(config.seed, std::uint64_t(t)));
    const Matrix a = random_invertible_symmetric(m, t % 2 == 1, rng);
    const Matrix b = t % 10 == 0 ? a : Matrix(a + log_uniform(1e-4, 1.0, rng) * random_unit_symmetric(m, rng));
    const double lambda_min = std::min(singular_values(a)(m - 1), singular_values(b)(m - 1));
    const double eps = singular_values(a - b)(0);
    const double c = 1.0 + eps / lambda_min;
    const Matrix f = random_directions(m, 100, rng);
    const Vector af = (a * f).colwise().norm(), bf = (b * f).colwise().norm();
    Tally tally;
    for (Index j = 0; j < f.cols(); ++j) {
      const double ratio = af(j) / bf(j);
      const bool ok = ratio <= c * (1.0 + 1e-10) && ratio >= (1.0 - 1e-10) / c;
      const double tightness = c > 1.0 ? std::abs(std::log(ratio)) / std::log(c) : (ratio == 1.0 ? 0.0 : INFINITY);
      tally.check(ok, tightness, describe({{"ratio", ratio}, {"bound", c}}));
    }
    return tally;
  });
  Tally total;
  for (const auto& o : outcomes) total.merge(o);
  SuiteResult r;
  r.name = "ratio-lemma";
  r.properties.push_back(gating_property(
      "ratio-bound", total, "(1 + eps/lambda_min)^-1 |Bf| <= |Af| <= (1 + eps/lambda_min) |Bf| for sampled f"));
  r.measure("max_log_ratio_over_log_bound", total.worst);
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult check_equivalences(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index m = config.matrix_dim;
  struct Outcome {
    Tally c2_c3, c1, c4, attained;
  };
  const auto outcomes = run_trials<Outcome>(config.trials, config.jobs, [&](Index t) {
    Rng rng(derive_seed(config.seed, std::uint64_t(t)));
    const Matrix a = random_invertible_symmetric(m, t % 2 == 1, rng);
    Matrix b;
    switch (t % 3) {
      case 0: b = random_invertible_symmetric(m, t % 4 == 0, rng); break;
      case 1: {
        const Matrix e = random_unit_symmetric(m, rng);
        double tau = log_uniform(1e-4, 1.0, rng);
        b = a + tau * e;
        while (singular_values(b)(m - 1) < 1e-6) {
          tau *= 0.5;
          b = a + tau * e;
        }
        break;
      }
      default: b = a;
    }
    const Matrix a_inv = inverse(OrthoMatrix::self_adjoint(a)).value;
    const Matrix b_inv = inverse(OrthoMatrix::self_adjoint(b)).value;
    const Matrix ab = a * b_inv, ba = b * a_inv;
    const double n_ab = singular_values(ab)(0), n_ba = singular_values(ba)(0);
    const double c2 = std::max(n_ab, n_ba);
    const double c3 = std::max(singular_values(b_inv * a)(0), singular_values(a_inv * b)(0));
    Outcome o;
    const double rel = std::abs(c2 - c3) / c2;
    o.c2_c3.check(rel <= 1e-8, rel, describe({{"c2", c2}, {"c3", c3}}));

    const Matrix f = random_directions(m, 50, rng);
    const Vector af = (a * f).colwise().norm(), bf = (b * f).colwise().norm();
    const Vector aif = (a_inv * f).colwise().norm(), bif = (b_inv * f).colwise().norm();
    double c1 = 0.0, c4 = 0.0;
    for (Index j = 0; j < f.cols(); ++j) {
      c1 = std::max({c1, af(j) / bf(j), bf(j) / af(j)});
      c4 = std::max({c4, aif(j) / bif(j), bif(j) / aif(j)});
    }
    o.c1.check(c1 <= c2 * (1.0 + 1e-10), c1 / c2, describe({{"c1", c1}, {"c2", c2}}));
    o.c4.check(c4 <= c2 * (1.0 + 1e-10), c4 / c2, describe({{"c4", c4}, {"c2", c2}}));

    // The supremum defining c2 is attained at f = B^-1 v (or A^-1 v), v the top right
    // singular vector of A B^-1 (or B A^-1).
    const bool use_ab = n_ab >= n_ba;
    Eigen::JacobiSVD<Matrix> svd(use_ab ? ab : ba, Eigen::ComputeFullV);
    const Vector v = svd.matrixV().col(0);
    const Vector best = (use_ab ? b_inv : a_inv) * v;
    const double attained = use_ab ? (a * best).norm() / (b * best).norm() : (b * best).norm() / (a * best).norm();
    const double gap = std::abs(attained - c2) / c2;
    o.attained.check(gap <= 1e-8, gap, describe({{"attained", attained}, {"c2", c2}}));
    return o;
  });
  Outcome total;
  for (const auto& o : outcomes) {
    total.c2_c3.merge(o.c2_c3);
    total.c1.merge(o.c1);
    total.c4.merge(o.c4);
    total.attained.merge(o.attained);
  }
  SuiteResult r;
  r.name = "equivalences";
  r.properties.push_back(gating_property("c2-equals-c3", total.c2_c3,
                                         "max(|AB^-1|, |BA^-1|) = max(|B^-1A|, |A^-1B|) to 1e-8 relative"));
  r.properties.push_back(gating_property("sampled-c1-below-c2", total.c1,
                                         "max over sampled f of |Af|/|Bf| and |Bf|/|Af| stays below c2"));
  r.properties.push_back(gating_property("sampled-c4-below-c2", total.c4,
                                         "same for the inverses A^-1, B^-1"));
  r.properties.push_back(gating_property("c2-attained", total.attained,
                                         "the ratio at f = B^-1 v equals c2 to 1e-8 relative"));
  r.measure("max_c2_c3_relative_gap", total.c2_c3.worst);
  r.elapsed_ms = ms_since(start);
  return r;
}

namespace {

struct PsdPair {
  Matrix v, w;
  Index q;
};

// Mix of identical, independent and perturbed finite-rank PSD pairs.
PsdPair random_psd_pair(Index m, Index t, Rng& rng) {
  const Index max_rank = std::min<Index>(30, m);
  const Index rank = uniform_index(1, max_rank, rng);
  PsdPair p;
  p.v = random_psd(m, rank, rng);
  const Index mode = t % 10;
  if (mode == 0) {
    p.w = p.v;
  } else if (mode <= 3) {
    p.w = random_psd(m, uniform_index(1, max_rank, rng), rng);
  } else {
    p.w = positive_part(p.v + log_uniform(1e-4, 1.0, rng) * random_unit_symmetric(m, rng));
  }
  const Index common = std::min(psd_rank(sym_eigenvalues(p.v)), psd_rank(sym_eigenvalues(p.w)));
  p.q = uniform_index(1, std::max<Index>(common, 1), rng);
  return p;
}

// Sampled-direction and supremum checks of |Xf| / |Yf| in [(1+e)^-1, 1+e].
void check_multiplicative(const Matrix& x, const Matrix& x_inv, const Matrix& y, const Matrix& y_inv, double e,
                          Rng& rng, Tally& sampled, Tally& supremum) {
  const double c = 1.0 + e;
  const Matrix f = random_directions(x.rows(), 50, rng);
  const Vector xf = (x * f).colwise().norm(), yf = (y * f).colwise().norm();
  for (Index j = 0; j < f.cols(); ++j) {
    const double ratio = xf(j) / yf(j);
    sampled.check(ratio <= c * (1.0 + 1e-10) && ratio >= (1.0 - 1e-10) / c, ratio,
                  describe({{"ratio", ratio}, {"bound", c}}));
  }
  const double gap = multiplicative_gap(x, x_inv, y, y_inv);
  supremum.check(gap <= c * (1.0 + 1e-10), e > 0.0 ? (gap - 1.0) / e : gap - 1.0,
                 describe({{"sup ratio", gap}, {"bound", c}}));
}

}  // namespace

SuiteResult check_additive_to_multiplicative(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index m = config.matrix_dim;
  struct Outcome {
    Tally floor, sampled, supremum;
    double constant = -1.0;
  };
  const auto outcomes = run_trials<Outcome>(config.trials, config.jobs, [&](Index t) {
    Rng rng(derive_seed(config.seed, std::uint64_t(t)));
    const PsdPair pair = random_psd_pair(m, t, rng);
    const EigenSystem ev = sym_eig(pair.v), ew = sym_eig(pair.w);
    const double nu = ev.values(pair.q - 1), nu_w = ew.values(pair.q - 1);
    const Matrix c_inv = threshold_h(ev, nu, m).value / nu;
    const Matrix cw_inv = threshold_h(ew, nu_w, m).value / nu_w;
    const Matrix c = inverse(OrthoMatrix::self_adjoint(c_inv)).value;
    const Matrix cw = inverse(OrthoMatrix::self_adjoint(cw_inv)).value;
    const double eps0 = op_norm(OrthoMatrix::self_adjoint(c_inv - cw_inv));
    Outcome o;
    const double low = std::min(sym_eigenvalues(c_inv).minCoeff(), sym_eigenvalues(cw_inv).minCoeff());
    o.floor.check(low >= 1.0 - 1e-12, 1.0 - low, describe({{"min eigenvalue of C^-1", low}}));
    check_multiplicative(c, c_inv, cw, cw_inv, eps0, rng, o.sampled, o.supremum);

    const double dv = op_norm(OrthoMatrix::self_adjoint(pair.v - pair.w));
    if (dv > 0.0) {
      const double ranks = double(psd_rank(ev.values) + psd_rank(ew.values));
      const double scale = dv / nu * (1.0 + ew.values(0) / nu_w) * std::log(ranks + 1.0);
      o.constant = eps0 / scale;
    }
    return o;
  });
  Outcome total;
  std::vector<double> constants;
  for (const auto& o : outcomes) {
    total.floor.merge(o.floor);
    total.sampled.merge(o.sampled);
    total.supremum.merge(o.supremum);
    if (o.constant >= 0.0) constants.push_back(o.constant);
  }
  SuiteResult r;
  r.name = "additive-to-multiplicative";
  r.properties.push_back(gating_property("inverse-floor", total.floor, "eigenvalues of h_nu(V)/nu are >= 1"));
  r.properties.push_back(gating_property("sampled-ratio", total.sampled,
                                         "|Cf| / |C'f| in [(1+eps0)^-1, 1+eps0], eps0 = |C^-1 - C'^-1|"));
  r.properties.push_back(gating_property("supremum-ratio", total.supremum,
                                         "max(|C C'^-1|, |C' C^-1|) <= 1 + eps0"));
  if (!constants.empty()) {
    std::sort(constants.begin(), constants.end());
    r.measure("empirical_constant_max", constants.back());
    r.measure("empirical_constant_median", constants[constants.size() / 2]);
    r.notes.push_back("empirical_constant = eps0 / (|V - V'| / nu_q (1 + |V'| / nu'_q) log(rk V + rk V' + 1)); "
                      "any universal constant must be at least its maximum");
  }
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult check_appendix_hs_bound(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index m = config.matrix_dim;
  struct Outcome {
    Tally sampled, supremum;
  };
  const auto outcomes = run_trials<Outcome>(config.trials, config.jobs, [&](Index t) {
    Rng rng(derive_seed(config.seed ^ 0xa99e0d1cULL, std::uint64_t(t)));
    const PsdPair pair = random_psd_pair(m, t, rng);
    const EigenSystem ek = sym_eig(pair.v), ew = sym_eig(pair.w);
    const double lam = ek.values(pair.q - 1), lam_w = ew.values(pair.q - 1);
    const Matrix p_inv = threshold_h(ek, lam, m).value / lam;
    const Matrix pw_inv = threshold_h(ew, lam_w, m).value / lam_w;
    const Matrix p = inverse(OrthoMatrix::self_adjoint(p_inv)).value;
    const Matrix pw = inverse(OrthoMatrix::self_adjoint(pw_inv)).value;
    const double eps = (pair.v - pair.w).norm() / lam + std::abs(1.0 / lam - 1.0 / lam_w) * pair.w.norm();
    Outcome o;
    check_multiplicative(p, p_inv, pw, pw_inv, eps, rng, o.sampled, o.supremum);
    return o;
  });
  Outcome total;
  for (const auto& o : outcomes) {
    total.sampled.merge(o.sampled);
    total.supremum.merge(o.supremum);
  }
  SuiteResult r;
  r.name = "appendix-hs-bound";
  const std::string eps = "eps' = |K - K'|_HS / lambda_q + |1/lambda_q - 1/lambda'_q| |K'|_HS";
  r.properties.push_back(reported_property("sampled-ratio", total.sampled, "|Pf| / |P'f| in [(1+eps')^-1, 1+eps'], " + eps));
  r.properties.push_back(reported_property("supremum-ratio", total.supremum, "max(|P P'^-1|, |P' P^-1|) <= 1 + eps'"));
  r.measure("max_sup_excess_over_eps", total.supremum.worst);
  r.notes.push_back("violations are reported rather than gating");
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult check_ratio_to_condition(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index n = config.n;
  std::vector<Index> grid = config.s_grid;
  if (grid.empty()) grid = {std::max<Index>(1, n / 10), std::max<Index>(1, n / 3), n};
  struct Outcome {
    Tally chain, recovery;
    Index skipped = 0;
    double max_gamma = 0.0;
  };
  const auto outcomes = run_trials<Outcome>(config.trials, config.jobs, [&](Index t) {
    const std::uint64_t seed_t = derive_seed(config.seed, std::uint64_t(t));
    const KernelTrial trial = kernel_trial(config, n, seed_t);
    const Index q = 1 + t % config.q;
    Outcome o;
    const SpectralPreconditioner pq = build_exact(trial.gram, q);
    const OrthoMatrix sq = to_ortho(pq, trial.basis, Root::sqrt);
    const OrthoMatrix sq_inv = inverse(sq);
    const double kappa_q = condition_number(to_ortho(pq, trial.basis, Root::full) * trial.covariance);
    for (const Index s : grid) {
      if (s < q || s > n) {
        ++o.skipped;
        continue;
      }
      const NystromSample sample =
          nystrom_sample(n, s, SamplingPolicy::uniform, derive_seed(seed_t, 10 + std::uint64_t(s)));
      std::optional<SpectralPreconditioner> psq;
      try {
        psq.emplace(build_nystrom(trial.gram, sample, q));
      } catch (const LevelTooDeepError&) {
        ++o.skipped;
        continue;
      }
      const OrthoMatrix ssq = to_ortho(*psq, trial.basis, Root::sqrt);
      const OrthoMatrix ssq_inv = inverse(ssq);
      const double gamma = std::max(op_norm(sq * ssq_inv), op_norm(ssq * sq_inv)) - 1.0;
      const double kappa_sq = condition_number(OrthoMatrix::self_adjoint((ssq * trial.covariance * ssq).value));
      const double bound = std::pow(1.0 + gamma, 4) * kappa_q;
      o.max_gamma = std::max(o.max_gamma, gamma);
      o.chain.check(kappa_sq <= bound * (1.0 + 1e-9), kappa_sq / bound,
                    describe({{"s", double(s)}, {"q", double(q)}, {"kappa_sq", kappa_sq}, {"bound", bound}}));
      if (s == n) {
        const double gap = std::max(std::abs(kappa_sq / kappa_q - 1.0), std::abs(gamma));
        o.recovery.check(gap <= 1e-8, gap, describe({{"kappa_sq", kappa_sq}, {"kappa_q", kappa_q}, {"gamma", gamma}}));
      }
    }
    return o;
  });
  Outcome total;
  for (const auto& o : outcomes) {
    total.chain.merge(o.chain);
    total.recovery.merge(o.recovery);
    total.skipped += o.skipped;
    total.max_gamma = std::max(total.max_gamma, o.max_gamma);
  }
  SuiteResult r;
  r.name = "ratio-to-condition";
  r.properties.push_back(gating_property("condition-chain", total.chain,
                                         "kappa(sqrt(P') K sqrt(P')) <= (1+gamma)^4 kappa(P K), gamma from operator norms"));
  if (total.recovery.checked > 0)
    r.properties.push_back(gating_property("full-sample-recovery", total.recovery,
                                           "s = n gives gamma = 0 and equal condition numbers to 1e-8"));
  r.measure("max_kappa_over_bound", total.chain.worst);
  r.measure("max_gamma", total.max_gamma);
  r.measure("skipped_levels", double(total.skipped));
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult check_h_identities(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index m = config.matrix_dim;
  struct Outcome {
    Tally positive, shift;
  };
  const auto outcomes = run_trials<Outcome>(config.trials, config.jobs, [&](Index t) {
    Rng rng(derive_seed(config.seed, std::uint64_t(t)));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector spectrum(m);
    for (Index i = 0; i < m; ++i) spectrum(i) = u(rng);
    if (t % 3 == 0)
      for (Index i = 0; i < m / 3; ++i) spectrum(i) = 0.0;
    const OrthoMatrix s = OrthoMatrix::self_adjoint(random_symmetric_with_spectrum(spectrum, rng));
    const double alpha = 0.5 * (u(rng) + 1.0);
    Outcome o;
    const double d0 = (threshold_h(s, 0.0) - 0.5 * (s + abs_op(s))).value.cwiseAbs().maxCoeff();
    o.positive.check(d0 <= 1e-10, d0, describe({{"max |h_0(S) - (S + |S|)/2|", d0}}));
    const OrthoMatrix shifted = s - alpha * OrthoMatrix::identity(m);
    const double d1 = (threshold_h(s, alpha) - (threshold_h(shifted, 0.0) + alpha * OrthoMatrix::identity(m)))
                          .value.cwiseAbs()
                          .maxCoeff();
    o.shift.check(d1 <= 1e-10, d1, describe({{"alpha", alpha}, {"max difference", d1}}));
    return o;
  });
  Outcome total;
  for (const auto& o : outcomes) {
    total.positive.merge(o.positive);
    total.shift.merge(o.shift);
  }
  SuiteResult r;
  r.name = "h-identities";
  r.properties.push_back(gating_property("positive-part", total.positive, "h_0(S) = (S + |S|)/2 to 1e-10"));
  r.properties.push_back(gating_property("shift", total.shift, "h_a(A) = h_0(A - aI) + aI to 1e-10"));
  r.measure("max_positive_part_error", total.positive.worst);
  r.measure("max_shift_error", total.shift.worst);
  r.elapsed_ms = ms_since(start);
  return r;
}

SuiteResult check_eigenvalue_sandwich(const TrialConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const Index q = config.q;
  // First pass sizes the proxy for the requested n; the sample size may raise n afterwards.
  ProxyOptions popts;
  popts.top_k = q;
  const Index proxy_n = config.proxy_size > 0 ? config.proxy_size : 10 * config.n;
  const PopulationProxy proxy = population_proxy(config.distribution, proxy_n, config.kernel, popts);
  const double c_kq = estimate_CKq(proxy, config.kernel, q);
  const double lam_star = proxy.eigenvalues(q - 1);
  const Index s = Index(std::ceil(32.0 * c_kq * c_kq * std::log(4.0 / config.delta)));
  const Index n = std::max(config.n, s);
  if (proxy.size() < 10 * n)
    throw ConfigError("proxy_size", "the proxy must hold at least 10 n = " + std::to_string(10 * n) + " points");

  const auto outcomes = run_trials<int>(config.trials, config.jobs, [&](Index t) {
    const std::uint64_t seed_t = derive_seed(config.seed, std::uint64_t(t));
    const PointSet x = config.distribution.sample(n, seed_t);
    const OrthoBasis basis = OrthoBasis::pivoted_cholesky(config.kernel, x, 1e-12);
    const Matrix& l = basis.coords();
    const NystromSample sample = nystrom_sample(n, s, SamplingPolicy::uniform, derive_seed(seed_t, 1));
    Matrix ls(s, l.cols());
    for (Index i = 0; i < s; ++i) ls.row(i) = l.row(sample.indices[std::size_t(i)]);
    auto qth = [q](const Matrix& f, Index count) {
      const Vector ev = sym_eigenvalues(f.transpose() * f) / double(count);
      return q <= ev.size() ? ev(q - 1) : 0.0;
    };
    const double lam = qth(l, n), lam_s = qth(ls, s);
    const bool inside = lam >= lam_star / 2 && lam <= 1.5 * lam_star && lam_s >= lam_star / 2 && lam_s <= 1.5 * lam_star;
    return inside ? 1 : 0;
  });
  const Index hits = std::accumulate(outcomes.begin(), outcomes.end(), Index{0});
  SuiteResult r;
  r.name = "sandwich";
  r.properties.push_back(fraction_property("eigenvalue-sandwich", hits, config.trials, 1.0 - config.delta,
                                           "lambda*_q/2 <= lambda_q, lambda'_q <= 3 lambda*_q/2 (proxy lambda*)"));
  r.measure("proxy_size", double(proxy.size()));
  r.measure("lambda_star_q_estimate", lam_star);
  r.measure("C_Kq_estimate", c_kq);
  r.measure("n", double(n));
  r.measure("s", double(s));
  r.notes.push_back("lambda*_q is estimated from the population proxy");
  r.elapsed_ms = ms_since(start);
  return r;
}

}  // namespace specprec
