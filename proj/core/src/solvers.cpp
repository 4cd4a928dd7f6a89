#include "specprec/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <sstream>

#include "specprec/errors.hpp"
#include "specprec/random.hpp"

namespace specprec {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::gd: return "gd";
    case Method::pgd: return "pgd";
    case Method::npgd: return "npgd";
  }
  return "gd";
}

Method method_from_string(std::string_view name) {
  if (name == "gd") return Method::gd;
  if (name == "pgd") return Method::pgd;
  if (name == "npgd") return Method::npgd;
  throw InputError("unknown method '" + std::string(name) + "' (expected gd, pgd or npgd)");
}

std::string_view to_string(StepPolicy policy) {
  switch (policy) {
    case StepPolicy::inverse_top_eigenvalue: return "inverse-top-eigenvalue";
    case StepPolicy::inverse_condition: return "inverse-condition";
    case StepPolicy::explicit_value: return "explicit";
  }
  return "inverse-top-eigenvalue";
}

StepPolicy step_policy_from_string(std::string_view name) {
  if (name == "inverse-top-eigenvalue") return StepPolicy::inverse_top_eigenvalue;
  if (name == "inverse-condition") return StepPolicy::inverse_condition;
  if (name == "explicit") return StepPolicy::explicit_value;
  throw InputError("unknown step policy '" + std::string(name) +
                   "' (expected inverse-top-eigenvalue, inverse-condition or explicit)");
}

void SolverConfig::validate() const {
  if (q < 1) throw ConfigError("solver.q", "must be at least 1");
  if (s < 0) throw ConfigError("solver.s", "must be non-negative");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("solver.tau", "must lie in (0, 1)");
  if (max_iterations < 1) throw ConfigError("solver.max_iterations", "must be at least 1");
  if (record_every < 1) throw ConfigError("solver.record_every", "must be at least 1");
  if (step_policy == StepPolicy::explicit_value && !(step > 0.0 && std::isfinite(step)))
    throw ConfigError("solver.step", "explicit step size must be positive");
  if (!(power_tol > 0.0)) throw ConfigError("solver.power_tol", "must be positive");
  if (power_max_iterations < 1) throw ConfigError("solver.power_max_iterations", "must be at least 1");
}

Problem make_problem(const Dataset& data, const GramMatrix& gram) {
  if (gram.size() != data.size()) throw InputError("make_problem: Gram size does not match the dataset");
  Problem p{data, gram, min_norm_interpolant(gram, data.targets()), Vector(), 0.0};
  p.gram_alpha_star = gram.values() * p.alpha_star;
  p.star_norm_sq = p.alpha_star.dot(p.gram_alpha_star);
  return p;
}

Vector gradient(const Matrix& gram, const Vector& alpha, const Vector& targets) {
  if (gram.rows() != alpha.size() || gram.cols() != alpha.size() || targets.size() != alpha.size())
    throw InputError("gradient: shape mismatch");
  return (gram * alpha - targets) / double(alpha.size());
}

double training_loss(const Matrix& gram, const Vector& alpha, const Vector& targets) {
  if (gram.rows() != alpha.size() || targets.size() != alpha.size()) throw InputError("training_loss: shape mismatch");
  return (gram * alpha - targets).squaredNorm() / (2.0 * double(alpha.size()));
}

namespace {

double checked_sqrt(double quad, double scale) {
  if (quad < -1e-10 * std::max(1.0, scale)) {
    std::ostringstream os;
    os << "negative H_K quadratic form " << quad << "; the Gram matrix is not positive semidefinite";
    throw GramIntegrityError(os.str());
  }
  return std::sqrt(std::max(quad, 0.0));
}

}  // namespace

double hk_error(const Vector& alpha, const Vector& alpha_star, const Matrix& gram) {
  if (alpha.size() != alpha_star.size() || gram.rows() != alpha.size() || gram.cols() != alpha.size())
    throw InputError("hk_error: shape mismatch");
  const Vector e = alpha - alpha_star;
  return checked_sqrt(e.dot(gram * e), 1.0);
}

double iteration_bound(double kappa, double tau) {
  if (!(kappa >= 1.0)) throw InputError("iteration_bound: kappa must be at least 1");
  if (!(tau > 0.0 && tau <= 1.0)) throw InputError("iteration_bound: tau must lie in (0, 1]");
  return kappa * std::log(1.0 / tau);
}

OrthoMatrix governing_operator(const OrthoBasis& basis, const SpectralPreconditioner* p) {
  const Matrix& r = basis.coords();
  // sqrt(P) K sqrt(P) = M^T M / n with M = R sqrt(P) and sqrt(P) = I - U diag(w) U^T.
  auto gram_of = [n = double(r.rows())](const Matrix& m) {
    Matrix out = Matrix::Zero(m.cols(), m.cols());
    out.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose(), 1.0 / n);
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    return OrthoMatrix::self_adjoint(out);
  };
  if (p == nullptr || p->is_identity()) return gram_of(r);
  if (p->n() != basis.points()) throw InputError("governing_operator: basis does not cover the training points");
  const Matrix u = ortho_directions(*p, basis);
  const Matrix ru = r * u;
  return gram_of(r - ru * p->weights(Root::sqrt).asDiagonal() * u.transpose());
}

Vector governing_spectrum(const OrthoBasis& basis, const SpectralPreconditioner* p) {
  return sym_eigenvalues(governing_operator(basis, p).value);
}

PowerEstimate estimate_top_eigenvalue(const Matrix& gram, const SpectralPreconditioner& p, const Matrix& cross_gram,
                                      double tol, Index max_iterations) {
  const Index n = gram.rows();
  Rng rng(0x5eed0001ULL);
  Vector beta = gaussian_vector(n, rng);
  Vector g_beta = gram * beta;
  double norm = std::sqrt(beta.dot(g_beta));
  beta /= norm;
  g_beta /= norm;
  double previous = 0.0;
  for (Index it = 1; it <= max_iterations; ++it) {
    const Vector half = p.apply(beta, cross_gram, Root::sqrt);
    const Vector image = p.apply(gram * half / double(n), cross_gram, Root::sqrt);
    const Vector g_image = gram * image;
    const double rayleigh = beta.dot(g_image);
    if (it > 1 && std::abs(rayleigh - previous) <= tol * std::abs(rayleigh)) return {rayleigh, it};
    previous = rayleigh;
    norm = std::sqrt(std::max(image.dot(g_image), 0.0));
    if (!(norm > 0.0)) throw EstimationError("power iteration collapsed to the zero vector");
    beta = image / norm;
    g_beta = g_image / norm;
  }
  std::ostringstream os;
  os << "power iteration did not reach relative tolerance " << tol << " in " << max_iterations << " iterations";
  throw EstimationError(os.str());
}

namespace {

struct StepChoice {
  double step;
  std::string source;
};

double dense_kappa(const Problem& problem, const SpectralPreconditioner* p) {
  const OrthoBasis basis = OrthoBasis::eigen(problem.gram);
  Vector spectrum = governing_spectrum(basis, p).cwiseAbs();
  std::sort(spectrum.data(), spectrum.data() + spectrum.size(), std::greater<>());
  return condition_number(spectrum);
}

template <typename Direction>
RunReport run_loop(Method method, const SolverConfig& config, const Problem& problem, const StepChoice& step,
                   double kappa, double setup_ms, Direction&& direction) {
  const Matrix& g = problem.gram.values();
  const Vector& y = problem.data.targets();
  const Vector& star = problem.alpha_star;
  const Vector& g_star = problem.gram_alpha_star;
  const Index n = g.rows();
  const double eta = step.step;

  RunReport report;
  report.method = method;
  report.step = eta;
  report.step_source = step.source;
  report.setup_ms = setup_ms;
  report.kappa = kappa;
  if (std::isfinite(kappa)) report.predicted_iterations = iteration_bound(kappa, config.tau);

  TrainState& state = report.state;
  state.alpha = Vector::Zero(n);
  Vector r = Vector::Zero(n);
  const double e0_sq = problem.star_norm_sq;
  report.initial_error = std::sqrt(std::max(e0_sq, 0.0));
  const double target = config.tau * e0_sq;
  const double blowup = 100.0 * e0_sq;

  const auto start = Clock::now();
  state.history.push_back({0, report.initial_error, y.squaredNorm() / (2.0 * double(n)), 0.0});
  double err_sq = e0_sq;
  if (err_sq <= target) report.converged = true;

  for (Index t = 1; t <= config.max_iterations && !report.converged; ++t) {
    const Vector grad = (r - y) / double(n);
    state.alpha.noalias() -= eta * direction(grad);
    r.noalias() = g * state.alpha;
    const Vector e = state.alpha - star;
    err_sq = e.dot(r - g_star);
    const double err = checked_sqrt(err_sq, e0_sq);
    state.iteration = t;
    report.converged = err_sq <= target;
    const bool record = t % config.record_every == 0 || report.converged || t == config.max_iterations;
    if (record) state.history.push_back({t, err, (r - y).squaredNorm() / (2.0 * double(n)), ms_since(start)});
    if (err_sq > blowup) {
      std::ostringstream os;
      os << to_string(method) << ": H_K error grew from " << report.initial_error << " to " << err << " at iteration "
         << t << " with step " << eta;
      throw StepSizeError(os.str());
    }
  }
  report.loop_ms = ms_since(start);
  report.iterations = state.iteration;
  report.final_error = std::sqrt(std::max(err_sq, 0.0));
  report.per_iteration_ms = state.iteration > 0 ? report.loop_ms / double(state.iteration) : 0.0;
  return report;
}

void check_preconditioner(const Problem& problem, const SpectralPreconditioner& p, const char* who) {
  if (p.n() != problem.gram.size()) throw InputError(std::string(who) + ": preconditioner was built for another n");
}

}  // namespace

RunReport run_gd(const SolverConfig& config, const Problem& problem) {
  config.validate();
  const auto start = Clock::now();
  const Index n = problem.gram.size();
  const bool need_kappa = config.predict || config.step_policy == StepPolicy::inverse_condition;
  const double kappa = need_kappa ? dense_kappa(problem, nullptr) : std::numeric_limits<double>::quiet_NaN();
  StepChoice step{config.step, "explicit"};
  if (config.step_policy == StepPolicy::inverse_top_eigenvalue) {
    const double top = top_eigenpairs(problem.gram.values(), 1).values(0) / double(n);
    step = {1.0 / top, "inverse-top-eigenvalue"};
  } else if (config.step_policy == StepPolicy::inverse_condition) {
    step = {1.0 / kappa, "inverse-condition"};
  }
  return run_loop(Method::gd, config, problem, step, kappa, ms_since(start),
                  [](const Vector& grad) -> const Vector& { return grad; });
}

RunReport run_pgd(const SolverConfig& config, const Problem& problem, const SpectralPreconditioner& p) {
  config.validate();
  check_preconditioner(problem, p, "run_pgd");
  if (p.kind() != PreconditionerKind::exact) throw InputError("run_pgd: needs an exact preconditioner");
  const auto start = Clock::now();
  const bool need_kappa = config.predict || config.step_policy == StepPolicy::inverse_condition;
  const double kappa = need_kappa ? dense_kappa(problem, &p) : std::numeric_limits<double>::quiet_NaN();
  StepChoice step{config.step, "explicit"};
  if (config.step_policy == StepPolicy::inverse_top_eigenvalue) {
    step = {1.0 / p.tail(), "inverse-top-eigenvalue"};
  } else if (config.step_policy == StepPolicy::inverse_condition) {
    step = {1.0 / kappa, "inverse-condition"};
  }
  return run_loop(Method::pgd, config, problem, step, kappa, ms_since(start),
                  [&p](const Vector& grad) { return p.apply(grad); });
}

RunReport run_npgd(const SolverConfig& config, const Problem& problem, const SpectralPreconditioner& p,
                   const Matrix& cross_gram) {
  config.validate();
  check_preconditioner(problem, p, "run_npgd");
  const auto start = Clock::now();
  const bool need_kappa = config.predict || config.step_policy == StepPolicy::inverse_condition;
  const double kappa = need_kappa ? dense_kappa(problem, &p) : std::numeric_limits<double>::quiet_NaN();
  StepChoice step{config.step, "explicit"};
  if (config.step_policy == StepPolicy::inverse_top_eigenvalue) {
    const PowerEstimate est = estimate_top_eigenvalue(problem.gram.values(), p, cross_gram, config.power_tol,
                                                      config.power_max_iterations);
    step = {1.0 / est.value, "power-iteration"};
  } else if (config.step_policy == StepPolicy::inverse_condition) {
    step = {1.0 / kappa, "inverse-condition"};
  }
  return run_loop(Method::npgd, config, problem, step, kappa, ms_since(start),
                  [&p, &cross_gram](const Vector& grad) { return p.apply(grad, cross_gram); });
}

RunReport run_gd(const SolverConfig& config, const Dataset& data, const GramMatrix& gram) {
  return run_gd(config, make_problem(data, gram));
}

RunReport run_pgd(const SolverConfig& config, const Dataset& data, const GramMatrix& gram,
                  const SpectralPreconditioner& p) {
  return run_pgd(config, make_problem(data, gram), p);
}

RunReport run_npgd(const SolverConfig& config, const Dataset& data, const GramMatrix& gram,
                   const SpectralPreconditioner& p, const Matrix& cross_gram) {
  return run_npgd(config, make_problem(data, gram), p, cross_gram);
}

SpeedupPrediction predict_speedups(const Vector& spectrum, Index q, Index s, Index n, double kappa_sq) {
  if (q < 1 || q > spectrum.size()) throw InputError("predict_speedups: q outside the available spectrum");
  if (n < 1 || s < 0) throw InputError("predict_speedups: n must be positive and s non-negative");
  Vector mags = spectrum.cwiseAbs();
  std::sort(mags.data(), mags.data() + mags.size(), std::greater<>());
  if (!(mags(0) > 0.0)) throw UndefinedConditionError("predict_speedups: zero spectrum");
  Index r = 0;
  while (r < mags.size() && mags(r) > 1e-10 * mags(0)) ++r;
  const double low = mags(r - 1);
  SpeedupPrediction out;
  out.kappa1 = mags(0) / low;
  out.kappa_q = mags(q - 1) / low;
  out.kappa_sq = std::isfinite(kappa_sq) ? kappa_sq : out.kappa_q;
  const double nd = double(n);
  out.pgd = out.kappa1 / (out.kappa_q + double(q) / nd);
  out.npgd = out.kappa1 / (out.kappa_sq + double(s) / nd + double(s) * double(q) / (nd * nd));
  out.eigen_ratio = mags(0) / mags(q - 1);
  return out;
}

}  // namespace specprec
