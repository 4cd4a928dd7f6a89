#include "cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "specprec/errors.hpp"
#include "specprec/precond.hpp"
#include "specprec/random.hpp"
#include "specprec/serialize.hpp"

#ifndef SPECPREC_VERSION
#define SPECPREC_VERSION "unknown"
#endif

namespace specprec::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kReportFormat = 1;

json sub(const std::string& text) { return json::parse(text); }

std::string join(std::string_view path, std::string_view key) { return std::string(path) + "." + std::string(key); }

double read_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

Index read_index(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
  return v.get<Index>();
}

std::string read_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

std::uint64_t read_seed(const json& v, const std::string& field) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(field, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

void require_object(const json& v, const std::string& field) {
  if (!v.is_object()) throw ConfigError(field, "expected a JSON object");
}

std::vector<std::string> expand_suites(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.insert(out.end(), suite_names().begin(), suite_names().end());
    } else {
      default_trial_config(n);  // throws ConfigError("suite") listing the available suites
      out.push_back(n);
    }
  }
  return out;
}

void read_synthetic(const json& j, DatasetSource& d) {
  require_object(j, "dataset.synthetic");
  d.csv.clear();
  for (const auto& [key, v] : j.items()) {
    const std::string f = join("dataset.synthetic", key);
    if (key == "distribution") {
      require_object(v, f);
      d.distribution = distribution_from_json(v.dump(), d.distribution, f);
    } else if (key == "n") {
      d.n = read_index(v, f);
    } else if (key == "rule") {
      try {
        d.rule = target_rule_from_string(read_string(v, f));
      } catch (const InputError& e) {
        throw ConfigError(f, e.what());
      }
    } else if (key == "anchors") {
      d.anchors = read_index(v, f);
    } else if (key == "noise") {
      d.noise = read_double(v, f);
    } else {
      throw ConfigError(f, "unknown field");
    }
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!dataset.csv.empty()) {
    if (!fs::is_regular_file(dataset.csv)) throw ConfigError("dataset.csv", "no such file: " + dataset.csv);
  } else {
    try {
      dataset.distribution.validate();
    } catch (const InputError& e) {
      throw ConfigError("dataset.synthetic.distribution", e.what());
    }
    if (dataset.n < 1) throw ConfigError("dataset.synthetic.n", "must be >= 1");
    if (dataset.anchors < 1) throw ConfigError("dataset.synthetic.anchors", "must be >= 1");
    if (!(dataset.noise >= 0.0)) throw ConfigError("dataset.synthetic.noise", "must be >= 0");
  }
  try {
    kernel.validate();
  } catch (const InputError& e) {
    throw ConfigError("kernel", e.what());
  }
  solver.validate();
  if (!(precond.eps > 0.0)) throw ConfigError("precond.eps", "must be positive");
  if (!(precond.delta > 0.0 && precond.delta < 1.0)) throw ConfigError("precond.delta", "must lie in (0, 1)");
  if (!(precond.universal_c > 0.0)) throw ConfigError("precond.universal_c", "must be positive");
  if (precond.proxy_size < 0) throw ConfigError("precond.proxy_size", "must be >= 0");
  expand_suites(suites);
  trial_config_from_json(verify_overrides, TrialConfig{}, "verify.overrides");
  if (!output_dir.empty()) {
    const fs::path parent = fs::absolute(output_dir).parent_path();
    if (!fs::is_directory(parent)) throw ConfigError("output_dir", "parent directory does not exist: " + parent.string());
  }
  if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
}

std::string to_json(const ExperimentConfig& c) {
  json dataset;
  if (!c.dataset.csv.empty()) {
    dataset = {{"csv", c.dataset.csv}};
  } else {
    dataset = {{"synthetic",
                {{"distribution", sub(specprec::to_json(c.dataset.distribution))},
                 {"n", c.dataset.n},
                 {"rule", std::string(to_string(c.dataset.rule))},
                 {"anchors", c.dataset.anchors},
                 {"noise", c.dataset.noise}}}};
  }
  const json j = {{"dataset", std::move(dataset)},
                  {"kernel", sub(specprec::to_json(c.kernel))},
                  {"solver", sub(specprec::to_json(c.solver))},
                  {"precond",
                   {{"eps", c.precond.eps},
                    {"delta", c.precond.delta},
                    {"universal_c", c.precond.universal_c},
                    {"proxy_size", c.precond.proxy_size}}},
                  {"verify", {{"suites", c.suites}, {"overrides", json::parse(c.verify_overrides)}}},
                  {"output_dir", c.output_dir},
                  {"seed", c.seed},
                  {"jobs", c.jobs}};
  return j.dump(2);
}

ExperimentConfig experiment_from_json(std::string_view text, ExperimentConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  require_object(j, "config");
  for (const auto& [key, v] : j.items()) {
    if (key == "dataset") {
      require_object(v, "dataset");
      if (v.size() != 1 || !(v.contains("csv") || v.contains("synthetic")))
        throw ConfigError("dataset", "exactly one of 'csv' or 'synthetic' is required");
      if (v.contains("csv")) c.dataset.csv = read_string(v["csv"], "dataset.csv");
      else read_synthetic(v["synthetic"], c.dataset);
    } else if (key == "kernel") {
      require_object(v, "kernel");
      c.kernel = kernel_from_json(v.dump(), c.kernel, "kernel");
    } else if (key == "solver") {
      require_object(v, "solver");
      c.solver = solver_config_from_json(v.dump(), c.solver, "solver");
    } else if (key == "precond") {
      require_object(v, "precond");
      for (const auto& [k, x] : v.items()) {
        const std::string f = join("precond", k);
        if (k == "eps") c.precond.eps = read_double(x, f);
        else if (k == "delta") c.precond.delta = read_double(x, f);
        else if (k == "universal_c") c.precond.universal_c = read_double(x, f);
        else if (k == "proxy_size") c.precond.proxy_size = read_index(x, f);
        else throw ConfigError(f, "unknown field");
      }
    } else if (key == "verify") {
      require_object(v, "verify");
      for (const auto& [k, x] : v.items()) {
        const std::string f = join("verify", k);
        if (k == "suites") {
          if (!x.is_array()) throw ConfigError(f, "expected an array of suite names");
          c.suites.clear();
          for (const auto& s : x) c.suites.push_back(read_string(s, f));
        } else if (k == "overrides") {
          require_object(x, f);
          json merged = json::parse(c.verify_overrides);
          merged.update(x);
          trial_config_from_json(merged.dump(), TrialConfig{}, f);
          c.verify_overrides = merged.dump();
        } else {
          throw ConfigError(f, "unknown field");
        }
      }
    } else if (key == "output_dir") {
      c.output_dir = read_string(v, "output_dir");
    } else if (key == "seed") {
      c.seed = read_seed(v, "seed");
    } else if (key == "jobs") {
      const Index jobs = read_index(v, "jobs");
      if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
      c.jobs = unsigned(jobs);
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
  return c;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

json versions() {
  return {{"specprec", SPECPREC_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"report_format", kReportFormat},
          {"preconditioner_format", 1}};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

fs::path output_dir(const ExperimentConfig& c) {
  fs::create_directories(c.output_dir);
  return c.output_dir;
}

SyntheticDistribution effective_distribution(const ExperimentConfig& c) {
  SyntheticDistribution d = c.dataset.distribution;
  d.seed = derive_seed(c.seed, d.seed);
  return d;
}

Dataset load_dataset(const ExperimentConfig& c) {
  if (!c.dataset.csv.empty()) return load_csv(c.dataset.csv);
  GenerateOptions g;
  g.rule = c.dataset.rule;
  g.kernel = c.kernel;
  g.anchors = c.dataset.anchors;
  g.noise = c.dataset.noise;
  return generate(effective_distribution(c), c.dataset.n, g);
}

GramMatrix build_gram(const ExperimentConfig& c, const Dataset& data, std::ostream& err) {
  GramOptions opts;
  opts.jobs = c.jobs;
  opts.warn = [&err](std::string_view msg) { err << "warning: " << msg << '\n'; };
  return gram(c.kernel, data.points(), opts);
}

struct CkqEstimate {
  double value = 0.0;
  std::string source;
};

// beta / lambda*_q from a population proxy (synthetic data) or the training spectrum (CSV data).
CkqEstimate estimate_ckq(const ExperimentConfig& c, const GramMatrix* g, Index n, Index q) {
  if (!c.dataset.csv.empty()) {
    if (g == nullptr) throw ConfigError("precond", "C_Kq for CSV data needs the training Gram");
    const double lam = top_eigenpairs(g->values(), q).values(q - 1) / double(g->size());
    if (!(lam > 0.0)) throw LevelTooDeepError(std::size_t(q), 0, lam);
    return {beta(c.kernel) / lam, "training Gram spectrum (n=" + std::to_string(g->size()) + ")"};
  }
  const Index size = c.precond.proxy_size > 0 ? c.precond.proxy_size : 10 * n;
  ProxyOptions popts;
  popts.top_k = q;
  popts.consumer_n = n;
  const PopulationProxy proxy = population_proxy(effective_distribution(c), size, c.kernel, popts);
  return {estimate_CKq(proxy, c.kernel, q), "population proxy (N=" + std::to_string(proxy.size()) + ")"};
}

json sample_size_json(const SampleSize& s) {
  return {{"s", s.s},
          {"uncapped", s.uncapped},
          {"capped", s.capped},
          {"branch", std::string(to_string(s.branch))},
          {"eigenvalue_term", s.eigenvalue_term},
          {"concentration_term", s.concentration_term}};
}

struct BuiltPreconditioner {
  std::optional<SpectralPreconditioner> p;
  json info;
  double setup_ms = 0.0;
};

// Exact (pgd) or Nystrom (npgd) preconditioner per the config, deriving s when it is 0.
BuiltPreconditioner build_preconditioner(const ExperimentConfig& c, const Dataset& data, const GramMatrix& g,
                                         bool nystrom, std::vector<std::string>& notes) {
  BuiltPreconditioner out;
  const Index n = data.size(), q = c.solver.q;
  if (!nystrom) {
    const auto t0 = Clock::now();
    out.p.emplace(build_exact(g, q));
    out.setup_ms = ms_since(t0);
    out.info = {{"kind", "exact"}, {"q", q}, {"s", n}};
  } else {
    Index s = c.solver.s;
    json derived = nullptr;
    if (s == 0) {
      const CkqEstimate ckq = estimate_ckq(c, &g, n, q);
      const SampleSize ss =
          sample_size(c.precond.eps, c.precond.delta, double(n), ckq.value, 32.0, default_c2(c.precond.universal_c));
      s = ss.s;
      derived = sample_size_json(ss);
      derived["C_Kq"] = ckq.value;
      derived["C_Kq_source"] = ckq.source;
      if (ss.capped) notes.push_back("sample size capped at n");
    }
    if (s > n) throw ConfigError("solver.s", "must not exceed n = " + std::to_string(n));
    if (s == n) notes.push_back("s = n: exact-recovery regime, the Nystrom preconditioner equals the exact one");
    const NystromSample sample = nystrom_sample(n, s, c.solver.sampling, derive_seed(c.seed, c.solver.sample_seed));
    const auto t0 = Clock::now();
    out.p.emplace(build_nystrom(c.kernel, data.points(), sample, q));
    out.setup_ms = ms_since(t0);
    out.info = {{"kind", "nystrom"}, {"q", q}, {"s", s}, {"sampling", std::string(to_string(c.solver.sampling))}};
    if (!derived.is_null()) out.info["sample_size"] = derived;
  }
  out.info["storage_floats"] = out.p->storage_floats();
  out.info["tail_eigenvalue"] = out.p->tail();
  out.info["setup_ms"] = out.setup_ms;
  return out;
}

json dataset_json(const Dataset& d) {
  return {{"n", d.size()},
          {"dim", d.dim()},
          {"source", d.provenance().source},
          {"kind", d.provenance().kind == Provenance::Kind::file ? "file" : "synthetic"}};
}

int cmd_train(const ExperimentConfig& c, bool as_json, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  const Dataset data = load_dataset(c);
  const GramMatrix g = build_gram(c, data, err);
  const double gram_ms = ms_since(t0);
  std::vector<std::string> notes;
  RunReport report;
  json precond = nullptr;
  const Problem problem = make_problem(data, g);
  switch (c.solver.method) {
    case Method::gd:
      report = run_gd(c.solver, problem);
      break;
    case Method::pgd: {
      const BuiltPreconditioner b = build_preconditioner(c, data, g, false, notes);
      precond = b.info;
      report = run_pgd(c.solver, problem, *b.p);
      report.setup_ms += b.setup_ms;
      break;
    }
    case Method::npgd: {
      const BuiltPreconditioner b = build_preconditioner(c, data, g, true, notes);
      precond = b.info;
      const Matrix cross = base_cross_gram(*b.p, c.kernel, data.points());
      report = run_npgd(c.solver, problem, *b.p, cross);
      report.setup_ms += b.setup_ms;
      break;
    }
  }
  if (!report.converged) notes.push_back("iteration cap reached before tau");
  const json j = {{"command", "train"},
                  {"config", sub(to_json(c))},
                  {"versions", versions()},
                  {"dataset", dataset_json(data)},
                  {"preconditioner", precond},
                  {"run", sub(specprec::to_json(report))},
                  {"timing",
                   {{"gram_ms", gram_ms},
                    {"setup_ms", report.setup_ms},
                    {"loop_ms", report.loop_ms},
                    {"per_iteration_ms", report.per_iteration_ms}}},
                  {"notes", notes}};
  if (!c.output_dir.empty()) {
    const fs::path dir = output_dir(c);
    write_file(dir / "report.json", j.dump(2));
    write_file(dir / "history.csv", history_csv(report));
  }
  if (as_json) {
    out << j.dump(2) << '\n';
  } else {
    out << "method        " << to_string(report.method) << '\n'
        << "n             " << data.size() << '\n';
    if (!precond.is_null()) out << "preconditioner " << precond["kind"].get<std::string>() << " q=" << c.solver.q
                                << " s=" << precond["s"].get<Index>() << '\n';
    out << "step          " << format_double(report.step) << " (" << report.step_source << ")\n"
        << "iterations    " << report.iterations << (report.converged ? " (converged)" : " (cap reached)") << '\n'
        << "initial error " << format_double(report.initial_error) << '\n'
        << "final error   " << format_double(report.final_error) << '\n';
    if (std::isfinite(report.kappa))
      out << "kappa         " << format_double(report.kappa) << "  bound kappa ln(1/tau) = "
          << format_double(report.predicted_iterations) << '\n';
    out << "setup ms      " << format_double(report.setup_ms) << "  loop ms " << format_double(report.loop_ms) << '\n';
    for (const auto& n : notes) out << "note: " << n << '\n';
  }
  return kOk;
}

TrialConfig suite_config(const ExperimentConfig& c, const std::string& suite) {
  TrialConfig t = default_trial_config(suite);
  t.seed = c.seed;
  t.jobs = c.jobs;
  return trial_config_from_json(c.verify_overrides, t, "verify.overrides");
}

int cmd_verify(const ExperimentConfig& c, bool as_json, std::ostream& out) {
  const std::vector<std::string> suites = expand_suites(c.suites.empty() ? std::vector<std::string>{"all"} : c.suites);
  std::vector<SuiteResult> results;
  json arr = json::array();
  bool gating_ok = true;
  for (const auto& name : suites) {
    const TrialConfig tc = suite_config(c, name);
    tc.validate();
    results.push_back(run_suite(name, tc));
    const SuiteResult& r = results.back();
    gating_ok = gating_ok && r.gating_passed();
    json jr = sub(specprec::to_json(r));
    jr["trial_config"] = sub(specprec::to_json(tc));
    arr.push_back(std::move(jr));
    if (!as_json) {
      out << (r.gating_passed() ? (r.passed() ? "PASS " : "WARN ") : "FAIL ") << r.name << "  ("
          << std::fixed << std::setprecision(1) << r.elapsed_ms / 1000.0 << " s)\n";
      out.unsetf(std::ios::floatfield);
      out << std::setprecision(6);
      for (const auto& p : r.properties) {
        out << "  " << (p.passed ? "ok   " : (p.gating ? "FAIL " : "warn ")) << p.name << "  checked=" << p.checked
            << " violations=" << p.violations;
        if (p.fraction)
          out << " fraction=" << format_double(p.fraction->value()) << " [" << format_double(p.fraction->lower) << ", "
              << format_double(p.fraction->upper) << "] target=" << format_double(p.fraction->target);
        out << '\n';
        if (!p.passed) out << "       " << p.detail << '\n';
      }
      for (const auto& [k, v] : r.measurements) out << "  " << k << " = " << format_double(v) << '\n';
    }
  }
  const json j = {{"command", "verify"},
                  {"config", sub(to_json(c))},
                  {"versions", versions()},
                  {"suites", std::move(arr)},
                  {"gating_passed", gating_ok}};
  if (!c.output_dir.empty()) {
    const fs::path dir = output_dir(c);
    write_file(dir / "verify.json", j.dump(2));
    write_file(dir / "summary.csv", suite_summary_csv(results));
    for (const auto& r : results)
      for (const auto& t : r.tables) write_file(dir / (r.name + "-" + t.name + ".csv"), table_csv(t));
  }
  if (as_json) out << j.dump(2) << '\n';
  return gating_ok ? kOk : kVerificationFailed;
}

struct SampleSizeArgs {
  double n = 0.0;
  std::optional<double> ckq;
};

int cmd_samplesize(const ExperimentConfig& c, const SampleSizeArgs& a, bool as_json, std::ostream& out) {
  if (!(c.precond.eps > 0.0)) throw ConfigError("precond.eps", "must be positive");
  if (!(c.precond.delta > 0.0 && c.precond.delta < 1.0)) throw ConfigError("precond.delta", "must lie in (0, 1)");
  if (!(a.n > 0.0)) throw ConfigError("n", "must be positive");
  CkqEstimate ckq;
  if (a.ckq) {
    ckq = {*a.ckq, "given"};
  } else {
    if (!c.dataset.csv.empty()) {
      const Dataset data = load_dataset(c);
      GramOptions opts;
      opts.warn = [](std::string_view) {};
      const GramMatrix g = gram(c.kernel, data.points(), opts);
      ckq = estimate_ckq(c, &g, data.size(), c.solver.q);
    } else {
      ckq = estimate_ckq(c, nullptr, Index(std::ceil(a.n)), c.solver.q);
    }
  }
  SampleSize s;
  try {
    s = sample_size(c.precond.eps, c.precond.delta, a.n, ckq.value, 32.0, default_c2(c.precond.universal_c));
  } catch (const InputError& e) {
    throw ConfigError("samplesize", e.what());
  }
  json j = sample_size_json(s);
  j["eps"] = c.precond.eps;
  j["delta"] = c.precond.delta;
  j["n"] = a.n;
  j["q"] = c.solver.q;
  j["universal_c"] = c.precond.universal_c;
  j["C_Kq"] = ckq.value;
  j["C_Kq_source"] = ckq.source;
  if (as_json) {
    out << j.dump(2) << '\n';
  } else {
    out << "s        " << s.s << (s.capped ? " (capped at n; uncapped " + format_double(s.uncapped) + ")" : "") << '\n'
        << "branch   " << to_string(s.branch) << '\n'
        << "terms    eigenvalue " << format_double(s.eigenvalue_term) << ", concentration "
        << format_double(s.concentration_term) << '\n'
        << "C_Kq     " << format_double(ckq.value) << " from " << ckq.source << '\n';
  }
  return kOk;
}

int cmd_bench(const ExperimentConfig& c, bool as_json, std::ostream& out) {
  if (!c.dataset.csv.empty()) throw ConfigError("dataset", "bench runs on synthetic data only");
  TrialConfig t = default_trial_config("speedup");
  t.seed = c.seed;
  t.jobs = c.jobs;
  t.distribution = effective_distribution(c);
  t.kernel = c.kernel;
  t.q = c.solver.q;
  t.tau = c.solver.tau;
  t.eps = c.precond.eps;
  t.delta = c.precond.delta;
  t.proxy_size = c.precond.proxy_size;
  t.n = c.dataset.n;
  t.n_grid = {c.dataset.n};
  if (c.solver.s > 0) t.s_grid = {c.solver.s};
  t = trial_config_from_json(c.verify_overrides, t, "verify.overrides");
  t.validate();
  const SuiteResult r = speedup_table(t);
  const json j = {{"command", "bench"},
                  {"config", sub(to_json(c))},
                  {"versions", versions()},
                  {"trial_config", sub(specprec::to_json(t))},
                  {"result", sub(specprec::to_json(r))}};
  if (!c.output_dir.empty()) {
    const fs::path dir = output_dir(c);
    write_file(dir / "bench.json", j.dump(2));
    for (const auto& tab : r.tables) {
      write_file(dir / (tab.name + ".csv"), table_csv(tab, false));
      write_file(dir / (tab.name + "-timing.csv"), table_csv(tab, true));
    }
  }
  if (as_json) {
    out << j.dump(2) << '\n';
  } else {
    for (const auto& tab : r.tables) out << table_csv(tab, false);
  }
  return kOk;
}

int cmd_precond_build(const ExperimentConfig& c, const std::string& path, bool nystrom, bool as_json,
                      std::ostream& out, std::ostream& err) {
  const Dataset data = load_dataset(c);
  const GramMatrix g = build_gram(c, data, err);
  std::vector<std::string> notes;
  const BuiltPreconditioner b = build_preconditioner(c, data, g, nystrom, notes);
  save_preconditioner(*b.p, path);
  json j = {{"command", "precond-build"},
            {"config", sub(to_json(c))},
            {"versions", versions()},
            {"dataset", dataset_json(data)},
            {"preconditioner", b.info},
            {"path", path},
            {"notes", notes}};
  if (as_json) {
    out << j.dump(2) << '\n';
  } else {
    out << "wrote " << path << ": " << b.info["kind"].get<std::string>() << " q=" << c.solver.q
        << " s=" << b.info["s"].get<Index>() << " floats=" << b.p->storage_floats() << '\n';
  }
  return kOk;
}

// Options shared by the subcommands, applied over the --config file.
struct Flags {
  std::string config_path;
  bool json = false;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string csv;
  Index n = 0;
  Index dim = 0;
  std::string distribution;
  std::string kernel;
  double bandwidth = 0.0;
  std::string method;
  Index q = 0;
  Index s = 0;
  std::string sampling;
  std::uint64_t sample_seed = 0;
  std::string step_policy;
  double step = 0.0;
  double tau = 0.0;
  Index max_iterations = 0;
  Index record_every = 0;
  bool no_predict = false;
  double eps = 0.0;
  double delta = 0.0;
  double universal_c = 0.0;
  Index proxy_size = 0;
  std::vector<Index> n_grid;
  std::vector<Index> s_grid;
  Index trials = 0;
  Index matrix_dim = 0;
  std::vector<std::string> suites;
  std::string output_path;
  std::string kind = "nystrom";
  double real_n = 0.0;
  double ckq = 0.0;
  bool list = false;
};

struct Registered {
  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_common(CLI::App* app, Flags& f, Registered& r) {
  r.opts["config"] = app->add_option("--config", f.config_path, "JSON experiment config; flags override it");
  r.opts["json"] = app->add_flag("--json", f.json, "Machine-readable output");
  r.opts["seed"] = app->add_option("--seed", f.seed, "Master seed (default 0)");
  r.opts["jobs"] = app->add_option("--jobs", f.jobs, "Worker threads");
}

void add_data(CLI::App* app, Flags& f, Registered& r, bool with_csv, bool with_n) {
  if (with_csv) r.opts["csv"] = app->add_option("--csv", f.csv, "Training data CSV (last column 'target')");
  if (with_n) r.opts["n"] = app->add_option("--n", f.n, "Synthetic sample size");
  r.opts["dim"] = app->add_option("--dim", f.dim, "Synthetic input dimension");
  r.opts["distribution"] =
      app->add_option("--distribution", f.distribution, "uniform-hypercube | isotropic-gaussian | gaussian-mixture");
  r.opts["kernel"] = app->add_option("--kernel", f.kernel, "gaussian | laplacian");
  r.opts["bandwidth"] = app->add_option("--bandwidth", f.bandwidth, "Kernel bandwidth");
}

void add_precond(CLI::App* app, Flags& f, Registered& r) {
  r.opts["q"] = app->add_option("--q", f.q, "Preconditioner level");
  r.opts["s"] = app->add_option("--s", f.s, "Nystrom subsample size (0: derive from eps, delta)");
  r.opts["sampling"] = app->add_option("--sampling", f.sampling, "uniform | fixed-prefix");
  r.opts["sample-seed"] = app->add_option("--sample-seed", f.sample_seed, "Nystrom sample stream");
  r.opts["eps"] = app->add_option("--eps", f.eps, "Target closeness epsilon");
  r.opts["delta"] = app->add_option("--delta", f.delta, "Failure probability delta");
  r.opts["C"] = app->add_option("--C", f.universal_c, "Universal constant in c2 = 2^16 C^4");
  r.opts["proxy-size"] = app->add_option("--proxy-size", f.proxy_size, "Population proxy size (0: 10 n)");
}

void add_solver(CLI::App* app, Flags& f, Registered& r) {
  r.opts["method"] = app->add_option("--method", f.method, "gd | pgd | npgd");
  r.opts["step-policy"] =
      app->add_option("--step-policy", f.step_policy, "inverse-top-eigenvalue | inverse-condition | explicit");
  r.opts["step"] = app->add_option("--step", f.step, "Step size for --step-policy explicit");
  r.opts["tau"] = app->add_option("--tau", f.tau, "Relative squared-error target");
  r.opts["max-iterations"] = app->add_option("--max-iterations", f.max_iterations, "Iteration cap");
  r.opts["record-every"] = app->add_option("--record-every", f.record_every, "History stride");
  r.opts["no-predict"] = app->add_flag("--no-predict", f.no_predict, "Skip the dense condition-number prediction");
}

template <typename Parse>
auto parse_enum(const std::string& text, const char* field, Parse parse) {
  try {
    return parse(text);
  } catch (const InputError& e) {
    throw ConfigError(field, e.what());
  }
}

ExperimentConfig assemble(const Flags& f, const Registered& r) {
  ExperimentConfig c;
  if (r.given("config")) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("config", "cannot read " + f.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    c = experiment_from_json(ss.str(), c);
  }
  if (r.given("seed")) c.seed = f.seed;
  if (r.given("jobs")) c.jobs = f.jobs;
  if (r.given("out")) c.output_dir = f.out_dir;
  if (r.given("csv")) c.dataset.csv = f.csv;
  if (r.given("n")) {
    c.dataset.csv.clear();
    c.dataset.n = f.n;
  }
  if (r.given("dim")) c.dataset.distribution.dim = f.dim;
  if (r.given("distribution"))
    c.dataset.distribution.kind = parse_enum(f.distribution, "dataset.synthetic.distribution.kind", distribution_kind_from_string);
  if (r.given("kernel")) c.kernel.family = parse_enum(f.kernel, "kernel.family", kernel_family_from_string);
  if (r.given("bandwidth")) c.kernel.bandwidth = f.bandwidth;
  if (r.given("method")) c.solver.method = parse_enum(f.method, "solver.method", method_from_string);
  if (r.given("q")) c.solver.q = f.q;
  if (r.given("s")) c.solver.s = f.s;
  if (r.given("sampling")) c.solver.sampling = parse_enum(f.sampling, "solver.sampling", sampling_policy_from_string);
  if (r.given("sample-seed")) c.solver.sample_seed = f.sample_seed;
  if (r.given("step-policy"))
    c.solver.step_policy = parse_enum(f.step_policy, "solver.step_policy", step_policy_from_string);
  if (r.given("step")) c.solver.step = f.step;
  if (r.given("tau")) c.solver.tau = f.tau;
  if (r.given("max-iterations")) c.solver.max_iterations = f.max_iterations;
  if (r.given("record-every")) c.solver.record_every = f.record_every;
  if (r.given("no-predict")) c.solver.predict = !f.no_predict;
  if (r.given("eps")) c.precond.eps = f.eps;
  if (r.given("delta")) c.precond.delta = f.delta;
  if (r.given("C")) c.precond.universal_c = f.universal_c;
  if (r.given("proxy-size")) c.precond.proxy_size = f.proxy_size;
  return c;
}

// Verification flags become trial-config overrides so the config echo reproduces the run.
void add_overrides(ExperimentConfig& c, const Flags& f, const Registered& r) {
  json o = json::parse(c.verify_overrides);
  if (r.given("trials")) o["trials"] = f.trials;
  if (r.given("vn")) o["n"] = f.n;
  if (r.given("vq")) o["q"] = f.q;
  if (r.given("veps")) o["eps"] = f.eps;
  if (r.given("vdelta")) o["delta"] = f.delta;
  if (r.given("vproxy")) o["proxy_size"] = f.proxy_size;
  if (r.given("matrix-dim")) o["matrix_dim"] = f.matrix_dim;
  if (r.given("n-grid")) o["n_grid"] = f.n_grid;
  if (r.given("s-grid")) o["s_grid"] = f.s_grid;
  c.verify_overrides = o.dump();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectrally preconditioned gradient descent for kernel interpolation"};
  app.set_version_flag("--version", SPECPREC_VERSION);
  app.require_subcommand(1);
  Flags f;

  Registered rt, rv, rs, rb, rp;
  CLI::App* train = app.add_subcommand("train", "Run GD, PGD or nPGD to the interpolant");
  add_common(train, f, rt);
  add_data(train, f, rt, true, true);
  add_precond(train, f, rt);
  add_solver(train, f, rt);
  rt.opts["out"] = train->add_option("--out", f.out_dir, "Directory for report.json and history.csv");

  CLI::App* verify = app.add_subcommand("verify", "Run verification suites ('all' for every suite)");
  add_common(verify, f, rv);
  verify->add_option("suites", f.suites, "Suite names");
  rv.opts["list"] = verify->add_flag("--list", f.list, "List the available suites");
  rv.opts["trials"] = verify->add_option("--trials", f.trials, "Trials per suite");
  rv.opts["vn"] = verify->add_option("--n", f.n, "Problem size n");
  rv.opts["vq"] = verify->add_option("--q", f.q, "Preconditioner level q");
  rv.opts["veps"] = verify->add_option("--eps", f.eps, "Epsilon");
  rv.opts["vdelta"] = verify->add_option("--delta", f.delta, "Delta");
  rv.opts["vproxy"] = verify->add_option("--proxy-size", f.proxy_size, "Population proxy size");
  rv.opts["matrix-dim"] = verify->add_option("--matrix-dim", f.matrix_dim, "Random matrix dimension");
  rv.opts["n-grid"] = verify->add_option("--n-grid", f.n_grid, "Sizes for concentration / speed-up")->delimiter(',');
  rv.opts["s-grid"] = verify->add_option("--s-grid", f.s_grid, "Nystrom sizes")->delimiter(',');
  rv.opts["out"] = verify->add_option("--out", f.out_dir, "Directory for verify.json and CSV summaries");

  CLI::App* samplesize = app.add_subcommand("samplesize", "Nystrom sample size for (eps, delta, n, q)");
  add_common(samplesize, f, rs);
  add_data(samplesize, f, rs, true, false);
  rs.opts["eps"] = samplesize->add_option("--eps", f.eps, "Epsilon");
  rs.opts["delta"] = samplesize->add_option("--delta", f.delta, "Delta");
  rs.opts["q"] = samplesize->add_option("--q", f.q, "Preconditioner level");
  rs.opts["C"] = samplesize->add_option("--C", f.universal_c, "Universal constant in c2 = 2^16 C^4");
  rs.opts["proxy-size"] = samplesize->add_option("--proxy-size", f.proxy_size, "Population proxy size (0: 10 n)");
  samplesize->add_option("--n", f.real_n, "Training set size (real-valued)")->required();
  CLI::Option* ckq_opt = samplesize->add_option("--ckq", f.ckq, "Use this C_Kq instead of a proxy estimate");

  CLI::App* bench = app.add_subcommand("bench", "GD / PGD / nPGD iteration, storage and setup table");
  add_common(bench, f, rb);
  add_data(bench, f, rb, false, true);
  add_precond(bench, f, rb);
  rb.opts["tau"] = bench->add_option("--tau", f.tau, "Relative squared-error target");
  rb.opts["n-grid"] = bench->add_option("--n-grid", f.n_grid, "Training sizes")->delimiter(',');
  rb.opts["s-grid"] = bench->add_option("--s-grid", f.s_grid, "Nystrom sizes (first one used by nPGD)")->delimiter(',');
  rb.opts["out"] = bench->add_option("--out", f.out_dir, "Directory for bench.json and CSV tables");

  CLI::App* pbuild = app.add_subcommand("precond-build", "Build a preconditioner and save it as JSON");
  add_common(pbuild, f, rp);
  add_data(pbuild, f, rp, true, true);
  add_precond(pbuild, f, rp);
  pbuild->add_option("--kind", f.kind, "exact | nystrom")->check(CLI::IsMember({"exact", "nystrom"}));
  pbuild->add_option("--output,-o", f.output_path, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) {
      const ExperimentConfig c = assemble(f, rt);
      c.validate();
      return cmd_train(c, f.json, out, err);
    }
    if (verify->parsed()) {
      if (f.list) {
        for (const auto& n : suite_names())
          out << n << (is_deterministic_suite(n) ? "" : "  (probabilistic or reported)") << '\n';
        return kOk;
      }
      ExperimentConfig c = assemble(f, rv);
      if (!f.suites.empty()) c.suites = f.suites;
      add_overrides(c, f, rv);
      c.validate();
      return cmd_verify(c, f.json, out);
    }
    if (samplesize->parsed()) {
      const ExperimentConfig c = assemble(f, rs);
      c.validate();
      SampleSizeArgs a;
      a.n = f.real_n;
      if (ckq_opt->count() > 0) a.ckq = f.ckq;
      return cmd_samplesize(c, a, f.json, out);
    }
    if (bench->parsed()) {
      ExperimentConfig c = assemble(f, rb);
      add_overrides(c, f, rb);
      c.validate();
      return cmd_bench(c, f.json, out);
    }
    ExperimentConfig c = assemble(f, rp);
    c.validate();
    return cmd_precond_build(c, f.output_path, f.kind == "nystrom", f.json, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace specprec::cli
