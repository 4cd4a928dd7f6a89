#include "specprec/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "specprec/errors.hpp"
#include "specprec/precond.hpp"

namespace specprec {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kPreconditionerFormat = "specprec-preconditioner";
constexpr int kPreconditionerVersion = 1;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json parse_object(std::string_view text, std::string_view path) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(path), std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError(std::string(path), "expected a JSON object");
  return j;
}

std::string join(std::string_view path, std::string_view key) {
  return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

// Typed field readers: wrong JSON types become ConfigError naming the field.
double read_double(const json& v, const std::string& field) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

Index read_index(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
  return v.get<Index>();
}

std::uint64_t read_seed(const json& v, const std::string& field) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(field, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool read_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
  return v.get<bool>();
}

std::string read_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

template <typename Parse>
auto read_enum(const json& v, const std::string& field, Parse parse) {
  const std::string s = read_string(v, field);
  try {
    return parse(s);
  } catch (const InputError& e) {
    throw ConfigError(field, e.what());
  }
}

std::vector<Index> read_index_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of integers");
  std::vector<Index> out;
  for (const auto& e : v) out.push_back(read_index(e, field));
  return out;
}

[[noreturn]] void unknown(const std::string& field) { throw ConfigError(field, "unknown field"); }

json kernel_json(const KernelSpec& k) {
  return {{"family", std::string(to_string(k.family))}, {"bandwidth", k.bandwidth}};
}

json distribution_json(const SyntheticDistribution& d) {
  return {{"kind", std::string(to_string(d.kind))},
          {"dim", d.dim},
          {"seed", d.seed},
          {"low", d.low},
          {"high", d.high},
          {"stddev", d.stddev},
          {"components", d.components},
          {"spread", d.spread}};
}

json solver_json(const SolverConfig& c) {
  return {{"method", std::string(to_string(c.method))},
          {"q", c.q},
          {"s", c.s},
          {"sampling", std::string(to_string(c.sampling))},
          {"sample_seed", c.sample_seed},
          {"step_policy", std::string(to_string(c.step_policy))},
          {"step", c.step},
          {"max_iterations", c.max_iterations},
          {"tau", c.tau},
          {"record_every", c.record_every},
          {"power_tol", c.power_tol},
          {"power_max_iterations", c.power_max_iterations},
          {"predict", c.predict}};
}

json trial_json(const TrialConfig& c) {
  return {{"seed", c.seed},
          {"n", c.n},
          {"s_grid", c.s_grid},
          {"n_grid", c.n_grid},
          {"q", c.q},
          {"eps", c.eps},
          {"delta", c.delta},
          {"tau", c.tau},
          {"distribution", distribution_json(c.distribution)},
          {"kernel", kernel_json(c.kernel)},
          {"trials", c.trials},
          {"proxy_size", c.proxy_size},
          {"universal_c", c.universal_c},
          {"matrix_dim", c.matrix_dim},
          {"jobs", c.jobs}};
}

KernelSpec kernel_from(const json& j, KernelSpec k, std::string_view path) {
  if (!j.is_object()) throw ConfigError(std::string(path), "expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    const std::string f = join(path, key);
    if (key == "family") k.family = read_enum(v, f, kernel_family_from_string);
    else if (key == "bandwidth") k.bandwidth = read_double(v, f);
    else unknown(f);
  }
  return k;
}

SyntheticDistribution distribution_from(const json& j, SyntheticDistribution d, std::string_view path) {
  if (!j.is_object()) throw ConfigError(std::string(path), "expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    const std::string f = join(path, key);
    if (key == "kind") d.kind = read_enum(v, f, distribution_kind_from_string);
    else if (key == "dim") d.dim = read_index(v, f);
    else if (key == "seed") d.seed = read_seed(v, f);
    else if (key == "low") d.low = read_double(v, f);
    else if (key == "high") d.high = read_double(v, f);
    else if (key == "stddev") d.stddev = read_double(v, f);
    else if (key == "components") d.components = read_index(v, f);
    else if (key == "spread") d.spread = read_double(v, f);
    else unknown(f);
  }
  return d;
}

SolverConfig solver_from(const json& j, SolverConfig c, std::string_view path) {
  if (!j.is_object()) throw ConfigError(std::string(path), "expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    const std::string f = join(path, key);
    if (key == "method") c.method = read_enum(v, f, method_from_string);
    else if (key == "q") c.q = read_index(v, f);
    else if (key == "s") c.s = read_index(v, f);
    else if (key == "sampling") c.sampling = read_enum(v, f, sampling_policy_from_string);
    else if (key == "sample_seed") c.sample_seed = read_seed(v, f);
    else if (key == "step_policy") c.step_policy = read_enum(v, f, step_policy_from_string);
    else if (key == "step") c.step = read_double(v, f);
    else if (key == "max_iterations") c.max_iterations = read_index(v, f);
    else if (key == "tau") c.tau = read_double(v, f);
    else if (key == "record_every") c.record_every = read_index(v, f);
    else if (key == "power_tol") c.power_tol = read_double(v, f);
    else if (key == "power_max_iterations") c.power_max_iterations = read_index(v, f);
    else if (key == "predict") c.predict = read_bool(v, f);
    else unknown(f);
  }
  return c;
}

TrialConfig trial_from(const json& j, TrialConfig c, std::string_view path) {
  if (!j.is_object()) throw ConfigError(std::string(path), "expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    const std::string f = join(path, key);
    if (key == "seed") c.seed = read_seed(v, f);
    else if (key == "n") c.n = read_index(v, f);
    else if (key == "s_grid") c.s_grid = read_index_list(v, f);
    else if (key == "n_grid") c.n_grid = read_index_list(v, f);
    else if (key == "q") c.q = read_index(v, f);
    else if (key == "eps") c.eps = read_double(v, f);
    else if (key == "delta") c.delta = read_double(v, f);
    else if (key == "tau") c.tau = read_double(v, f);
    else if (key == "distribution") c.distribution = distribution_from(v, c.distribution, f);
    else if (key == "kernel") c.kernel = kernel_from(v, c.kernel, f);
    else if (key == "trials") c.trials = read_index(v, f);
    else if (key == "proxy_size") c.proxy_size = read_index(v, f);
    else if (key == "universal_c") {
      if (!v.is_array()) throw ConfigError(f, "expected an array of numbers");
      c.universal_c.clear();
      for (const auto& e : v) c.universal_c.push_back(read_double(e, f));
    } else if (key == "matrix_dim") c.matrix_dim = read_index(v, f);
    else if (key == "jobs") {
      const Index jobs = read_index(v, f);
      if (jobs < 1) throw ConfigError(f, "must be >= 1");
      c.jobs = unsigned(jobs);
    } else unknown(f);
  }
  return c;
}

json fraction_json(const SuccessFraction& f) {
  return {{"successes", f.successes}, {"trials", f.trials}, {"value", number(f.value())},
          {"target", f.target},       {"lower", f.lower},   {"upper", f.upper}};
}

std::string csv_cell(double v) { return format_double(v); }

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string to_json(const KernelSpec& kernel) { return kernel_json(kernel).dump(2); }
std::string to_json(const SyntheticDistribution& dist) { return distribution_json(dist).dump(2); }
std::string to_json(const SolverConfig& config) { return solver_json(config).dump(2); }
std::string to_json(const TrialConfig& config) { return trial_json(config).dump(2); }

KernelSpec kernel_from_json(std::string_view text, KernelSpec base, std::string_view path) {
  return kernel_from(parse_object(text, path), base, path);
}

SyntheticDistribution distribution_from_json(std::string_view text, SyntheticDistribution base,
                                             std::string_view path) {
  return distribution_from(parse_object(text, path), base, path);
}

SolverConfig solver_config_from_json(std::string_view text, SolverConfig base, std::string_view path) {
  return solver_from(parse_object(text, path), base, path);
}

TrialConfig trial_config_from_json(std::string_view text, TrialConfig base, std::string_view path) {
  return trial_from(parse_object(text, path), base, path);
}

std::string to_json(const RunReport& r, bool include_history) {
  json j = {{"method", std::string(to_string(r.method))},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"step", number(r.step)},
            {"step_source", r.step_source},
            {"initial_error", number(r.initial_error)},
            {"final_error", number(r.final_error)},
            {"kappa", number(r.kappa)},
            {"predicted_iterations", number(r.predicted_iterations)},
            {"timing", {{"setup_ms", r.setup_ms}, {"loop_ms", r.loop_ms}, {"per_iteration_ms", r.per_iteration_ms}}}};
  if (include_history) {
    json rows = json::array();
    for (const auto& h : r.state.history)
      rows.push_back({{"t", h.t}, {"hk_error", number(h.hk_error)}, {"loss", number(h.loss)},
                      {"elapsed_ms", h.elapsed_ms}});
    j["history"] = std::move(rows);
  }
  return j.dump(2);
}

std::string to_json(const SuiteResult& r) {
  json props = json::array();
  for (const auto& p : r.properties) {
    json jp = {{"name", p.name},         {"gating", p.gating},   {"passed", p.passed}, {"checked", p.checked},
               {"violations", p.violations}, {"worst", number(p.worst)}, {"detail", p.detail}};
    if (p.fraction) jp["fraction"] = fraction_json(*p.fraction);
    props.push_back(std::move(jp));
  }
  json measurements = json::object();
  for (const auto& [k, v] : r.measurements) measurements[k] = number(v);
  json tables = json::array();
  for (const auto& t : r.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json jr = json::array();
      for (const double v : row) jr.push_back(number(v));
      rows.push_back(std::move(jr));
    }
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}});
  }
  const json j = {{"suite", r.name},
                  {"passed", r.passed()},
                  {"gating_passed", r.gating_passed()},
                  {"properties", std::move(props)},
                  {"measurements", std::move(measurements)},
                  {"tables", std::move(tables)},
                  {"notes", r.notes},
                  {"elapsed_ms", r.elapsed_ms}};
  return j.dump(2);
}

std::string history_csv(const RunReport& report) {
  std::ostringstream os;
  os << "t,hk_error,loss,elapsed_ms\n";
  for (const auto& h : report.state.history)
    os << h.t << ',' << csv_cell(h.hk_error) << ',' << csv_cell(h.loss) << ',' << csv_cell(h.elapsed_ms) << '\n';
  return os.str();
}

std::string suite_summary_csv(const std::vector<SuiteResult>& results) {
  std::ostringstream os;
  os << "suite,property,gating,passed,checked,violations,worst,fraction,lower,upper,target\n";
  for (const auto& r : results)
    for (const auto& p : r.properties) {
      os << r.name << ',' << p.name << ',' << (p.gating ? 1 : 0) << ',' << (p.passed ? 1 : 0) << ',' << p.checked
         << ',' << p.violations << ',' << csv_cell(p.worst);
      if (p.fraction)
        os << ',' << csv_cell(p.fraction->value()) << ',' << csv_cell(p.fraction->lower) << ','
           << csv_cell(p.fraction->upper) << ',' << csv_cell(p.fraction->target);
      else
        os << ",,,,";
      os << '\n';
    }
  return os.str();
}

std::string table_csv(const Table& table, bool include_timing) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const std::string& name = table.columns[c];
    const bool timing = name.size() >= 3 && name.compare(name.size() - 3, 3, "_ms") == 0;
    if (include_timing || !timing) keep.push_back(c);
  }
  std::ostringstream os;
  for (std::size_t k = 0; k < keep.size(); ++k) os << (k ? "," : "") << table.columns[keep[k]];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < keep.size(); ++k)
      os << (k ? "," : "") << (keep[k] < row.size() ? csv_cell(row[keep[k]]) : "");
    os << '\n';
  }
  return os.str();
}

std::string to_json(const SpectralPreconditioner& p) {
  json coeffs = json::array();
  for (Index i = 0; i < p.coeffs().rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < p.coeffs().cols(); ++j) row.push_back(p.coeffs()(i, j));
    coeffs.push_back(std::move(row));
  }
  json eig = json::array();
  for (Index i = 0; i < p.eigenvalues().size(); ++i) eig.push_back(p.eigenvalues()(i));
  const json j = {{"format", kPreconditionerFormat},
                  {"version", kPreconditionerVersion},
                  {"kind", std::string(to_string(p.kind()))},
                  {"n", p.n()},
                  {"q", p.level()},
                  {"s", Index(p.base().size())},
                  {"indices", p.base()},
                  {"eigenvalues", std::move(eig)},
                  {"coeffs", std::move(coeffs)}};
  return j.dump();
}

SpectralPreconditioner preconditioner_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("preconditioner: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kPreconditionerFormat) throw InputError("preconditioner: unexpected format tag");
    if (j.at("version").get<int>() != kPreconditionerVersion)
      throw InputError("preconditioner: unsupported version " + j.at("version").dump());
    const std::string kind_name = j.at("kind").get<std::string>();
    PreconditionerKind kind;
    if (kind_name == "exact") kind = PreconditionerKind::exact;
    else if (kind_name == "nystrom") kind = PreconditionerKind::nystrom;
    else throw InputError("preconditioner: unknown kind '" + kind_name + "'");
    const Index n = j.at("n").get<Index>(), q = j.at("q").get<Index>(), s = j.at("s").get<Index>();
    auto base = j.at("indices").get<std::vector<Index>>();
    const auto eig = j.at("eigenvalues").get<std::vector<double>>();
    const auto& rows = j.at("coeffs");
    if (Index(base.size()) != s || Index(eig.size()) != q || Index(rows.size()) != s)
      throw InputError("preconditioner: indices, eigenvalues or coeffs disagree with s and q");
    Matrix coeffs(s, q - 1);
    for (Index i = 0; i < s; ++i) {
      const auto row = rows[std::size_t(i)].get<std::vector<double>>();
      if (Index(row.size()) != q - 1) throw InputError("preconditioner: coefficient row of the wrong length");
      for (Index c = 0; c < q - 1; ++c) coeffs(i, c) = row[std::size_t(c)];
    }
    return SpectralPreconditioner(kind, n, std::move(base), Eigen::Map<const Vector>(eig.data(), q), std::move(coeffs));
  } catch (const json::exception& e) {
    throw InputError(std::string("preconditioner: malformed record: ") + e.what());
  }
}

void save_preconditioner(const SpectralPreconditioner& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json(p) << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

SpectralPreconditioner load_preconditioner(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return preconditioner_from_json(ss.str());
}

}  // namespace specprec
