#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "cli.hpp"
#include "specprec/errors.hpp"

using namespace specprec;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"specprec"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "specprec_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("train gd on a ten point set") {
    const Result r = run({"train", "--method", "gd", "--n", "10", "--json"});
    REQUIRE(r.code == cli::kOk);
    const json j = json::parse(r.out);
    const auto& hist = j["run"]["history"];
    REQUIRE(hist.size() >= 2);
    for (std::size_t i = 1; i < hist.size(); ++i)
      CHECK(hist[i]["hk_error"].get<double>() <= hist[i - 1]["hk_error"].get<double>());
    CHECK(j["run"]["converged"].get<bool>());
  }

  TEST_CASE("config echo reparses to the same config") {
    const Result r = run({"train", "--method", "npgd", "--n", "60", "--q", "4", "--s", "20", "--seed", "17",
                          "--kernel", "laplacian", "--bandwidth", "0.8", "--json"});
    REQUIRE(r.code == cli::kOk);
    const json j = json::parse(r.out);
    const cli::ExperimentConfig c = cli::experiment_from_json(j["config"].dump());
    CHECK(c.seed == 17);
    CHECK(c.solver.s == 20);
    CHECK(c.kernel == KernelSpec::laplacian(0.8));
    CHECK(cli::experiment_from_json(cli::to_json(c)) == c);

    // Feeding the echo back through --config reproduces the run.
    const auto path = scratch("echo.json");
    std::ofstream(path) << j["config"].dump(2);
    const Result again = run({"train", "--config", path.c_str(), "--json"});
    REQUIRE(again.code == cli::kOk);
    const json k = json::parse(again.out);
    CHECK(k["config"] == j["config"]);
    CHECK(k["run"]["final_error"] == j["run"]["final_error"]);
    CHECK(k["run"]["iterations"] == j["run"]["iterations"]);
  }

  TEST_CASE("npgd with s = n notes the exact-recovery regime") {
    const Result r = run({"train", "--method", "npgd", "--n", "40", "--q", "3", "--s", "40"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("exact-recovery") != std::string::npos);
  }

  TEST_CASE("npgd without s derives and echoes it") {
    const Result r = run({"train", "--method", "npgd", "--n", "50", "--q", "2", "--json"});
    REQUIRE(r.code == cli::kOk);
    const json j = json::parse(r.out);
    CHECK(j["preconditioner"]["s"].get<Index>() == 50);
    CHECK(j["preconditioner"].contains("sample_size"));
  }

  TEST_CASE("train writes report and history") {
    const auto dir = scratch("train_out");
    std::filesystem::remove_all(dir);
    const Result r = run({"train", "--n", "20", "--out", dir.c_str()});
    CHECK(r.code == cli::kOk);
    CHECK(std::filesystem::exists(dir / "report.json"));
    std::ifstream h(dir / "history.csv");
    std::string header;
    std::getline(h, header);
    CHECK(header == "t,hk_error,loss,elapsed_ms");
  }

  TEST_CASE("csv input") {
    const auto path = scratch("tiny.csv");
    std::ofstream(path) << "x,target\n0,1\n0.5,0\n1,2\n";
    const Result r = run({"train", "--csv", path.c_str(), "--json"});
    REQUIRE(r.code == cli::kOk);
    CHECK(json::parse(r.out)["dataset"]["n"].get<int>() == 3);
    CHECK(run({"train", "--csv", "/nonexistent/file.csv"}).code == cli::kUsage);
  }

  TEST_CASE("samplesize") {
    const Result r =
        run({"samplesize", "--n", "1.718281828459045", "--ckq", "1", "--eps", "1", "--delta", "0.1", "--json"});
    REQUIRE(r.code == cli::kOk);
    const json j = json::parse(r.out);
    CHECK(j["concentration_term"].get<double>() / std::log(40.0) == doctest::Approx(65536.0).epsilon(1e-13));
    CHECK(j["capped"].get<bool>());

    const json a = json::parse(run({"samplesize", "--n", "1000", "--ckq", "2", "--eps", "1", "--json"}).out);
    const json b = json::parse(run({"samplesize", "--n", "1000", "--ckq", "2", "--eps", "2", "--json"}).out);
    CHECK(b["concentration_term"].get<double>() ==
          doctest::Approx(a["concentration_term"].get<double>() / 16.0).epsilon(1e-14));

    CHECK(run({"samplesize", "--n", "100", "--eps", "0", "--ckq", "2"}).code == cli::kUsage);
    CHECK(run({"samplesize", "--n", "100", "--delta", "1.5", "--ckq", "2"}).code == cli::kUsage);
  }

  TEST_CASE("verify single suite and unknown suite") {
    const Result r = run({"verify", "h-identities", "--trials", "20", "--json"});
    REQUIRE(r.code == cli::kOk);
    const json j = json::parse(r.out);
    CHECK(j["suites"].size() == 1);
    CHECK(j["suites"][0]["suite"] == "h-identities");
    CHECK(j["gating_passed"].get<bool>());

    const Result bad = run({"verify", "no-such-suite"});
    CHECK(bad.code == cli::kUsage);
    CHECK(bad.err.find("h-identities") != std::string::npos);

    const Result list = run({"verify", "--list"});
    CHECK(list.code == cli::kOk);
    CHECK(list.out.find("theorem1") != std::string::npos);
  }

  TEST_CASE("bench is deterministic and q = 1 gives unit ratios") {
    const Result a = run({"bench", "--n-grid", "80", "--q", "1", "--s-grid", "20", "--seed", "3"});
    const Result b = run({"bench", "--n-grid", "80", "--q", "1", "--s-grid", "20", "--seed", "3"});
    REQUIRE(a.code == cli::kOk);
    CHECK(a.out == b.out);
    CHECK(a.out.find("gd_over_pgd") != std::string::npos);
  }

  TEST_CASE("precond-build writes a loadable file") {
    const auto path = scratch("p.json");
    const Result r = run({"precond-build", "--n", "50", "--q", "4", "--kind", "nystrom", "--s", "20", "-o", path.c_str()});
    REQUIRE(r.code == cli::kOk);
    const json j = json::parse(std::ifstream(path));
    CHECK(j["q"] == 4);
    CHECK(j["s"] == 20);
  }

  TEST_CASE("usage and numerical errors map to exit codes") {
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"train", "--method", "newton"}).code == cli::kUsage);
    CHECK(run({"train", "--tau", "2"}).code == cli::kUsage);
    CHECK(run({"train", "--q", "0", "--method", "pgd"}).code == cli::kUsage);
    CHECK(run({"--help"}).code == cli::kOk);
    const Result deep = run({"train", "--method", "pgd", "--n", "5", "--dim", "1", "--bandwidth", "100", "--q", "5"});
    CHECK(deep.code == cli::kNumerical);
  }
}
