#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qcurv/core.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/run.hpp"

using namespace qcurv;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "qcurv");
  return parse_and_validate(args);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "qcurv_cli_tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

int run_binary(const std::string& args) {
  const char* exe = std::getenv("QCURV_CLI");
  REQUIRE(exe != nullptr);
  const int rc = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("lambda fractions resolve against the thresholds") {
  const RunConfig c = parse({"solve-radial", "--n", "3", "--alpha", "0", "--lambda-frac", "0.5"});
  CHECK(c.command == Command::solve_radial);
  CHECK(c.resolved_lambda() == doctest::Approx(0.5 * lambda_1(3)).epsilon(1e-15));
  const auto echo = c.echo();
  CHECK(echo["lambda_resolved"]["value"].get<double>() == doctest::Approx(2.0 * pi * pi));
  CHECK(echo["lambda_frac"]["source"] == "flag");
  CHECK(echo["nodes"]["source"] == "default");
  CHECK(echo["mu"]["value"].get<double>() == 3.0);

  const RunConfig l1 = parse({"solve-axisym", "--alpha", "-0.5", "--lambda-frac-l1", "0.6"});
  CHECK(l1.resolved_lambda() == doctest::Approx(0.6 * lambda_1(3)));
  CHECK(l1.nodes == 128);
  CHECK(l1.echo()["nodes"]["source"] == "derived");
  CHECK(parse({"solve-radial", "--lambda", "7.5"}).resolved_lambda() == 7.5);
}

TEST_CASE("invalid command lines are usage errors") {
  CHECK_THROWS_AS(parse({"solve-radial", "--alpha", "-1.5", "--lambda", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-radial", "--lambda", "0"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-radial", "--lambda", "-2"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-radial"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-radial", "--lambda", "1", "--lambda-frac", "0.5"}), UsageError);
  CHECK_THROWS_AS(parse({"frobnicate", "--lambda", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-radial", "--lambda", "1", "--bogus", "3"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-radial", "--lambda", "1", "--damping", "2"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-radial", "--lambda", "1", "--mu", "0"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-axisym", "--lambda-frac-l1", "1.1"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-axisym", "--n", "2", "--lambda", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"sweep", "--fractions", "0.5,1.2"}), UsageError);
  CHECK_THROWS_AS(parse({"sweep", "--fractions", "0.9,0.5"}), UsageError);
  CHECK_THROWS_AS(parse({"oracle2d", "--n", "3"}), UsageError);
  CHECK_THROWS_AS(parse({"oracle2d", "--alpha", "0.5", "--zeta", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"--help"}), HelpRequested);
}

TEST_CASE("command defaults") {
  const RunConfig sweep = parse({"sweep"});
  CHECK(sweep.fractions.size() == 9);
  CHECK(sweep.fractions.back() == 0.999);
  const RunConfig scan = parse({"threshold-scan", "--fractions", "0.9,1.1"});
  CHECK(scan.fractions == std::vector<double>{0.9, 1.1});
  const RunConfig oracle = parse({"oracle2d", "--zeta", "2,0", "--alpha", "1"});
  CHECK(oracle.n == 2);
  CHECK(oracle.angular_nodes == 256);
  CHECK(oracle.zeta == std::complex<double>(2.0, 0.0));
  CHECK(parse({"poho-check", "--n", "2", "--mu", "0"}).resolved_mu() == 0.0);
}

TEST_CASE("config file merges under flags") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  const fs::path file = dir / "run.json";
  {
    std::ofstream os(file);
    os << R"({"command": "solve-radial",
              "problem": {"n": 4, "alpha": 0.5, "lambda_frac": 0.9},
              "grid": {"nodes": 256},
              "solver": {"tol": 1e-9, "fit_lo": 2.0},
              "output": {"dir": "somewhere"}})";
  }
  const RunConfig c = parse({"solve-radial", "--config", file.string(), "--alpha", "0"});
  CHECK(c.n == 4);
  CHECK(c.alpha == 0.0);
  CHECK(c.nodes == 256);
  CHECK(c.tol == 1e-9);
  CHECK(c.fit_lo == 2.0);
  CHECK(c.out_dir == "somewhere");
  CHECK(c.resolved_lambda() == doctest::Approx(0.9 * critical_lambda(4, 0.0)));
  const auto echo = c.echo();
  CHECK(echo["alpha"]["source"] == "flag");
  CHECK(echo["n"]["source"] == "config");
  CHECK(echo["nodes"]["source"] == "config");
  CHECK(echo["dir"]["source"] == "config");
  CHECK(echo["damping"]["source"] == "default");

  // A flag-given Lambda replaces the file's form.
  const RunConfig d = parse({"solve-radial", "--config", file.string(), "--lambda", "3"});
  CHECK(d.resolved_lambda() == 3.0);
  CHECK_FALSE(d.lambda_frac);

  {
    std::ofstream os(file);
    os << R"({"problem": {"n": 3, "colour": "red"}})";
  }
  CHECK_THROWS_AS(parse({"solve-radial", "--config", file.string(), "--lambda", "1"}), UsageError);
  {
    std::ofstream os(file);
    os << R"({"physics": {}})";
  }
  CHECK_THROWS_AS(parse({"solve-radial", "--config", file.string(), "--lambda", "1"}), UsageError);
  {
    std::ofstream os(file);
    os << R"({"grid": {"nodes": "many"}})";
  }
  CHECK_THROWS_AS(parse({"solve-radial", "--config", file.string(), "--lambda", "1"}), UsageError);
  {
    std::ofstream os(file);
    os << "{not json";
  }
  CHECK_THROWS_AS(parse({"solve-radial", "--config", file.string(), "--lambda", "1"}), UsageError);
  CHECK_THROWS_AS(parse({"solve-radial", "--config", (dir / "missing.json").string(), "--lambda", "1"}), UsageError);
}

TEST_CASE("oracle2d run writes the profile and report") {
  const fs::path dir = scratch("oracle");
  const RunReport r = run(parse({"oracle2d", "--out", dir.string()}));
  CHECK(r.exit_code == 0);
  CHECK(r.reason == "ok");
  CHECK(first_line(dir / "profile.csv") == "r,v,u,density");
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "trace.log"));
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["result"]["oracle"]["lambda_measured"].get<double>() == doctest::Approx(4.0 * pi).epsilon(1e-9));
  CHECK(report["result"]["oracle"]["normality_residual"].get<double>() < 1e-4);
  CHECK(report["status"] == "ok");
  CHECK(report["schema_version"] == 1);
  CHECK(report["constants"]["gamma_n"].get<double>() == doctest::Approx(2.0 * pi));
  const auto arts = report["artifacts"].get<std::vector<std::string>>();
  CHECK(std::find(arts.begin(), arts.end(), "profile.csv") != arts.end());
  CHECK(std::find(arts.begin(), arts.end(), "report.json") != arts.end());
}

TEST_CASE("solve-radial runs are deterministic") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    const RunReport r = run(parse({"solve-radial", "--lambda-frac", "0.5", "--nodes", "128", "--out", dir.string()}));
    CHECK(r.exit_code == 0);
  }
  const std::string pa = slurp(a / "profile.csv");
  CHECK(pa.rfind("r,v,u,density\n", 0) == 0);
  CHECK(pa == slurp(b / "profile.csv"));
  CHECK(slurp(a / "trace.log") == slurp(b / "trace.log"));
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(report["result"]["convergence"]["converged"] == true);
  CHECK(report["result"]["diagnostics"]["lower_bound_violations"] == 0);
  // Rows carry 17 significant digits.
  std::istringstream rows(pa);
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  CHECK(line.find("e-") != std::string::npos);
}

TEST_CASE("sweep and threshold-scan artifacts") {
  const fs::path dir = scratch("sweep");
  const RunReport r = run(parse({"sweep", "--fractions", "0.5,0.9,0.99", "--nodes", "256", "--out", dir.string()}));
  CHECK(r.exit_code == 0);
  for (const char* f : {"sweep_000.csv", "sweep_001.csv", "sweep_002.csv"}) CHECK(first_line(dir / f) == "r,v,u,density");
  CHECK(first_line(dir / "sweep_summary.csv") == "lambda,w0,residual,converged");
  CHECK(first_line(dir / "normal_profile.csv") == "x,eta");
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["result"]["steps"].size() == 3);
  CHECK(report["result"]["normal_solution"].contains("total_curvature"));

  const fs::path sdir = scratch("scan");
  const RunReport s = run(parse({"threshold-scan", "--fractions", "0.95,1.05", "--nodes", "256", "--max-iter", "3000",
                                 "--out", sdir.string()}));
  CHECK(s.exit_code == 0);
  CHECK(first_line(sdir / "scan.csv") == "lambda,fraction,converged,w0,residual,iterations,status");
  const auto sr = nlohmann::json::parse(slurp(sdir / "report.json"));
  CHECK(sr["result"]["bracket"]["consistent"] == true);
  CHECK(sr["result"]["bracket"]["width_fraction"].get<double>() == doctest::Approx(0.1));
}

TEST_CASE("oracle-backed poho-check and asymptotics") {
  const fs::path dir = scratch("poho");
  const RunReport r = run(parse({"poho-check", "--n", "2", "--mu", "0", "--alpha", "1", "--out", dir.string()}));
  CHECK(r.exit_code == 0);
  CHECK(r.json["result"]["pohozaev"]["residual"].get<double>() < 1e-5);
  CHECK(r.json["result"]["profile_source"] == "explicit");

  const fs::path adir = scratch("asym");
  const RunReport a = run(parse({"asymptotics", "--n", "2", "--mu", "0", "--out", adir.string()}));
  CHECK(a.exit_code == 0);
  CHECK(a.json["result"]["asymptotics"]["beta_estimate"].get<double>() == doctest::Approx(2.0).epsilon(0.02));
  CHECK(a.json["result"]["asymptotics"]["lower_bound_violations"] == 0);
}

TEST_CASE("failed runs keep a report with a reason code") {
  const fs::path dir = scratch("fail");
  const RunReport r = run(parse({"solve-radial", "--lambda-frac", "1.2", "--nodes", "128", "--max-iter", "300",
                                 "--out", dir.string()}));
  CHECK(r.exit_code == 1);
  CHECK((r.reason == "not_converged" || r.reason == "blowup"));
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["status"] == "failed");
  CHECK(report["reason"] == r.reason);

  const fs::path cdir = scratch("config_fail");
  const RunReport c = run(parse({"solve-radial", "--lambda", "1", "--nodes", "100", "--out", cdir.string()}));
  CHECK(c.exit_code == 1);
  CHECK(c.reason == "config_error");
  CHECK(nlohmann::json::parse(slurp(cdir / "report.json")).contains("message"));
}

TEST_CASE("binary exit codes") {
  const fs::path dir = scratch("binary");
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("solve-radial --alpha -1.5 --lambda 1 --out " + dir.string()) == 2);
  CHECK_FALSE(fs::exists(dir / "report.json"));
  CHECK(run_binary("nonsense --out " + dir.string()) == 2);
  CHECK_FALSE(fs::exists(dir / "report.json"));
  CHECK(run_binary("oracle2d --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(run_binary("solve-radial --lambda-frac 1.2 --nodes 128 --max-iter 200 --out " + (dir / "f").string()) == 1);
  CHECK(fs::exists(dir / "f" / "report.json"));
}
