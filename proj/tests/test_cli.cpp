#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "catfield/cli.hpp"

using namespace catfield;
using namespace catfield::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("catfield_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p.string();
}

int run(std::vector<std::string> args) {
  std::vector<char*> argv;
  static std::string prog = "catfield";
  argv.push_back(prog.data());
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const OutputFile& find(const std::vector<OutputFile>& files, const std::string& name) {
  for (const auto& f : files)
    if (f.name == name) return f;
  throw std::runtime_error("missing output " + name);
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and bad types") {
  CHECK_THROWS_AS(parse_config(R"({"nope": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"drive": {"omega": 1, "omgea": 2}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"drive": {"omega": "fast"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"mode": "cgs"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"mode": "dimensionless", "preset": "headline"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"drive": {"t1": 2, "t2": 1, "t_end": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"alpha": [1], "r": {"start": 0, "stop": 1, "count": 0}}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"state": {"kind": "file"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
}

TEST_CASE("resolved config records defaults and hashes stably") {
  const RunConfig a = parse_config(R"({"mode": "dimensionless", "drive": {"omega": 1.0}})");
  const RunConfig b = parse_config(R"({"drive": {"omega": 1.0}, "mode": "dimensionless"})");
  const RunConfig c = parse_config(R"({"mode": "dimensionless", "drive": {"omega": 1.5}})");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
  CHECK(a.resolved["numerics"]["tail_tol"].get<double>() == kDefaultTailTolerance);
  CHECK(a.resolved["optimize"]["phi_points"].get<int>() == 720);
  const RunConfig h = parse_config(R"({"preset": "headline"})");
  CHECK(h.drive.kappa == doctest::Approx(0.05 * h.drive.chi));
  CHECK(h.drive.t2 == 2e-4);
  const RunConfig r = parse_config(R"({"sweep": {"alpha": [1, 2], "r": {"start": 1, "stop": 2, "count": 3}}})");
  CHECK(r.sweep.r == std::vector<double>{1.0, 1.5, 2.0});
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(NAN) == "nan");
  CHECK(std::stod(format_double(std::numbers::pi)) == std::numbers::pi);
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("state files round-trip exactly") {
  const fs::path dir = scratch("state");
  const RunConfig cfg = parse_config("{}");
  const FockState s = coherent_state(cplx(0.7, -1.1), 32);
  std::ofstream(dir / "s.csv") << state_file_text(cfg, "engineer", s);
  const FockState back = read_state_file((dir / "s.csv").string());
  REQUIRE(back.dim() == s.dim());
  for (int n = 0; n < s.dim(); ++n) CHECK(back[n] == s[n]);
  std::ofstream(dir / "bad.csv") << "# x\n0,1\n";
  CHECK_THROWS_AS(read_state_file((dir / "bad.csv").string()), ConfigError);
}

TEST_CASE("malformed config exits 2 without writing files") {
  const fs::path dir = scratch("malformed");
  const std::string cfg = write_config(dir, R"({"mode": "SI", "drive": {"omega": 1, "unknown": 3}})");
  CHECK(run({"engineer", "--config", cfg, "--out", (dir / "out").string()}) == kConfigError);
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK(run({"engineer", "--config", (dir / "missing.json").string(), "--out", (dir / "out").string()}) ==
        kConfigError);
  CHECK(run({"launch", "--config", cfg}) == kConfigError);
  CHECK(run({"engineer"}) == kConfigError);
}

TEST_CASE("empty sweep exits 2") {
  const fs::path dir = scratch("empty_sweep");
  const std::string cfg = write_config(dir, R"({"sweep": {"alpha": [], "r": [1.0]}})");
  CHECK(run({"sweep", "--config", cfg, "--out", (dir / "out").string()}) == kConfigError);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("unreachable Theta target exits 3") {
  const fs::path dir = scratch("infeasible");
  const std::string cfg = write_config(dir, R"({
    "mode": "dimensionless",
    "drive": {"omega": 1.0, "chi": 1.0, "kappa": 0.45, "eta_slope": -2.0, "eta_offset": 1.5707963267948966,
              "t0": 0.0, "t1": 0.0, "t2": 1.0, "t_end": 1.0},
    "protocol": {"alpha": 1.0},
    "search": {"enabled": true, "theta": 2.5707963267948966, "tau_max": 1.0}
  })");
  CHECK(run({"engineer", "--config", cfg, "--out", (dir / "out").string()}) == kInfeasible);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("identical runs give identical bytes") {
  const fs::path dir = scratch("determinism");
  const std::string cfg = write_config(dir, R"({
    "mode": "dimensionless",
    "sweep": {"alpha": [1.4142135623730951], "r": [0.5, 1.0]},
    "numerics": {"n_max": 256}
  })");
  REQUIRE(run({"sweep", "--config", cfg, "--out", (dir / "a").string()}) == kOk);
  REQUIRE(run({"sweep", "--config", cfg, "--out", (dir / "b").string(), "--threads", "2"}) == kOk);
  CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));
  CHECK(slurp(dir / "a" / "run_record.json") == slurp(dir / "b" / "run_record.json"));
  const std::string csv = slurp(dir / "a" / "sweep.csv");
  CHECK(csv.rfind("# catfield ", 0) == 0);
  CHECK(csv.find("# config_hash ") != std::string::npos);
}

TEST_CASE("sweep reports the r-independent lifetime") {
  const RunConfig cfg = parse_config(R"({"sweep": {"alpha": [1.4142135623730951], "r": [1.0, 1.5, 2.0]}})");
  std::ostringstream log;
  const auto files = run_command("sweep", cfg, 2, log);
  std::istringstream in(find(files, "sweep.csv").content);
  std::string line;
  std::vector<double> tau;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'a') continue;
    std::vector<double> v;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    tau.push_back(v[3]);
  }
  REQUIRE(tau.size() == 3);
  for (double t : tau) CHECK(std::abs(t - tau[0]) / tau[0] < 0.1);
}

TEST_CASE("decohere reports inf for a coherent state in the plain reservoir") {
  const RunConfig cfg = parse_config(R"({
    "state": {"kind": "coherent", "alpha": 1.5},
    "reservoir": {"kind": "squeeze", "r_tilde": 0.0}
  })");
  std::ostringstream log;
  const auto files = run_command("decohere", cfg, 1, log);
  const auto report = nlohmann::json::parse(find(files, "decoherence.json").content);
  CHECK(report["tau_analytic"] == "inf");
  CHECK(report["tau_numeric"] == "inf");
  CHECK(report.contains("relative_deviation"));
}

TEST_CASE("decohere on a squeezed cat in a squeezed reservoir") {
  const RunConfig cfg = parse_config(R"({
    "state": {"kind": "squeezed_cat", "alpha": 1.4142135623730951, "r": 0.8},
    "reservoir": {"kind": "closed_form"}
  })");
  std::ostringstream log;
  const auto files = run_command("decohere", cfg, 1, log);
  const auto report = nlohmann::json::parse(find(files, "decoherence.json").content);
  CHECK(report["relative_deviation"].get<double>() < 1e-4);
  CHECK(find(files, "purity.csv").content.find("\n0,1") != std::string::npos);
}

TEST_CASE("wigner output of the vacuum") {
  const RunConfig cfg = parse_config(R"({
    "state": {"kind": "coherent", "alpha": 0.0},
    "wigner": {"x_min": -4, "x_max": 4, "nx": 81, "y_min": -4, "y_max": 4, "ny": 81}
  })");
  std::ostringstream log;
  const auto files = run_command("wigner", cfg, 2, log);
  const std::string& csv = find(files, "wigner.csv").content;
  std::istringstream in(csv);
  std::string line;
  double peak = 0.0, sum = 0.0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    const double w = std::stod(line.substr(line.rfind(',') + 1));
    peak = std::max(peak, w);
    sum += w;
  }
  CHECK(peak == doctest::Approx(2.0 / std::numbers::pi));
  CHECK(std::abs(sum * 0.01 - 1.0) < 1e-3);
}

TEST_CASE("engineer warns about degenerate branches") {
  const RunConfig cfg = parse_config(R"({
    "mode": "dimensionless",
    "drive": {"omega": 1.0, "chi": 0.0, "kappa": 0.05, "eta_slope": -2.0, "eta_offset": 1.5707963267948966,
              "t0": 0.0, "t1": 1.0, "t2": 3.0, "t_end": 3.0},
    "protocol": {"alpha": 1.0}
  })");
  std::ostringstream log;
  const auto files = run_command("engineer", cfg, 1, log);
  CHECK(log.str().find("degenerate branches") != std::string::npos);
  const auto summary = nlohmann::json::parse(find(files, "summary.json").content);
  CHECK(summary["warning"] == "degenerate branches");
  const std::string& state = find(files, "state.csv").content;
  CHECK(state.find("\n0,") != std::string::npos);
}

TEST_CASE("output directory comes from the environment when --out is absent") {
  const fs::path dir = scratch("env");
  const std::string cfg = write_config(dir, R"({"state": {"kind": "coherent", "alpha": 1.0}})");
  ::setenv("CATFIELD_OUT_DIR", (dir / "env_out").string().c_str(), 1);
  CHECK(run({"optimize", "--config", cfg}) == kOk);
  ::unsetenv("CATFIELD_OUT_DIR");
  CHECK(fs::exists(dir / "env_out" / "optimize.json"));
  CHECK(fs::exists(dir / "env_out" / "run_record.json"));
}
