#include "cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using hwlab::cli::run;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "hwlab_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hwlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(int(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("exponents command") {
  const fs::path out = scratch("exponents");
  CHECK(invoke({"exponents", "--n", "3", "--p", "3", "--out", out.string()}) == 0);
  const json j = json::parse(slurp(out / "exponents.json"));
  CHECK(j["s_c"].get<double>() == doctest::Approx(1.0));
  const json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m["command"] == "exponents");
  CHECK(m["outputs"].contains("exponents.json"));
}

TEST_CASE("validation errors exit with 2 and leave no outputs") {
  const fs::path out = scratch("invalid");
  const fs::path bad = write_config("bad.json", "{\"parameters\": {");
  CHECK(invoke({"solve", "--config", bad.string(), "--out", out.string()}) == 2);
  CHECK_FALSE(fs::exists(out));
  const fs::path unknown = write_config("unknown.json", R"({"parameters": {"bogus": 1}})");
  CHECK(invoke({"solve", "--config", unknown.string(), "--out", out.string()}) == 2);
  const fs::path typed = write_config("typed.json", R"({"parameters": {"N": "many"}})");
  CHECK(invoke({"solve", "--config", typed.string(), "--out", out.string()}) == 2);
  const fs::path other = write_config("other.json", R"({"command": "besov"})");
  CHECK(invoke({"solve", "--config", other.string(), "--out", out.string()}) == 2);
  CHECK(invoke({"solve", "--N", "0", "--out", out.string()}) == 2);
  CHECK(invoke({"exponents", "--dt", "0.1", "--out", out.string()}) == 2);
  CHECK(invoke({"frobnicate"}) == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("solve writes monitors and flags unexpected blow-up") {
  const fs::path out = scratch("solve");
  CHECK(invoke({"solve", "--N", "64", "--t-end", "0.05", "--out", out.string()}) == 0);
  const std::string csv = slurp(out / "monitors.csv");
  CHECK(csv.rfind("# units:", 0) == 0);
  CHECK(csv.find("\nt,mass,sup,energy\n") != std::string::npos);

  const fs::path cfg = write_config("blowup.json", R"({"parameters": {"n": 1, "N": 128, "L": 8, "dt": 0.01, "t_end": 2,
    "nonlinearity": {"kind": "glassey", "p": 2}, "data": {"kind": "bump", "amplitude": 20, "width": 1}}})");
  CHECK(invoke({"solve", "--config", cfg.string(), "--out", scratch("blowup").string()}) == 3);
  const fs::path ok = write_config("expected.json", R"({"parameters": {"n": 1, "N": 128, "L": 8, "dt": 0.01, "t_end": 2,
    "expect_blowup": true, "nonlinearity": {"kind": "glassey", "p": 2}, "data": {"kind": "bump", "amplitude": 20, "width": 1}}})");
  CHECK(invoke({"solve", "--config", ok.string(), "--out", scratch("blowup_ok").string()}) == 0);
}

TEST_CASE("runs are deterministic across repeats and thread counts") {
  const fs::path cfg = write_config("besov.json", R"({"seed": 11, "parameters": {"n": 1, "N": 128, "ensemble": {"count": 6}}})");
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  CHECK(invoke({"besov", "--config", cfg.string(), "--out", a.string()}) == 0);
  CHECK(invoke({"besov", "--config", cfg.string(), "--out", b.string()}) == 0);
  CHECK(invoke({"besov", "--config", cfg.string(), "--threads", "3", "--out", c.string()}) == 0);
  CHECK(slurp(a / "besov.csv") == slurp(b / "besov.csv"));
  CHECK(slurp(a / "besov.csv") == slurp(c / "besov.csv"));
  const json m = json::parse(slurp(a / "manifest.json"));
  CHECK(m["seed"] == 11);

  const fs::path d = scratch("det_d");
  CHECK(invoke({"besov", "--config", cfg.string(), "--seed", "12", "--out", d.string()}) == 0);
  CHECK(slurp(a / "besov.csv") != slurp(d / "besov.csv"));
}

TEST_CASE("reproduce passes, detects edits and rejects other versions") {
  const fs::path out = scratch("repro");
  CHECK(invoke({"chainrule", "--N", "64", "--seed", "3", "--out", out.string()}) == 0);
  CHECK(invoke({"reproduce", (out / "manifest.json").string()}) == 0);

  json m = json::parse(slurp(out / "manifest.json"));
  m["parameters"]["s"] = 0.4;
  std::ofstream(out / "manifest.json") << m.dump(2);
  CHECK(invoke({"reproduce", (out / "manifest.json").string()}) == 1);

  m["format_version"] = 99;
  std::ofstream(out / "manifest.json") << m.dump(2);
  CHECK(invoke({"reproduce", (out / "manifest.json").string()}) == 2);
}

TEST_CASE("lifespan refuses a censored fit with exit 4") {
  const fs::path cfg = write_config("censored.json", R"({"parameters": {"n": 1, "p": 2, "N": 128, "dt": 0.05,
    "epsilons": [0.4, 0.28, 0.2, 0.1], "pilot_L": 2.0, "pilot_attempts": 1}})");
  const fs::path out = scratch("censored");
  CHECK(invoke({"lifespan", "--config", cfg.string(), "--out", out.string()}) == 4);
  const std::string csv = slurp(out / "lifespan_records.csv");
  CHECK(csv.find("epsilon,t_star,t_star_refined,censored,validated,dt,N,L") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "lifespan_fit.csv"));
}

TEST_CASE("bench estimates and blow-up diagnostics") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"strichartz", "strichartz.csv"},     {"local-energy", "local_energy.csv"},
      {"weights", "weights.csv"},           {"radial-sobolev", "radial_sobolev.csv"},
      {"weighted-chainrule", "weighted_chainrule.csv"}};
  for (const auto& [name, file] : cases) {
    const fs::path cfg = write_config("bench_" + name + ".json",
                                      R"({"parameters": {"N": 64, "steps": 32, "time_samples": 64, "resolutions": [16, 32],
                                          "ensemble": {"count": 2}}})");
    const fs::path out = scratch("bench_" + name);
    CAPTURE(name);
    CHECK(invoke({"bench", "--estimate", name, "--config", cfg.string(), "--out", out.string()}) == 0);
    CHECK(fs::exists(out / file));
  }
  CHECK(invoke({"bench", "--estimate", "nonsense", "--out", scratch("bench_bad").string()}) == 2);

  const fs::path out = scratch("diagnose");
  CHECK(invoke({"blowup-diagnose", "--N", "64", "--t-end", "1", "--dt", "0.02", "--out", out.string()}) == 0);
  const json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m["outputs"].contains("functionals.csv"));
  CHECK(slurp(out / "functionals.csv").find("t,F,G,H,F_prime,c_emp,residual") != std::string::npos);
}

TEST_CASE("thread count from the environment") {
  ::setenv("HALFWAVE_LAB_THREADS", "two", 1);
  CHECK(invoke({"exponents", "--out", scratch("env_bad").string()}) == 2);
  ::setenv("HALFWAVE_LAB_THREADS", "2", 1);
  const fs::path out = scratch("env_ok");
  CHECK(invoke({"exponents", "--out", out.string()}) == 0);
  CHECK(json::parse(slurp(out / "manifest.json"))["threads"] == 2);
  ::unsetenv("HALFWAVE_LAB_THREADS");
}
