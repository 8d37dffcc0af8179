// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rtube/pipeline.hpp"

using namespace rtube;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config() {
  return json::parse(R"({
    "tube_width": 10,
    "microstructure": "two-cheeks-one-bottom",
    "seed": 11,
    "n_steps": 1000,
    "n_chains": 1000,
    "checkpoints": [100],
    "thin": 100,
    "ulam": {"m": 16, "samples_per_cell": 1000, "refine": false},
    "tails": {"samples": 100000},
    "corr": {"n_chains": 5000, "max_lag": 10},
    "diagnostics": {"derivative_points": 50, "jacobian_configs": 50, "visits": 20000, "invariance_samples": 20000}
  })");
}

// Message of the config error raised for `j`, or "" when it parses.
std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config_error);
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rtube_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const CheckResult& find_check(const RunSummary& s, const std::string& id) {
  for (const auto& c : s.checks) {
    if (c.id == id) return c;
  }
  FAIL("no check " << id);
  return s.checks.front();
}

RunOptions quiet(const fs::path& dir) {
  RunOptions o;
  o.workers = 2;
  o.out_dir = dir.string();
  return o;
}

}  // namespace

TEST_CASE("config errors name the field path") {
  CHECK(config_error(base_config()).empty());

  json j = base_config();
  j.erase("tube_width");
  CHECK(config_error(j).find("$.tube_width") != std::string::npos);

  j = base_config();
  j.erase("seed");
  CHECK(config_error(j).find("$.seed") != std::string::npos);

  j = base_config();
  j["ulam"]["m"] = "many";
  CHECK(config_error(j).find("$.ulam.m") != std::string::npos);

  j = base_config();
  j["colour"] = "blue";
  CHECK(config_error(j).find("$.colour") != std::string::npos);

  j = base_config();
  j["tube_width"] = -1.0;
  CHECK(config_error(j).find("$.tube_width") != std::string::npos);

  j = base_config();
  j["checkpoints"] = {5000};
  CHECK(config_error(j).find("$.checkpoints[0]") != std::string::npos);

  j = base_config();
  j["nu"] = {{"kind", "piecewise_linear"}, {"knots", {{0.0, 1.0}, {1.0, -1.0}}}};
  CHECK(config_error(j).find("$.nu") != std::string::npos);

  j = base_config();
  j["microstructure"] = {{"cheek_radius", 0.5}, {"left_sweep", 1.0}, {"inner", {{{"radius", "x"}}}}};
  CHECK(config_error(j).find("$.microstructure.inner[0].radius") != std::string::npos);

  CHECK_THROWS_AS(load_config("/nonexistent/rtube.json"), Error);
}

TEST_CASE("config hash") {
  const RunConfig a = parse_config(base_config());
  const RunConfig b = parse_config(base_config());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  json j = base_config();
  j["output_dir"] = "elsewhere";
  CHECK(parse_config(j).hash() == a.hash());
  j["seed"] = 12;
  CHECK(parse_config(j).hash() != a.hash());
  j = base_config();
  j["ulam"]["m"] = 32;
  CHECK(parse_config(j).hash() != a.hash());
}

TEST_CASE("TUBE_SEED overrides the configured seed") {
  RunConfig c = parse_config(base_config());
  ::setenv("TUBE_SEED", "424242", 1);
  apply_env_overrides(c);
  CHECK(c.seed == 424242);
  ::setenv("TUBE_SEED", "0x10", 1);
  apply_env_overrides(c);
  CHECK(c.seed == 16);
  ::setenv("TUBE_SEED", "12abc", 1);
  CHECK_THROWS_AS(apply_env_overrides(c), Error);
  ::setenv("TUBE_SEED", "-3", 1);
  CHECK_THROWS_AS(apply_env_overrides(c), Error);
  ::unsetenv("TUBE_SEED");
  RunConfig d = parse_config(base_config());
  apply_env_overrides(d);
  CHECK(d.seed == 11);
}

TEST_CASE("validate reports shape violations through the exit code") {
  const fs::path dir = scratch("validate");
  CHECK(cmd_validate(parse_config(base_config()), quiet(dir)).exit_code == kExitOk);
  json j = base_config();
  j["microstructure"] = {{"preset", "two-cheeks-one-bottom"}, {"tolerances", {{"kappa_min", 3.0}}}};
  const RunSummary s = cmd_validate(parse_config(j), quiet(dir));
  CHECK(s.exit_code == kExitValidation);
  REQUIRE(s.checks.size() == 1);
  CHECK_FALSE(s.checks[0].passed);
  CHECK(s.checks[0].detail.find("CurvatureOutOfRange") != std::string::npos);
  CHECK(fs::exists(dir / "summary_validate.json"));
}

TEST_CASE("simulate output is identical across runs and worker counts") {
  const RunConfig c = parse_config(base_config());
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  RunOptions oa = quiet(a);
  oa.workers = 1;
  oa.dump_traces = true;
  RunOptions ob = quiet(b);
  ob.workers = 3;
  ob.dump_traces = true;
  const RunSummary sa = cmd_simulate(c, oa);
  const RunSummary sb = cmd_simulate(c, ob);
  CHECK(sa.exit_code == kExitOk);
  CHECK(sb.exit_code == kExitOk);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const std::string name = e.path().filename().string();
    // Wall-clock timings live only in the run summary.
    if (name.rfind("summary_", 0) == 0) continue;
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / name), name);
    ++compared;
  }
  CHECK(compared >= 4);
  CHECK(fs::exists(a / "traces.jsonl"));
  CHECK(fs::file_size(a / "partial_sums.bin") == 1000 * 2 * 8);
}

TEST_CASE("collision cap exit code") {
  json j = base_config();
  j["n_max"] = 1;
  const RunSummary s = cmd_simulate(parse_config(j), quiet(scratch("cap")));
  CHECK(s.exit_code == kExitCollisionCap);
  CHECK(find_check(s, "ensemble_visits").data["error"] == "CollisionCapExceeded");
}

TEST_CASE("tails command matches the closed form") {
  json j = base_config();
  j["tails"]["samples"] = 10000000;
  const fs::path dir = scratch("tails");
  const RunSummary s = cmd_tails(parse_config(j), quiet(dir));
  CHECK(s.exit_code == kExitOk);
  std::ifstream in(dir / "tails.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# config_hash=", 0) == 0);
  std::getline(in, line);
  CHECK(line == "N,exact,emp_upper,emp_lower,stderr_upper,stderr_lower");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream is(line);
    double v[6];
    char comma;
    is >> v[0];
    for (int k = 1; k < 6; ++k) is >> comma >> v[k];
    REQUIRE(is);
    CHECK(v[1] == doctest::Approx(tail_exact(v[0], 10.0)).epsilon(1e-12));
    CHECK(std::abs(v[2] - v[1]) <= 3.0 * v[4]);
    CHECK(std::abs(v[3] - v[1]) <= 3.0 * v[5]);
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("clt reuses a matching ensemble dump") {
  json j = base_config();
  j["checkpoints"] = json::array();
  const RunConfig c = parse_config(j);
  const fs::path dir = scratch("clt");
  CHECK(cmd_clt(c, quiet(dir)).checks.at(0).data["reused_ensemble"] == false);
  CHECK(cmd_clt(c, quiet(dir)).checks.at(0).data["reused_ensemble"] == true);

  // A dump from another configuration is not picked up.
  json k = j;
  k["seed"] = 99;
  const RunSummary other = cmd_clt(parse_config(k), quiet(dir));
  CHECK(other.checks.at(0).data["reused_ensemble"] == false);

  std::ifstream in(dir / "clt.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "chain,S_n,normalized");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1000);
}

TEST_CASE("every text output carries the config hash") {
  const RunConfig c = parse_config(base_config());
  const fs::path dir = scratch("all");
  RunOptions o = quiet(dir);
  o.dump_traces = true;
  const RunSummary s = cmd_all(c, o);
  CHECK(s.exit_code != kExitRuntime);
  CHECK(s.checks.size() >= 10);
  int seen = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string ext = e.path().extension().string();
    if (ext == ".bin") continue;
    const std::string body = slurp(e.path());
    if (ext == ".csv") {
      CHECK_MESSAGE(body.rfind("# config_hash=" + c.hash() + "\n", 0) == 0, e.path());
    } else if (ext == ".jsonl") {
      const json first = json::parse(body.substr(0, body.find('\n')));
      CHECK(first["config_hash"] == c.hash());
    } else if (ext == ".json") {
      CHECK_MESSAGE(json::parse(body)["config_hash"] == c.hash(), e.path());
    } else {
      FAIL("unexpected output " << e.path());
    }
    ++seen;
  }
  CHECK(seen >= 10);
  for (const char* f : {"tails.csv", "clt.csv", "corr.csv", "lambda_curve.csv", "ulam_t0.bin", "partial_sums.bin",
                        "diagnostics.json", "spectral.json", "summary_all.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
}

TEST_CASE("unknown command") { CHECK_THROWS_AS(run_command("plot", parse_config(base_config()), {}), Error); }
