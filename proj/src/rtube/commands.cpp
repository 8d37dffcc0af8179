// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>

#include "rtube/binio.hpp"
#include "rtube/pipeline.hpp"

namespace rtube {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_validation_code(ErrorCode c) {
  return c == ErrorCode::tangency_violation || c == ErrorCode::corner_angle_violation ||
         c == ErrorCode::normal_cone_violation || c == ErrorCode::curvature_out_of_range ||
         c == ErrorCode::open_boundary;
}

int exit_code_for(ErrorCode c) {
  if (c == ErrorCode::config_error) return kExitConfig;
  if (is_validation_code(c)) return kExitValidation;
  if (c == ErrorCode::collision_cap_exceeded) return kExitCollisionCap;
  return kExitRuntime;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// State shared by the stages of one command.
class Run {
 public:
  Run(std::string command, const RunConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt) {
    summary_.command = std::move(command);
    summary_.config_hash = cfg.hash();
    dir_ = opt.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const RunConfig& cfg() const { return cfg_; }
  const RunOptions& opt() const { return opt_; }
  const fs::path& dir() const { return dir_; }
  RunSummary& summary() { return summary_; }
  const std::string& hash() const { return summary_.config_hash; }

  void log(const std::string& s) const {
    if (opt_.log) opt_.log(s);
  }

  std::ofstream open(const std::string& name, bool binary = false) {
    const fs::path p = dir_ / name;
    std::ofstream os(p, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!os) throw Error(ErrorCode::io_error, "cannot write '" + p.string() + "'");
    summary_.artifacts.push_back(p.string());
    return os;
  }

  // CSV with the config hash as a comment line.
  std::ofstream open_csv(const std::string& name, const std::string& columns) {
    std::ofstream os = open(name);
    os << "# config_hash=" << hash() << "\n" << columns << "\n";
    return os;
  }

  void write_json(const std::string& name, json j) {
    j["config_hash"] = hash();
    std::ofstream os = open(name);
    os << j.dump(2) << "\n";
  }

  void add(const CheckResult& c) {
    summary_.checks.push_back(c);
    log(c.line());
  }

  // Runs one stage, recording its wall time. Library errors become a failed
  // check carrying the message, so later stages still run.
  template <class Fn>
  void stage(const std::string& id, const std::string& title, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    log("[" + summary_.command + "] " + title + " ...");
    try {
      fn();
    } catch (const Error& e) {
      CheckResult c;
      c.id = id;
      c.title = title;
      c.passed = false;
      c.detail = std::string(to_string(e.code())) + ": " + e.what();
      c.data = {{"error", std::string(to_string(e.code()))}};
      add(c);
      note_error(e.code(), e.what());
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    summary_.timings.emplace_back(id, dt.count());
  }

  void note_error(ErrorCode code, const std::string& msg) {
    const int ec = exit_code_for(code);
    if (summary_.exit_code == kExitOk || summary_.exit_code == kExitCheckFailed ||
        (ec == kExitCollisionCap && summary_.exit_code == kExitRuntime)) {
      summary_.exit_code = ec;
      summary_.error = msg;
    }
  }

  RunSummary finish() {
    if (summary_.exit_code == kExitOk && !summary_.all_passed()) summary_.exit_code = kExitCheckFailed;
    try {
      const fs::path p = dir_ / ("summary_" + summary_.command + ".json");
      std::ofstream os(p, std::ios::trunc);
      if (os) {
        summary_.artifacts.push_back(p.string());
        os << summary_.to_json().dump(2) << "\n";
      }
    } catch (...) {
    }
    return summary_;
  }

 private:
  const RunConfig& cfg_;
  RunOptions opt_;
  fs::path dir_;
  RunSummary summary_;
};

struct Model {
  AngleMap map;
  NuSampler nu;
};

Model make_model(const RunConfig& cfg) {
  return {AngleMap(build_microstructure(cfg.shape), cfg.W, cfg.dynamics()), NuSampler(cfg.nu)};
}

EnsembleConfig ensemble_config(const RunConfig& cfg, unsigned workers, bool diagnostics) {
  EnsembleConfig ec;
  ec.seed = stream_seed(cfg.seed, StreamTag::ensemble);
  ec.n_chains = cfg.n_chains;
  ec.n_steps = cfg.n_steps;
  ec.checkpoints = cfg.checkpoints;
  if (cfg.clt.trend_seeds > 0) ec.checkpoints.push_back(cfg.clt.trend_n_lo);
  ec.thin = cfg.thin;
  ec.diagnostics = diagnostics;
  ec.workers = workers;
  return ec;
}

json ensemble_json(const ChainEnsemble& e) {
  json cps = json::array();
  for (std::size_t j = 0; j < e.checkpoints.size(); ++j) {
    double s = 0.0, ss = 0.0;
    for (std::uint64_t c = 0; c < e.n_chains; ++c) {
      const double v = e.partial_sum(c, j);
      s += v;
      ss += v * v;
    }
    const double n = static_cast<double>(e.n_chains);
    const double mean = s / n;
    const double var = e.n_chains > 1 ? (ss - n * mean * mean) / (n - 1.0) : 0.0;
    cps.push_back({{"n", e.checkpoints[j]}, {"mean", mean}, {"variance", var}});
  }
  return {{"master_seed", e.master_seed},
          {"n_chains", e.n_chains},
          {"n_steps", e.n_steps},
          {"checkpoints", e.checkpoints},
          {"rejection_count", e.rejection_count},
          {"partial_sums", {{"file", "partial_sums.bin"}, {"layout", "float64 little-endian [chain][checkpoint]"}}},
          {"summary", cps}};
}

void write_ensemble(Run& run, const ChainEnsemble& e, bool with_diagnostics) {
  json j = ensemble_json(e);
  if (with_diagnostics) {
    const auto& d = e.diagnostics;
    j["max_collisions"] = d.max_collisions();
    j["grazing_patterns"] = {{"L", d.grazing_patterns[0]},
                             {"R", d.grazing_patterns[1]},
                             {"D", d.grazing_patterns[2]},
                             {"other", d.grazing_patterns[3]}};
  }
  run.write_json("ensemble.json", j);
  std::ofstream bin = run.open("partial_sums.bin", true);
  write_partial_sums(bin, e);
}

// Loads a previous ensemble from the output directory when it was produced
// by the same configuration.
std::optional<ChainEnsemble> load_ensemble(const fs::path& dir, const RunConfig& cfg) {
  std::ifstream js(dir / "ensemble.json");
  if (!js) return std::nullopt;
  json j;
  try {
    j = json::parse(js);
  } catch (...) {
    return std::nullopt;
  }
  if (!j.is_object() || j.value("config_hash", "") != cfg.hash()) return std::nullopt;
  ChainEnsemble e;
  try {
    e.master_seed = j.at("master_seed").get<std::uint64_t>();
    e.n_chains = j.at("n_chains").get<std::uint64_t>();
    e.n_steps = j.at("n_steps").get<std::uint64_t>();
    e.checkpoints = j.at("checkpoints").get<std::vector<std::uint64_t>>();
    e.rejection_count = j.at("rejection_count").get<std::uint64_t>();
  } catch (const json::exception&) {
    return std::nullopt;
  }
  const std::size_t count = static_cast<std::size_t>(e.n_chains) * e.checkpoints.size();
  std::ifstream bin(dir / "partial_sums.bin", std::ios::binary);
  if (!bin) return std::nullopt;
  e.partial_sums.resize(count);
  for (auto& v : e.partial_sums) {
    if (!read_le_f64(bin, v)) return std::nullopt;
  }
  char extra;
  if (bin.read(&extra, 1)) return std::nullopt;
  return e;
}

void write_traces(Run& run, const Model& m, const RunConfig& cfg) {
  // First chain of the ensemble, replayed through the full tracer.
  std::ofstream os = run.open("traces.jsonl");
  os << json{{"config_hash", run.hash()}, {"format", "rtube visit traces"}}.dump() << "\n";
  CounterRng rng = CounterRng::stream(stream_seed(cfg.seed, StreamTag::ensemble), 0);
  const double floor = cfg.sin_floor;
  double theta = sample_mu(rng);
  while (std::sin(theta) < floor) theta = sample_mu(rng);
  const std::uint64_t n = std::min<std::uint64_t>(cfg.n_steps, 1000);
  for (std::uint64_t k = 0; k < n; ++k) {
    StepResult st;
    do {
      st = m.map.psi_step(theta, m.nu.sample(rng));
    } while (std::sin(st.theta_out) < floor);
    write_trace_jsonl(os, st.trace);
    theta = st.theta_out;
  }
}

void simulate_into(Run& run, const Model& m) {
  const RunConfig& cfg = run.cfg();
  ChainEnsemble e;
  std::uint64_t cap_hits = 0;
  run.stage("ensemble_visits", "ensemble", [&] {
    try {
      e = run_ensemble(m.map, m.nu, ensemble_config(cfg, run.opt().workers, true));
    } catch (const EnsembleError& err) {
      json failures = json::array();
      for (const auto& f : err.failures()) {
        failures.push_back({{"chain", f.chain}, {"error", std::string(to_string(f.code))}, {"message", f.message}});
        if (f.code == ErrorCode::collision_cap_exceeded) ++cap_hits;
      }
      run.write_json("ensemble_failures.json", {{"failures", failures}});
      throw;
    }
    write_ensemble(run, e, true);
    {
      std::ofstream h = run.open_csv("collision_histogram.csv", "collisions,visits");
      const auto& hist = e.diagnostics.collision_histogram;
      for (std::size_t k = 0; k < hist.size(); ++k) h << k << "," << hist[k] << "\n";
    }
    {
      std::ofstream p = run.open_csv("grazing_patterns.csv", "pattern,visits");
      const auto& gp = e.diagnostics.grazing_patterns;
      for (int k = 0; k < 4; ++k) p << to_string(static_cast<GrazingPattern>(k)) << "," << gp[k] << "\n";
    }
    if (cfg.thin > 0) {
      std::ofstream ob = run.open("orbits.bin", true);
      for (const auto& o : e.orbits) {
        for (double v : o) write_le_f64(ob, v);
      }
    }
    CheckResult c = collision_check("ensemble_visits", e.diagnostics, cfg.n_max, cap_hits);
    c.data["rejections"] = e.rejection_count;
    run.add(c);
  });
  if (run.opt().dump_traces) {
    run.stage("traces", "trace dump", [&] { write_traces(run, m, cfg); });
  }
}

}  // namespace

bool RunSummary::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

json RunSummary::to_json() const {
  json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["finished_at"] = stamp;
  j["checks"] = json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"detail", c.detail}, {"data", c.data}});
  }
  j["artifacts"] = artifacts;
  j["timings"] = json::object();
  for (const auto& [k, v] : timings) j["timings"][k] = v;
  return j;
}

RunSummary cmd_validate(const RunConfig& cfg, const RunOptions& opt) {
  Run run("validate", cfg, opt);
  run.stage("shape_valid", "shape validation", [&] {
    const ValidationReport r = validate_shape(cfg.shape);
    json arcs = json::array();
    for (const auto& a : r.arcs) {
      arcs.push_back({{"center", {a.center.x, a.center.y}},
                      {"radius", a.radius},
                      {"curvature", a.curvature()},
                      {"angle_start", a.angle_start},
                      {"angle_end", a.angle_end}});
    }
    json corners = json::array();
    for (const auto& c : r.corners) corners.push_back({{"point", {c.point.x, c.point.y}}, {"gamma", c.gamma}});
    run.write_json("validation.json", {{"valid", r.valid()},
                                       {"violation", std::string(to_string(r.violation))},
                                       {"message", r.message},
                                       {"kappa_min", r.kappa_min},
                                       {"kappa_max", r.kappa_max},
                                       {"gamma_min", r.gamma_min},
                                       {"gamma_max", r.gamma_max},
                                       {"gamma_margin", r.gamma_margin},
                                       {"alpha_max", r.alpha_max},
                                       {"alpha_margin", r.alpha_margin},
                                       {"tangency_error", r.tangency_error},
                                       {"closure_error", r.closure_error},
                                       {"corners", corners},
                                       {"arcs", arcs}});
    CheckResult c;
    c.id = "shape_valid";
    c.title = "microstructure conditions";
    c.passed = r.valid();
    c.detail = r.valid() ? "kappa in [" + num(r.kappa_min) + ", " + num(r.kappa_max) + "], gamma margin " +
                               num(r.gamma_margin) + ", alpha margin " + num(r.alpha_margin)
                         : std::string(to_string(r.violation)) + ": " + r.message;
    c.data = {{"violation", std::string(to_string(r.violation))}};
    run.add(c);
    if (!r.valid()) run.note_error(r.violation, r.message);
  });
  return run.finish();
}

RunSummary cmd_simulate(const RunConfig& cfg, const RunOptions& opt) {
  Run run("simulate", cfg, opt);
  std::optional<Model> m;
  run.stage("model", "microstructure", [&] { m.emplace(make_model(cfg)); });
  if (m) simulate_into(run, *m);
  return run.finish();
}

RunSummary cmd_tails(const RunConfig& cfg, const RunOptions& opt) {
  Run run("tails", cfg, opt);
  run.stage("tail_law", "tail law", [&] {
    const TailsOutcome t = run_tails(cfg.W, cfg.tails.samples, cfg.tails.thresholds,
                                     stream_seed(cfg.seed, StreamTag::tails), opt.workers);
    std::ofstream os = run.open_csv("tails.csv", "N,exact,emp_upper,emp_lower,stderr_upper,stderr_lower");
    for (const auto& r : t.rows) {
      os << num(r.N) << "," << num(r.exact) << "," << num(r.empirical.upper) << "," << num(r.empirical.lower) << ","
         << num(r.empirical.stderr_upper) << "," << num(r.empirical.stderr_lower) << "\n";
    }
    run.add(t.check);
  });
  return run.finish();
}

RunSummary cmd_clt(const RunConfig& cfg, const RunOptions& opt) {
  Run run("clt", cfg, opt);
  std::optional<Model> m;
  run.stage("model", "microstructure", [&] { m.emplace(make_model(cfg)); });
  if (!m) return run.finish();
  std::optional<ChainEnsemble> e;
  run.stage("clt_limit", "CLT at n_steps", [&] {
    bool reused = true;
    e = load_ensemble(run.dir(), cfg);
    if (!e) {
      reused = false;
      e = run_ensemble(m->map, m->nu, ensemble_config(cfg, opt.workers, false));
      write_ensemble(run, *e, false);
    }
    run.log(reused ? "  reusing ensemble dump" : "  ensemble computed");
    std::ofstream os = run.open_csv("clt_checkpoints.csv", "n,n_chains,mean,sample_variance,limit_variance,ks_distance");
    json rows = json::array();
    for (std::uint64_t n : e->checkpoints) {
      if (n < 1000 || e->n_chains < 1000) continue;
      const CltReport r = clt_check(e->sums_at(n), n, cfg.W);
      os << n << "," << r.n_chains << "," << num(r.mean) << "," << num(r.sample_variance) << ","
         << num(r.limit_variance) << "," << num(r.ks_distance) << "\n";
      rows.push_back({{"n", n}, {"mean", r.mean}, {"sample_variance", r.sample_variance}, {"ks_distance", r.ks_distance}});
    }
    const std::vector<double> final_sums = e->sums_at(cfg.n_steps);
    const CltReport top = clt_check(final_sums, cfg.n_steps, cfg.W);
    std::ofstream per_chain = run.open_csv("clt.csv", "chain,S_n,normalized");
    for (std::size_t i = 0; i < final_sums.size(); ++i) {
      per_chain << i << "," << num(final_sums[i]) << "," << num(top.normalized[i]) << "\n";
    }
    CheckResult c = clt_limit_check(top);
    c.data["reused_ensemble"] = reused;
    run.write_json("clt.json", {{"reused_ensemble", reused}, {"checkpoints", rows}, {"check", c.data}});
    run.add(c);
  });
  if (cfg.clt.trend_seeds > 0) {
    run.stage("clt_trend", "CLT trend over seeds", [&] {
      const std::uint64_t chains = cfg.clt.trend_chains ? cfg.clt.trend_chains : cfg.n_chains;
      const TrendOutcome t =
          run_clt_trend(m->map, m->nu, cfg.W, chains, cfg.clt.trend_n_lo, cfg.n_steps, cfg.clt.trend_seeds, cfg.seed,
                        opt.workers, e ? &*e : nullptr, opt.log);
      std::ofstream os = run.open_csv("clt_trend.csv", "seed_index,n,sample_variance,ks_distance");
      for (const auto& r : t.rows) {
        os << r.seed_index << "," << r.lo.n << "," << num(r.lo.sample_variance) << "," << num(r.lo.ks_distance)
           << "\n";
        os << r.seed_index << "," << r.hi.n << "," << num(r.hi.sample_variance) << "," << num(r.hi.ks_distance)
           << "\n";
      }
      run.add(t.check);
    });
  }
  return run.finish();
}

RunSummary cmd_spectrum(const RunConfig& cfg, const RunOptions& opt) {
  Run run("spectrum", cfg, opt);
  std::optional<Model> m;
  run.stage("model", "microstructure", [&] { m.emplace(make_model(cfg)); });
  if (!m) return run.finish();
  const std::uint64_t useed = stream_seed(cfg.seed, StreamTag::ulam);
  json spectral = json::object();
  run.stage("spectral_structure", "untwisted Ulam spectrum", [&] {
    const SpectrumOutcome s = run_spectrum(m->map, m->nu, cfg.ulam, useed, opt.workers);
    spectral["untwisted"] = s.check.data;
    spectral["stationary"] = s.stationary;
    std::ofstream bin = run.open("ulam_t0.bin", true);
    write_ulam_matrix(bin, s.p0);
    run.add(s.check);
  });
  run.stage("lambda_asymptotics", "twisted eigenvalue curve", [&] {
    const LambdaOutcome l = run_lambda(m->map, m->nu, cfg.ulam, useed, opt.workers);
    std::ofstream os = run.open_csv("lambda_curve.csv", "t,re_lambda,im_lambda,one_minus_re,t2_log_inv_t");
    for (const auto& p : l.report.lambda_curve) {
      const double x = p.t > 0.0 && p.t < 1.0 ? p.t * p.t * std::log(1.0 / p.t) : 0.0;
      os << num(p.t) << "," << num(p.lambda.real()) << "," << num(p.lambda.imag()) << ","
         << num(1.0 - p.lambda.real()) << "," << num(x) << "\n";
    }
    spectral["lambda"] = l.check.data;
    run.add(l.check);
  });
  run.stage("mixing", "correlation decay", [&] {
    const CorrOutcome c = run_corr(m->map, m->nu, cfg.corr.n_chains, cfg.corr.max_lag,
                                   stream_seed(cfg.seed, StreamTag::corr), opt.workers);
    std::ofstream os = run.open_csv("corr.csv", "lag,C,stderr");
    for (std::size_t k = 0; k < c.report.lags.size(); ++k) {
      os << c.report.lags[k] << "," << num(c.report.c[k]) << "," << num(c.report.std_error[k]) << "\n";
    }
    spectral["mixing"] = c.check.data;
    run.add(c.check);
  });
  run.write_json("spectral.json", spectral);
  return run.finish();
}

RunSummary cmd_diagnostics(const RunConfig& cfg, const RunOptions& opt) {
  Run run("diagnostics", cfg, opt);
  std::optional<Model> m;
  run.stage("model", "microstructure", [&] { m.emplace(make_model(cfg)); });
  if (!m) return run.finish();
  const auto& d = cfg.diagnostics;
  json out = json::object();
  run.stage("invariant_measure", "invariance of mu", [&] {
    const InvarianceOutcome r = run_invariance(m->map, m->nu, d.fixed_R, d.invariance_samples,
                                               stream_seed(cfg.seed, StreamTag::invariance), opt.workers);
    std::ofstream os = run.open_csv("invariance.csv", "row,ks");
    for (const auto& row : r.rows) os << row.label << "," << num(row.ks) << "\n";
    out["invariant_measure"] = r.check.data;
    run.add(r.check);
  });
  run.stage("jacobian", "Jacobians and derivatives", [&] {
    JacobianOutcome j = run_jacobian(m->map, m->nu, d.jacobian_configs, d.derivative_points,
                                     stream_seed(cfg.seed, StreamTag::jacobian));
    if (cfg.W >= d.min_expansion_width) {
      const double md = j.check.data["min_abs_derivative"].get<double>();
      if (!(md > 1.0)) j.check.passed = false;
      j.check.detail += "; min |D| " + num(md) + " (expansion > 1 required at this width)";
    }
    out["jacobian"] = j.check.data;
    run.add(j.check);
  });
  run.stage("collision_bound", "visit statistics", [&] {
    const VisitOutcome v = run_visits(m->map, m->nu, d.visits, d.sandwich_constant,
                                      stream_seed(cfg.seed, StreamTag::visits), opt.workers);
    out["collision_bound"] = v.boundedness.data;
    out["grazing_sandwich"] = v.sandwich.data;
    run.add(v.boundedness);
    run.add(v.sandwich);
    if (v.cap_hits > 0) run.note_error(ErrorCode::collision_cap_exceeded, v.failure);
  });
  run.write_json("diagnostics.json", out);
  return run.finish();
}

RunSummary cmd_all(const RunConfig& cfg, const RunOptions& opt) {
  RunSummary all;
  all.command = "all";
  all.config_hash = cfg.hash();
  const auto merge = [&](const RunSummary& s) {
    for (const auto& c : s.checks) {
      CheckResult copy = c;
      if (c.id == "model" || c.id == "traces") copy.id = s.command + "." + c.id;
      all.checks.push_back(copy);
    }
    all.artifacts.insert(all.artifacts.end(), s.artifacts.begin(), s.artifacts.end());
    for (const auto& [k, v] : s.timings) all.timings.emplace_back(s.command + "." + k, v);
    if (s.exit_code != kExitOk && s.exit_code != kExitCheckFailed &&
        (all.exit_code == kExitOk || all.exit_code == kExitCheckFailed)) {
      all.exit_code = s.exit_code;
      all.error = s.error;
    }
  };
  const RunSummary v = cmd_validate(cfg, opt);
  merge(v);
  if (v.exit_code == kExitOk) {
    merge(cmd_simulate(cfg, opt));
    merge(cmd_tails(cfg, opt));
    merge(cmd_clt(cfg, opt));
    merge(cmd_spectrum(cfg, opt));
    merge(cmd_diagnostics(cfg, opt));
  }
  if (all.exit_code == kExitOk && !all.all_passed()) all.exit_code = kExitCheckFailed;
  const fs::path dir = opt.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(opt.out_dir);
  std::ofstream os(dir / "summary_all.json", std::ios::trunc);
  if (os) {
    all.artifacts.push_back((dir / "summary_all.json").string());
    os << all.to_json().dump(2) << "\n";
  }
  return all;
}

std::vector<std::string> command_names() {
  return {"validate", "simulate", "tails", "clt", "spectrum", "diagnostics", "all"};
}

RunSummary run_command(const std::string& name, const RunConfig& cfg, const RunOptions& opt) {
  if (name == "validate") return cmd_validate(cfg, opt);
  if (name == "simulate") return cmd_simulate(cfg, opt);
  if (name == "tails") return cmd_tails(cfg, opt);
  if (name == "clt") return cmd_clt(cfg, opt);
  if (name == "spectrum") return cmd_spectrum(cfg, opt);
  if (name == "diagnostics") return cmd_diagnostics(cfg, opt);
  if (name == "all") return cmd_all(cfg, opt);
  throw Error(ErrorCode::invalid_argument, "unknown command '" + name + "'");
}

}  // namespace rtube
