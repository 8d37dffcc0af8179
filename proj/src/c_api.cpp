// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/rtube.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "rtube/chain.hpp"
#include "rtube/config.hpp"
#include "rtube/dynamics.hpp"
#include "rtube/geometry.hpp"
#include "rtube/pipeline.hpp"
#include "rtube/statistics.hpp"

struct rtube_config {
  rtube::RunConfig cfg;
  std::string hash;
  std::string canonical;
};

struct rtube_shape {
  rtube::ShapeSpec spec;
  std::string report;
};

struct rtube_map {
  rtube::AngleMap map;
  std::string trace;
};

struct rtube_ensemble {
  rtube::ChainEnsemble e;
};

struct rtube_summary {
  rtube::RunSummary s;
  std::string json;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Runs fn and maps exceptions to status codes.
template <class Fn>
int guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const rtube::Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RTUBE_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(RTUBE_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(RTUBE_INTERNAL_ERROR, "unknown exception");
  }
}

#define RTUBE_REQUIRE(cond, what) \
  if (!(cond)) return fail(RTUBE_INVALID_ARGUMENT, what)

rtube::DynamicsOptions to_options(const rtube_map_options* opt) {
  rtube::DynamicsOptions o;
  if (opt) {
    o.n_max = opt->n_max;
    o.sin_floor = opt->sin_floor;
    o.eta = opt->eta;
  }
  return o;
}

nlohmann::json parse_json(const char* text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw rtube::Error(rtube::ErrorCode::config_error, std::string("config: parse error: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* rtube_version(void) { return "0.1.0"; }

const char* rtube_status_name(int status) {
  if (status == RTUBE_INTERNAL_ERROR) return "InternalError";
  if (status < 0 || status > RTUBE_INVALID_ARGUMENT) return "Unknown";
  return rtube::to_string(static_cast<rtube::ErrorCode>(status)).data();
}

const char* rtube_last_error(void) { return g_last_error.c_str(); }

int rtube_config_load(const char* path, rtube_config** out) {
  RTUBE_REQUIRE(path && out, "rtube_config_load: null argument");
  return guarded([&] {
    auto* c = new rtube_config{rtube::load_config(path), {}, {}};
    *out = c;
    return RTUBE_OK;
  });
}

int rtube_config_parse(const char* json_text, rtube_config** out) {
  RTUBE_REQUIRE(json_text && out, "rtube_config_parse: null argument");
  return guarded([&] {
    *out = new rtube_config{rtube::parse_config(parse_json(json_text)), {}, {}};
    return RTUBE_OK;
  });
}

void rtube_config_free(rtube_config* cfg) { delete cfg; }

int rtube_config_apply_env(rtube_config* cfg) {
  RTUBE_REQUIRE(cfg, "rtube_config_apply_env: null config");
  return guarded([&] {
    rtube::apply_env_overrides(cfg->cfg);
    return RTUBE_OK;
  });
}

int rtube_config_set_seed(rtube_config* cfg, uint64_t seed) {
  RTUBE_REQUIRE(cfg, "rtube_config_set_seed: null config");
  cfg->cfg.seed = seed;
  return RTUBE_OK;
}

int rtube_config_get_seed(const rtube_config* cfg, uint64_t* seed) {
  RTUBE_REQUIRE(cfg && seed, "rtube_config_get_seed: null argument");
  *seed = cfg->cfg.seed;
  return RTUBE_OK;
}

int rtube_config_set_output_dir(rtube_config* cfg, const char* dir) {
  RTUBE_REQUIRE(cfg && dir, "rtube_config_set_output_dir: null argument");
  cfg->cfg.output_dir = dir;
  return RTUBE_OK;
}

int rtube_config_hash(rtube_config* cfg, const char** hash) {
  RTUBE_REQUIRE(cfg && hash, "rtube_config_hash: null argument");
  return guarded([&] {
    cfg->hash = cfg->cfg.hash();
    *hash = cfg->hash.c_str();
    return RTUBE_OK;
  });
}

int rtube_config_canonical(rtube_config* cfg, const char** json_text) {
  RTUBE_REQUIRE(cfg && json_text, "rtube_config_canonical: null argument");
  return guarded([&] {
    cfg->canonical = cfg->cfg.canonical().dump();
    *json_text = cfg->canonical.c_str();
    return RTUBE_OK;
  });
}

int rtube_shape_preset(const char* name, rtube_shape** out) {
  RTUBE_REQUIRE(name && out, "rtube_shape_preset: null argument");
  return guarded([&] {
    rtube::ShapeSpec s;
    s.preset = name;
    rtube::preset_arcs(s.preset);
    *out = new rtube_shape{std::move(s), {}};
    return RTUBE_OK;
  });
}

int rtube_shape_parse(const char* json_text, rtube_shape** out) {
  RTUBE_REQUIRE(json_text && out, "rtube_shape_parse: null argument");
  return guarded([&] {
    // Reuse the config parser through a minimal document.
    nlohmann::json doc = {{"tube_width", 1.0}, {"seed", 0}, {"microstructure", parse_json(json_text)}};
    *out = new rtube_shape{rtube::parse_config(doc).shape, {}};
    return RTUBE_OK;
  });
}

void rtube_shape_free(rtube_shape* shape) { delete shape; }

int rtube_shape_validate(rtube_shape* shape, int* violation, const char** report_json) {
  RTUBE_REQUIRE(shape, "rtube_shape_validate: null shape");
  return guarded([&] {
    const rtube::ValidationReport r = rtube::validate_shape(shape->spec);
    nlohmann::json arcs = nlohmann::json::array();
    for (const auto& a : r.arcs) {
      arcs.push_back({{"center", {a.center.x, a.center.y}},
                      {"radius", a.radius},
                      {"angle_start", a.angle_start},
                      {"angle_end", a.angle_end}});
    }
    shape->report = nlohmann::json{{"valid", r.valid()},
                                   {"violation", std::string(rtube::to_string(r.violation))},
                                   {"message", r.message},
                                   {"kappa_min", r.kappa_min},
                                   {"kappa_max", r.kappa_max},
                                   {"gamma_margin", r.gamma_margin},
                                   {"alpha_margin", r.alpha_margin},
                                   {"arcs", arcs}}
                        .dump();
    if (violation) *violation = static_cast<int>(r.violation);
    if (report_json) *report_json = shape->report.c_str();
    return RTUBE_OK;
  });
}

int rtube_shape_arc_count(const rtube_shape* shape, size_t* count) {
  RTUBE_REQUIRE(shape && count, "rtube_shape_arc_count: null argument");
  return guarded([&] {
    *count = shape->spec.preset.empty() ? shape->spec.arcs.size() : rtube::preset_arcs(shape->spec.preset).size();
    return RTUBE_OK;
  });
}

void rtube_map_options_default(rtube_map_options* opt) {
  if (!opt) return;
  const rtube::DynamicsOptions d;
  opt->n_max = d.n_max;
  opt->sin_floor = d.sin_floor;
  opt->eta = d.eta;
}

int rtube_map_create(const rtube_shape* shape, double width, const rtube_map_options* opt, rtube_map** out) {
  RTUBE_REQUIRE(shape && out, "rtube_map_create: null argument");
  RTUBE_REQUIRE(width > 0.0 && std::isfinite(width), "rtube_map_create: width must be positive");
  if (opt) {
    RTUBE_REQUIRE(opt->n_max > 0, "rtube_map_create: n_max must be positive");
    RTUBE_REQUIRE(opt->sin_floor > 0.0 && opt->sin_floor < 0.1, "rtube_map_create: sin_floor outside (0, 0.1)");
    RTUBE_REQUIRE(opt->eta > 0.0 && opt->eta < 1.0, "rtube_map_create: eta outside (0, 1)");
  }
  return guarded([&] {
    *out = new rtube_map{rtube::AngleMap(rtube::build_microstructure(shape->spec), width, to_options(opt)), {}};
    return RTUBE_OK;
  });
}

void rtube_map_free(rtube_map* map) { delete map; }

int rtube_map_step(const rtube_map* map, double theta, double R, rtube_step* out) {
  RTUBE_REQUIRE(map && out, "rtube_map_step: null argument");
  return guarded([&] {
    const rtube::StepResult r = map->map.psi_step(theta, R);
    out->theta_out = r.theta_out;
    out->xi = r.xi;
    out->x_disp = r.x_disp;
    out->n_collisions = r.trace.n_collisions;
    return RTUBE_OK;
  });
}

int rtube_map_derivative(const rtube_map* map, double theta, double R, double* out) {
  RTUBE_REQUIRE(map && out, "rtube_map_derivative: null argument");
  return guarded([&] {
    *out = map->map.step_derivative(theta, R);
    return RTUBE_OK;
  });
}

int rtube_map_trace_json(rtube_map* map, double theta, double R, const char** json_line) {
  RTUBE_REQUIRE(map && json_line, "rtube_map_trace_json: null argument");
  return guarded([&] {
    std::ostringstream os;
    rtube::write_trace_jsonl(os, map->map.psi_step(theta, R).trace);
    map->trace = os.str();
    while (!map->trace.empty() && map->trace.back() == '\n') map->trace.pop_back();
    *json_line = map->trace.c_str();
    return RTUBE_OK;
  });
}

int rtube_tail_exact(double N, double width, double* out) {
  RTUBE_REQUIRE(out, "rtube_tail_exact: null output");
  return guarded([&] {
    *out = rtube::tail_exact(N, width);
    return RTUBE_OK;
  });
}

int rtube_ensemble_run(const rtube_map* map, const rtube_ensemble_params* params, rtube_ensemble** out) {
  RTUBE_REQUIRE(map && params && out, "rtube_ensemble_run: null argument");
  RTUBE_REQUIRE(params->n_checkpoints == 0 || params->checkpoints, "rtube_ensemble_run: null checkpoints");
  return guarded([&] {
    rtube::EnsembleConfig ec;
    ec.seed = params->seed;
    ec.n_chains = params->n_chains;
    ec.n_steps = params->n_steps;
    ec.checkpoints.assign(params->checkpoints, params->checkpoints + params->n_checkpoints);
    ec.workers = params->workers;
    const rtube::NuSampler nu{rtube::NuSpec{}};
    *out = new rtube_ensemble{rtube::run_ensemble(map->map, nu, ec)};
    return RTUBE_OK;
  });
}

void rtube_ensemble_free(rtube_ensemble* e) { delete e; }

int rtube_ensemble_checkpoints(const rtube_ensemble* e, const uint64_t** values, size_t* count) {
  RTUBE_REQUIRE(e && values && count, "rtube_ensemble_checkpoints: null argument");
  static_assert(sizeof(std::uint64_t) == sizeof(uint64_t));
  *values = e->e.checkpoints.data();
  *count = e->e.checkpoints.size();
  return RTUBE_OK;
}

int rtube_ensemble_sums(const rtube_ensemble* e, uint64_t n, double* out, size_t capacity) {
  RTUBE_REQUIRE(e && out, "rtube_ensemble_sums: null argument");
  RTUBE_REQUIRE(capacity >= e->e.n_chains, "rtube_ensemble_sums: buffer smaller than n_chains");
  return guarded([&] {
    const auto v = e->e.sums_at(n);
    std::memcpy(out, v.data(), v.size() * sizeof(double));
    return RTUBE_OK;
  });
}

int rtube_ensemble_write(const rtube_ensemble* e, const char* path) {
  RTUBE_REQUIRE(e && path, "rtube_ensemble_write: null argument");
  return guarded([&] {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw rtube::Error(rtube::ErrorCode::io_error, std::string("cannot write '") + path + "'");
    rtube::write_partial_sums(os, e->e);
    return RTUBE_OK;
  });
}

int rtube_run(const rtube_config* cfg, const char* command, const rtube_run_options* opt, rtube_summary** out) {
  RTUBE_REQUIRE(cfg && command && out, "rtube_run: null argument");
  return guarded([&] {
    rtube::RunOptions ro;
    if (opt) {
      ro.workers = opt->workers;
      if (opt->out_dir) ro.out_dir = opt->out_dir;
      ro.dump_traces = opt->dump_traces != 0;
      if (opt->log) {
        const rtube_log_fn fn = opt->log;
        void* user = opt->log_user;
        ro.log = [fn, user](const std::string& line) { fn(line.c_str(), user); };
      }
    }
    *out = new rtube_summary{rtube::run_command(command, cfg->cfg, ro), {}};
    return RTUBE_OK;
  });
}

void rtube_summary_free(rtube_summary* s) { delete s; }

int rtube_summary_exit_code(const rtube_summary* s) { return s ? s->s.exit_code : rtube::kExitRuntime; }

size_t rtube_summary_check_count(const rtube_summary* s) { return s ? s->s.checks.size() : 0; }

int rtube_summary_check(const rtube_summary* s, size_t i, const char** id, int* passed, const char** detail) {
  RTUBE_REQUIRE(s, "rtube_summary_check: null summary");
  RTUBE_REQUIRE(i < s->s.checks.size(), "rtube_summary_check: index out of range");
  const auto& c = s->s.checks[i];
  if (id) *id = c.id.c_str();
  if (passed) *passed = c.passed ? 1 : 0;
  if (detail) *detail = c.detail.c_str();
  return RTUBE_OK;
}

int rtube_summary_json(rtube_summary* s, const char** json_text) {
  RTUBE_REQUIRE(s && json_text, "rtube_summary_json: null argument");
  return guarded([&] {
    s->json = s->s.to_json().dump(2);
    *json_text = s->json.c_str();
    return RTUBE_OK;
  });
}

}  // extern "C"
