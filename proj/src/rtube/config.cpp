// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace rtube {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::config_error, "config: " + path + ": " + msg);
}

// Reads fields of one JSON object and remembers which keys were used, so
// that leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return path_ + "." + key; }

  const json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& require(const std::string& key) {
    const json* v = get(key);
    if (!v) fail(path(key), "missing required field");
    return *v;
  }

  double number(const std::string& key, double def) {
    const json* v = get(key);
    return v ? as_number(*v, path(key)) : def;
  }
  double required_number(const std::string& key) { return as_number(require(key), path(key)); }
  std::uint64_t count(const std::string& key, std::uint64_t def, bool allow_zero = false) {
    const json* v = get(key);
    if (!v) return def;
    return as_count(*v, path(key), allow_zero);
  }
  bool boolean(const std::string& key, bool def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(path(key), "expected true or false");
    return v->get<bool>();
  }
  std::string string(const std::string& key, const std::string& def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_string()) fail(path(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(path(it.key()), "unknown field");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }
  static std::uint64_t as_count(const json& v, const std::string& path, bool allow_zero) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      fail(path, "expected a nonnegative integer");
    }
    const auto n = v.get<std::uint64_t>();
    if (n == 0 && !allow_zero) fail(path, "must be positive");
    return n;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(ObjectReader::as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Vec2 point(const json& v, const std::string& path) {
  const auto xs = number_list(v, path);
  if (xs.size() != 2) fail(path, "expected [x, y]");
  return {xs[0], xs[1]};
}

ShapeTolerances parse_tolerances(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ShapeTolerances t;
  t.tangency = r.number("tangency", t.tangency);
  t.closure = r.number("closure", t.closure);
  t.gamma0 = r.number("gamma0", t.gamma0);
  t.alpha0 = r.number("alpha0", t.alpha0);
  t.kappa_min = r.number("kappa_min", t.kappa_min);
  t.kappa_max = r.number("kappa_max", t.kappa_max);
  t.boundary_samples = static_cast<int>(r.count("boundary_samples", static_cast<std::uint64_t>(t.boundary_samples)));
  r.finish();
  if (!(t.alpha0 > 0.0 && t.alpha0 < kPi / 2)) fail(path + ".alpha0", "must lie in (0, pi/2)");
  if (!(t.gamma0 > 0.0 && t.gamma0 < kPi / 2)) fail(path + ".gamma0", "must lie in (0, pi/2)");
  if (!(t.kappa_min > 0.0 && t.kappa_min <= t.kappa_max)) fail(path + ".kappa_min", "need 0 < kappa_min <= kappa_max");
  return t;
}

ShapeSpec parse_shape(const json& j, const std::string& path) {
  ShapeSpec s;
  if (j.is_string()) {
    s.preset = j.get<std::string>();
    preset_arcs(s.preset);  // unknown names fail here
    return s;
  }
  ObjectReader r(j, path);
  if (const json* t = r.get("tolerances")) s.tol = parse_tolerances(*t, r.path("tolerances"));
  const bool has_preset = r.has("preset");
  const bool has_arcs = r.has("arcs");
  const bool has_cheeks = r.has("cheek_radius");
  if (int(has_preset) + int(has_arcs) + int(has_cheeks) != 1) {
    fail(path, "give exactly one of 'preset', 'arcs' or 'cheek_radius'");
  }
  if (has_preset) {
    s.preset = r.string("preset", "");
    try {
      preset_arcs(s.preset);
    } catch (const Error& e) {
      fail(r.path("preset"), e.what());
    }
  } else if (has_arcs) {
    const json& arcs = r.require("arcs");
    if (!arcs.is_array()) fail(r.path("arcs"), "expected an array");
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      const std::string p = r.path("arcs") + "[" + std::to_string(i) + "]";
      ObjectReader a(arcs[i], p);
      Arc arc;
      arc.center = point(a.require("center"), a.path("center"));
      arc.radius = a.required_number("radius");
      arc.angle_start = a.required_number("angle_start");
      arc.angle_end = a.required_number("angle_end");
      a.finish();
      s.arcs.push_back(arc);
    }
  } else {
    // Cheeks of radius rho plus inner arcs chained from the left cheek end.
    const double rho = r.required_number("cheek_radius");
    const double sweep_l = r.required_number("left_sweep");
    const double sweep_r = r.number("right_sweep", sweep_l);
    const double rho_r = r.number("right_cheek_radius", rho);
    if (!(rho > 0.0) || !(rho_r > 0.0)) fail(r.path("cheek_radius"), "must be positive");
    const Arc left = left_cheek(rho, sweep_l);
    const Arc right = right_cheek(rho_r, sweep_r);
    s.arcs.push_back(left);
    Vec2 from = left.end();
    const json* inner = r.get("inner");
    if (!inner || !inner->is_array() || inner->empty()) fail(r.path("inner"), "expected a nonempty array of arcs");
    for (std::size_t i = 0; i < inner->size(); ++i) {
      const std::string p = r.path("inner") + "[" + std::to_string(i) + "]";
      ObjectReader a((*inner)[i], p);
      const double radius = a.required_number("radius");
      const bool last = i + 1 == inner->size();
      const Vec2 to = a.has("to") ? point(*a.get("to"), a.path("to")) : (last ? right.start() : Vec2{NAN, NAN});
      if (!std::isfinite(to.x)) fail(a.path("to"), "missing required field");
      a.finish();
      try {
        s.arcs.push_back(arc_through(from, to, radius));
      } catch (const Error& e) {
        fail(p, e.what());
      }
      from = to;
    }
    s.arcs.push_back(right);
  }
  r.finish();
  return s;
}

NuSpec parse_nu(const json& j, const std::string& path) {
  NuSpec nu;
  if (j.is_string()) {
    if (j.get<std::string>() != "uniform") fail(path, "expected \"uniform\" or an object");
    return nu;
  }
  ObjectReader r(j, path);
  const std::string kind = r.string("kind", "uniform");
  if (kind == "uniform") {
    nu.kind = NuSpec::Kind::uniform;
  } else if (kind == "piecewise_linear") {
    nu.kind = NuSpec::Kind::piecewise_linear;
    const json& k = r.require("knots");
    if (!k.is_array()) fail(r.path("knots"), "expected an array of [x, density] pairs");
    for (std::size_t i = 0; i < k.size(); ++i) {
      const Vec2 p = point(k[i], r.path("knots") + "[" + std::to_string(i) + "]");
      nu.knots.emplace_back(p.x, p.y);
    }
  } else {
    fail(r.path("kind"), "unknown kind '" + kind + "'");
  }
  r.finish();
  try {
    nu.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return nu;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<double> default_t_values() {
  std::vector<double> t{0.0};
  for (int i = 0; i <= 10; ++i) t.push_back(0.01 * std::pow(10.0, i / 10.0));
  return t;
}

DynamicsOptions RunConfig::dynamics() const {
  DynamicsOptions o;
  o.n_max = n_max;
  o.sin_floor = sin_floor;
  o.eta = eta;
  return o;
}

json shape_to_json(const ShapeSpec& s) {
  json j;
  if (!s.preset.empty()) {
    j["preset"] = s.preset;
  } else {
    j["arcs"] = json::array();
    for (const auto& a : s.arcs) {
      j["arcs"].push_back({{"center", {a.center.x, a.center.y}},
                           {"radius", a.radius},
                           {"angle_start", a.angle_start},
                           {"angle_end", a.angle_end}});
    }
  }
  j["tolerances"] = {{"tangency", s.tol.tangency},   {"closure", s.tol.closure},
                     {"gamma0", s.tol.gamma0},       {"alpha0", s.tol.alpha0},
                     {"kappa_min", s.tol.kappa_min}, {"kappa_max", s.tol.kappa_max},
                     {"boundary_samples", s.tol.boundary_samples}};
  return j;
}

json nu_to_json(const NuSpec& nu) {
  if (nu.kind == NuSpec::Kind::uniform) return {{"kind", "uniform"}};
  json k = json::array();
  for (const auto& [x, h] : nu.knots) k.push_back({x, h});
  return {{"kind", "piecewise_linear"}, {"knots", k}};
}

json RunConfig::canonical() const {
  json j;
  j["tube_width"] = W;
  j["microstructure"] = shape_to_json(shape);
  j["nu"] = nu_to_json(nu);
  j["seed"] = seed;
  j["n_steps"] = n_steps;
  j["n_chains"] = n_chains;
  j["checkpoints"] = checkpoints;
  j["thin"] = thin;
  j["eta"] = eta;
  j["n_max"] = n_max;
  j["sin_floor"] = sin_floor;
  j["ulam"] = {{"m", ulam.m},           {"samples_per_cell", ulam.samples_per_cell},
               {"eps_cut", ulam.eps_cut}, {"t_values", ulam.t_values},
               {"fit_window", {ulam.fit_lo, ulam.fit_hi}}, {"refine", ulam.refine}};
  j["tails"] = {{"samples", tails.samples}, {"thresholds", tails.thresholds}};
  j["clt"] = {{"trend_seeds", clt.trend_seeds}, {"trend_n_lo", clt.trend_n_lo}, {"trend_chains", clt.trend_chains}};
  j["corr"] = {{"n_chains", corr.n_chains}, {"max_lag", corr.max_lag}};
  j["diagnostics"] = {{"derivative_points", diagnostics.derivative_points},
                      {"jacobian_configs", diagnostics.jacobian_configs},
                      {"visits", diagnostics.visits},
                      {"invariance_samples", diagnostics.invariance_samples},
                      {"fixed_R", diagnostics.fixed_R},
                      {"sandwich_constant", diagnostics.sandwich_constant},
                      {"min_expansion_width", diagnostics.min_expansion_width}};
  return j;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical().dump())));
  return buf;
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  ObjectReader r(j, "$");
  c.W = r.required_number("tube_width");
  if (!(c.W > 0.0)) fail("$.tube_width", "must be positive");
  c.shape = parse_shape(r.require("microstructure"), "$.microstructure");
  if (const json* nu = r.get("nu")) c.nu = parse_nu(*nu, "$.nu");
  c.seed = ObjectReader::as_count(r.require("seed"), "$.seed", true);
  c.n_steps = r.count("n_steps", c.n_steps);
  c.n_chains = r.count("n_chains", c.n_chains);
  if (const json* cp = r.get("checkpoints")) {
    if (!cp->is_array()) fail("$.checkpoints", "expected an array of step counts");
    for (std::size_t i = 0; i < cp->size(); ++i) {
      const auto n = ObjectReader::as_count((*cp)[i], "$.checkpoints[" + std::to_string(i) + "]", false);
      if (n > c.n_steps) fail("$.checkpoints[" + std::to_string(i) + "]", "exceeds n_steps");
      c.checkpoints.push_back(n);
    }
  }
  c.thin = r.count("thin", 0, true);
  c.eta = r.number("eta", c.eta);
  if (!(c.eta > 0.0 && c.eta < 1.0)) fail("$.eta", "must lie in (0, 1)");
  c.n_max = static_cast<int>(r.count("n_max", static_cast<std::uint64_t>(c.n_max)));
  c.sin_floor = r.number("sin_floor", c.sin_floor);
  if (!(c.sin_floor > 0.0 && c.sin_floor < 0.1)) fail("$.sin_floor", "must lie in (0, 0.1)");

  c.ulam.t_values = default_t_values();
  if (const json* u = r.get("ulam")) {
    ObjectReader ur(*u, "$.ulam");
    c.ulam.m = static_cast<int>(ur.count("m", static_cast<std::uint64_t>(c.ulam.m)));
    c.ulam.samples_per_cell =
        static_cast<int>(ur.count("samples_per_cell", static_cast<std::uint64_t>(c.ulam.samples_per_cell)));
    c.ulam.eps_cut = ur.number("eps_cut", c.ulam.eps_cut);
    if (const json* t = ur.get("t_values")) c.ulam.t_values = number_list(*t, "$.ulam.t_values");
    if (const json* w = ur.get("fit_window")) {
      const auto fw = number_list(*w, "$.ulam.fit_window");
      if (fw.size() != 2 || !(fw[0] > 0.0 && fw[0] < fw[1])) fail("$.ulam.fit_window", "expected [lo, hi] with 0 < lo < hi");
      c.ulam.fit_lo = fw[0];
      c.ulam.fit_hi = fw[1];
    }
    c.ulam.refine = ur.boolean("refine", c.ulam.refine);
    ur.finish();
    if (c.ulam.m < 16) fail("$.ulam.m", "must be >= 16");
    if (!(c.ulam.eps_cut > 0.0 && c.ulam.eps_cut < 0.5)) fail("$.ulam.eps_cut", "must lie in (0, 0.5)");
    for (double t : c.ulam.t_values) {
      if (!(t >= 0.0 && t <= 0.5)) fail("$.ulam.t_values", "every t must lie in [0, 0.5]");
    }
  }
  if (const json* t = r.get("tails")) {
    ObjectReader tr(*t, "$.tails");
    c.tails.samples = tr.count("samples", c.tails.samples);
    if (const json* th = tr.get("thresholds")) c.tails.thresholds = number_list(*th, "$.tails.thresholds");
    tr.finish();
    for (double n : c.tails.thresholds) {
      if (!(n > 0.0)) fail("$.tails.thresholds", "every threshold must be positive");
    }
  }
  if (const json* t = r.get("clt")) {
    ObjectReader cr(*t, "$.clt");
    c.clt.trend_seeds = static_cast<int>(cr.count("trend_seeds", 0, true));
    c.clt.trend_n_lo = cr.count("trend_n_lo", c.clt.trend_n_lo);
    c.clt.trend_chains = cr.count("trend_chains", 0, true);
    cr.finish();
    if (c.clt.trend_n_lo >= c.n_steps && c.clt.trend_seeds > 0) fail("$.clt.trend_n_lo", "must be below n_steps");
  }
  if (const json* t = r.get("corr")) {
    ObjectReader cr(*t, "$.corr");
    c.corr.n_chains = cr.count("n_chains", c.corr.n_chains);
    c.corr.max_lag = static_cast<int>(cr.count("max_lag", static_cast<std::uint64_t>(c.corr.max_lag)));
    cr.finish();
  }
  if (const json* t = r.get("diagnostics")) {
    ObjectReader dr(*t, "$.diagnostics");
    auto& d = c.diagnostics;
    d.derivative_points = static_cast<int>(dr.count("derivative_points", static_cast<std::uint64_t>(d.derivative_points)));
    d.jacobian_configs = static_cast<int>(dr.count("jacobian_configs", static_cast<std::uint64_t>(d.jacobian_configs)));
    d.visits = dr.count("visits", d.visits);
    d.invariance_samples = dr.count("invariance_samples", d.invariance_samples);
    if (const json* fr = dr.get("fixed_R")) {
      d.fixed_R = number_list(*fr, "$.diagnostics.fixed_R");
      for (double R : d.fixed_R) {
        if (!(R >= 0.0 && R <= 1.0)) fail("$.diagnostics.fixed_R", "values must lie in [0, 1]");
      }
    }
    d.sandwich_constant = dr.number("sandwich_constant", d.sandwich_constant);
    d.min_expansion_width = dr.number("min_expansion_width", d.min_expansion_width);
    dr.finish();
  }
  c.output_dir = r.string("output_dir", c.output_dir);
  r.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config_error, std::string("config: parse error: ") + e.what());
  }
  return parse_config(j);
}

void apply_env_overrides(RunConfig& cfg) {
  const char* s = std::getenv("TUBE_SEED");
  if (!s || !*s) return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 0);
  if (errno != 0 || *end != '\0' || s[0] == '-') {
    throw Error(ErrorCode::config_error, std::string("TUBE_SEED: not a 64-bit unsigned integer: '") + s + "'");
  }
  cfg.seed = v;
}

}  // namespace rtube
