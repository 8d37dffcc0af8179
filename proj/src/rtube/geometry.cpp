// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rtube {
namespace {

double wrap_positive(double a) {
  double r = std::fmod(a, kTwoPi);
  return r < 0.0 ? r + kTwoPi : r;
}

// Roots of |o + t d - c|^2 = r^2 for unit d, ascending; false if the ray
// misses the circle.
bool circle_roots(Vec2 origin, Vec2 direction, Vec2 center, double radius_sq, double& t1,
                  double& t2) {
  const Vec2 oc = origin - center;
  const double b = dot(direction, oc);
  const double c = dot(oc, oc) - radius_sq;
  const double disc = b * b - c;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  // Stable pairing: compute the larger-magnitude root directly.
  const double q = b > 0.0 ? -b - sq : -b + sq;
  if (q == 0.0) {
    t1 = t2 = 0.0;
    return true;
  }
  const double other = c / q;
  t1 = std::min(q, other);
  t2 = std::max(q, other);
  return true;
}

std::string fmt_point(Vec2 p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

}  // namespace

std::optional<double> Arc::arclength_of(double polar, double tol) const {
  const double d = wrap_positive(angle_start - polar);
  if (d <= sweep() + tol) return radius * std::min(d, sweep());
  // Just before the start, within tolerance.
  if (kTwoPi - d <= tol) return 0.0;
  return std::nullopt;
}

Arc full_circle(Vec2 center, double radius) {
  return Arc{center, radius, kPi, kPi - kTwoPi * (1.0 - 1e-15)};
}

Arc arc_through(Vec2 from, Vec2 to, double radius) {
  const Vec2 chord = to - from;
  const double half = 0.5 * norm(chord);
  if (!(radius > half)) {
    throw Error(ErrorCode::invalid_argument, "arc_through: radius too small for chord");
  }
  const Vec2 u = normalized(chord);
  const Vec2 right{u.y, -u.x};
  const Vec2 center = from + 0.5 * chord + std::sqrt(radius * radius - half * half) * right;
  const double a0 = std::atan2(from.y - center.y, from.x - center.x);
  const double a1 = std::atan2(to.y - center.y, to.x - center.x);
  return Arc{center, radius, a0, a0 - wrap_positive(a0 - a1)};
}

Arc left_cheek(double radius, double sweep) {
  return Arc{{0.0, -radius}, radius, kPi / 2, kPi / 2 - sweep};
}

Arc right_cheek(double radius, double sweep) {
  return Arc{{1.0, -radius}, radius, kPi / 2 + sweep, kPi / 2};
}

std::optional<HitRecord> ray_arc_intersection(Vec2 origin, Vec2 direction, const Arc& arc,
                                              double t_min) {
  double t1 = 0.0;
  double t2 = 0.0;
  if (!circle_roots(origin, direction, arc.center, arc.radius * arc.radius, t1, t2)) {
    return std::nullopt;
  }
  for (double t : {t1, t2}) {
    if (!(t > t_min)) continue;
    const Vec2 p = origin + t * direction;
    const double polar = std::atan2(p.y - arc.center.y, p.x - arc.center.x);
    if (auto r = arc.arclength_of(polar, 1e-12)) {
      return HitRecord{0, t, p, Arc::inward_normal_at(polar), *r, arc.curvature()};
    }
  }
  return std::nullopt;
}

std::vector<std::string> preset_names() {
  return {"two-cheeks-one-bottom", "two-cheeks-three-bottom"};
}

std::vector<Arc> preset_arcs(const std::string& name) {
  if (name == "two-cheeks-one-bottom") {
    // Mirror-symmetric: equal cheeks meeting one bottom arc.
    const Arc left = left_cheek(0.5, kPi / 3);
    const Arc right = right_cheek(0.5, kPi / 3);
    return {left, arc_through(left.end(), right.start(), 0.25), right};
  }
  if (name == "two-cheeks-three-bottom") {
    const Arc left = left_cheek(0.5, 40.0 * kPi / 180.0);
    const Arc right = right_cheek(0.4, 45.0 * kPi / 180.0);
    const Vec2 c2{0.45, -0.16};
    const Vec2 c3{0.60, -0.15};
    return {left, arc_through(left.end(), c2, 0.3), arc_through(c2, c3, 0.5),
            arc_through(c3, right.start(), 0.25), right};
  }
  throw Error(ErrorCode::config_error, "unknown microstructure preset '" + name + "'");
}

ValidationReport validate_shape(const ShapeSpec& spec) {
  ValidationReport rep;
  rep.arcs = spec.preset.empty() ? spec.arcs : preset_arcs(spec.preset);
  const auto& arcs = rep.arcs;
  const auto& tol = spec.tol;
  auto fail = [&rep](ErrorCode code, std::string msg) {
    if (rep.violation == ErrorCode::ok) {
      rep.violation = code;
      rep.message = std::move(msg);
    }
  };

  if (arcs.size() < 2) {
    fail(ErrorCode::open_boundary, "boundary needs at least a left and a right cheek");
    return rep;
  }
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const Arc& a = arcs[i];
    if (!(a.radius > 0.0) || !std::isfinite(a.radius)) {
      fail(ErrorCode::curvature_out_of_range, "arc " + std::to_string(i) + " has invalid radius");
      return rep;
    }
    if (!(a.sweep() > 0.0) || !(a.sweep() < kTwoPi)) {
      fail(ErrorCode::open_boundary,
           "arc " + std::to_string(i) + " sweep must lie in (0, 2pi) with distinct endpoints");
      return rep;
    }
  }

  rep.kappa_min = std::numeric_limits<double>::infinity();
  rep.kappa_max = 0.0;
  for (const Arc& a : arcs) {
    rep.kappa_min = std::min(rep.kappa_min, a.curvature());
    rep.kappa_max = std::max(rep.kappa_max, a.curvature());
  }

  // Closure: (0,0) -> arcs -> (1,0).
  rep.closure_error = norm(arcs.front().start());
  rep.closure_error = std::max(rep.closure_error, norm(arcs.back().end() - Vec2{1.0, 0.0}));
  for (std::size_t i = 0; i + 1 < arcs.size(); ++i) {
    rep.closure_error = std::max(rep.closure_error, norm(arcs[i].end() - arcs[i + 1].start()));
  }
  if (rep.closure_error > tol.closure) {
    fail(ErrorCode::open_boundary,
         "arc chain does not close: endpoint mismatch " + std::to_string(rep.closure_error));
  }

  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const double k = arcs[i].curvature();
    if (k < tol.kappa_min || k > tol.kappa_max) {
      fail(ErrorCode::curvature_out_of_range,
           "arc " + std::to_string(i) + " curvature " + std::to_string(k) + " outside [" +
               std::to_string(tol.kappa_min) + ", " + std::to_string(tol.kappa_max) + "]");
    }
  }

  // Cheek tangency: the tangent must be exactly (1,0) at both tube contacts.
  const Vec2 horizontal{1.0, 0.0};
  const double left_dev = std::abs(signed_angle(horizontal, Arc::tangent_at(arcs.front().angle_start)));
  const double right_dev = std::abs(signed_angle(horizontal, Arc::tangent_at(arcs.back().angle_end)));
  rep.tangency_error = std::max(left_dev, right_dev);
  if (rep.tangency_error > tol.tangency) {
    fail(ErrorCode::tangency_violation,
         "cheek tangent deviates " + std::to_string(rep.tangency_error) + " rad from horizontal");
  }

  // Corner angles between consecutive closed pieces.
  rep.gamma_min = kPi;
  rep.gamma_max = 0.0;
  rep.gamma_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < arcs.size(); ++i) {
    const Vec2 t_in = Arc::tangent_at(arcs[i].angle_end);
    const Vec2 t_out = Arc::tangent_at(arcs[i + 1].angle_start);
    const double gamma = kPi - signed_angle(t_in, t_out);
    rep.corners.push_back({arcs[i].end(), gamma});
    rep.gamma_min = std::min(rep.gamma_min, gamma);
    rep.gamma_max = std::max(rep.gamma_max, gamma);
    rep.gamma_margin = std::min({rep.gamma_margin, gamma - tol.gamma0, (kPi - tol.gamma0) - gamma});
    if (!(gamma > tol.gamma0 && gamma < kPi - tol.gamma0)) {
      fail(ErrorCode::corner_angle_violation,
           "corner at " + fmt_point(arcs[i].end()) + " has angle " + std::to_string(gamma) +
               " outside (gamma0, pi - gamma0)");
    }
  }

  // Normal cone: sample the closed boundary by arclength plus all endpoints.
  double total = 0.0;
  for (const Arc& a : arcs) total += a.length();
  rep.alpha_max = 0.0;
  double max_y = -std::numeric_limits<double>::infinity();
  std::vector<Vec2> samples;
  for (const Arc& a : arcs) {
    const int n = std::max(2, static_cast<int>(tol.boundary_samples * a.length() / total));
    for (int j = 0; j <= n; ++j) {
      const double polar = a.angle_start - a.sweep() * j / n;
      const Vec2 nrm = Arc::inward_normal_at(polar);
      rep.alpha_max = std::max(rep.alpha_max, std::abs(std::atan2(nrm.x, nrm.y)));
      const Vec2 p = a.point_at(polar);
      max_y = std::max(max_y, p.y);
    }
  }
  rep.alpha_margin = tol.alpha0 - rep.alpha_max;
  if (!(tol.alpha0 < kPi / 2)) {
    fail(ErrorCode::normal_cone_violation, "alpha0 must be below pi/2");
  }
  if (rep.alpha_margin <= 0.0) {
    fail(ErrorCode::normal_cone_violation,
         "boundary normal deviates " + std::to_string(rep.alpha_max) + " rad from vertical (alpha0 = " +
             std::to_string(tol.alpha0) + ")");
  }
  if (max_y > tol.closure) {
    fail(ErrorCode::open_boundary, "boundary rises above the tube line");
  }

  // Simple curve: no two pieces meet except at their shared corner.
  auto strictly_inside = [](const Arc& a, double polar) {
    const double d = wrap_positive(a.angle_start - polar);
    return d > 1e-9 && d < a.sweep() - 1e-9;
  };
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    for (std::size_t j = i + 1; j < arcs.size(); ++j) {
      const Arc& a = arcs[i];
      const Arc& b = arcs[j];
      const Vec2 d = b.center - a.center;
      const double dist = norm(d);
      if (dist == 0.0 || dist > a.radius + b.radius || dist < std::abs(a.radius - b.radius)) continue;
      const double along = (dist * dist + a.radius * a.radius - b.radius * b.radius) / (2.0 * dist);
      const double h = std::sqrt(std::max(0.0, a.radius * a.radius - along * along));
      const Vec2 u = d * (1.0 / dist);
      const Vec2 base = a.center + along * u;
      for (double s : {-1.0, 1.0}) {
        const Vec2 p = base + (s * h) * perp(u);
        const double pa = std::atan2(p.y - a.center.y, p.x - a.center.x);
        const double pb = std::atan2(p.y - b.center.y, p.x - b.center.x);
        if (!strictly_inside(a, pa) || !strictly_inside(b, pb)) continue;
        fail(ErrorCode::open_boundary,
             "arcs " + std::to_string(i) + " and " + std::to_string(j) + " cross at " + fmt_point(p));
      }
    }
  }
  return rep;
}

Microstructure Microstructure::build(const ShapeSpec& spec) {
  ValidationReport rep = validate_shape(spec);
  if (!rep.valid()) throw Error(rep.violation, rep.message);
  Microstructure m;
  m.arcs_ = rep.arcs;
  m.report_ = std::move(rep);
  m.gamma0_ = spec.tol.gamma0;
  m.alpha0_ = spec.tol.alpha0;
  for (const Arc& a : m.arcs_) {
    ArcCache c{};
    c.center = a.center;
    c.radius_sq = a.radius * a.radius;
    c.start = a.start();
    c.chord = a.end() - c.start;
    c.use_chord = a.sweep() <= kPi;
    const Vec2 mid = a.point_at(a.angle_start - 0.5 * a.sweep());
    c.side_sign = cross(c.chord, mid - c.start) >= 0.0 ? 1.0 : -1.0;
    m.cache_.push_back(c);
  }
  return m;
}

bool Microstructure::in_sector(int index, Vec2 p) const {
  const ArcCache& c = cache_[static_cast<std::size_t>(index)];
  if (c.use_chord) {
    return c.side_sign * cross(c.chord, p - c.start) >= -1e-13;
  }
  const Arc& a = arcs_[static_cast<std::size_t>(index)];
  return a.arclength_of(std::atan2(p.y - a.center.y, p.x - a.center.x), 1e-12).has_value();
}

Microstructure::LeanHit Microstructure::first_hit_lean(Vec2 origin, Vec2 direction, int exclude,
                                                       double t_min) const {
  LeanHit best{kOpenSide - 1, std::numeric_limits<double>::infinity()};
  if (direction.y > 0.0) {
    const double t = -origin.y / direction.y;
    if (t >= 0.0) best = {kOpenSide, t};
  }
  const double floor_t = exclude >= kOpenSide ? -t_min : t_min;
  const int n = static_cast<int>(cache_.size());
  for (int i = 0; i < n; ++i) {
    if (i == exclude) continue;
    const ArcCache& c = cache_[static_cast<std::size_t>(i)];
    const Vec2 oc = origin - c.center;
    const double b = dot(direction, oc);
    const double cc = dot(oc, oc) - c.radius_sq;
    if (b > 0.0 && cc > 0.0) continue;  // outside the disk and moving away
    const double disc = b * b - cc;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    const double q = -b + sq;
    const double t1 = b < 0.0 ? (q != 0.0 ? cc / q : 0.0) : -b - sq;
    // From inside the cavity the walls are only reachable through the entry
    // root. When the origin sits on the boundary (a corner, or the opening
    // endpoints) a neighbouring wall can be met at t ~ 0 and must still count.
    if (!(t1 > floor_t) || !(t1 < best.t)) continue;
    if (in_sector(i, origin + t1 * direction)) best = {i, std::max(t1, 0.0)};
  }
  return best;
}

HitRecord Microstructure::first_hit(Vec2 origin, Vec2 direction, int exclude, double t_min) const {
  const LeanHit h = first_hit_lean(origin, direction, exclude, t_min);
  if (h.arc_index < kOpenSide) {
    throw Error(ErrorCode::no_intersection,
                "ray from " + fmt_point(origin) + " leaves the microstructure without a hit");
  }
  HitRecord rec;
  rec.arc_index = h.arc_index;
  rec.t = h.t;
  rec.point = origin + h.t * direction;
  if (h.arc_index == kOpenSide) {
    rec.point.y = 0.0;
    rec.inward_normal = {0.0, -1.0};
    rec.r = 1.0 - rec.point.x;  // positive orientation runs from (1,0) to (0,0)
    rec.curvature = 0.0;
    return rec;
  }
  const Arc& a = arcs_[static_cast<std::size_t>(h.arc_index)];
  const double polar = std::atan2(rec.point.y - a.center.y, rec.point.x - a.center.x);
  rec.inward_normal = Arc::inward_normal_at(polar);
  rec.r = a.arclength_of(polar, 1e-9).value_or(0.0);
  rec.curvature = a.curvature();
  return rec;
}

Microstructure build_microstructure(const ShapeSpec& spec) { return Microstructure::build(spec); }

Microstructure build_preset(const std::string& name) {
  ShapeSpec spec;
  spec.preset = name;
  return Microstructure::build(spec);
}

}  // namespace rtube
