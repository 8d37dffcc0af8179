// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace rtube {
namespace {

// Angles on every boundary piece are measured from -T to the outgoing
// velocity, where T is the positive tangent (cavity on its left) and n the
// inward normal. With this orientation the collision Jacobians take the
// standard dispersing-billiard form, and on the open side the angle coincides
// with the tube-frame angle of the crossing.
double event_angle(Vec2 v, Vec2 tangent, Vec2 normal) {
  return std::atan2(dot(v, normal), -dot(v, tangent));
}

std::string fmt_state(double R, double theta) {
  std::ostringstream os;
  os.precision(17);
  os << "R=" << R << " theta=" << theta;
  return os.str();
}

struct Bounce {
  Vec2 point;
  Vec2 normal;
  double polar;
};

// Snap the hit onto its circle and return the unit normal there.
Bounce land_on(const Arc& a, Vec2 p) {
  const double polar = std::atan2(p.y - a.center.y, p.x - a.center.x);
  const Vec2 n = unit_from_angle(polar);
  return {a.center + a.radius * n, n, polar};
}

}  // namespace

const char* to_string(GrazingPattern p) {
  switch (p) {
    case GrazingPattern::left_only: return "L";
    case GrazingPattern::right_only: return "R";
    case GrazingPattern::double_cheek: return "D";
    case GrazingPattern::other: return "other";
  }
  return "other";
}

Mat2 collision_jacobian(double tau, double kappa_prev, double kappa_cur, double theta_prev,
                        double theta_cur, double sin_floor) {
  const double sp = std::sin(theta_prev);
  const double sc = std::sin(theta_cur);
  if (!(sc > sin_floor)) {
    throw Error(ErrorCode::singular_collision, "collision_jacobian: sin(theta_cur) <= sin_floor");
  }
  const double f = -1.0 / sc;
  return {f * (tau * kappa_prev + sp), f * tau,
          f * (tau * kappa_cur * kappa_prev + kappa_prev * sc + kappa_cur * sp),
          f * (tau * kappa_cur + sc)};
}

Mat2 flight_jacobian(double theta, double W, double sin_floor) {
  const double s = std::sin(theta);
  if (!(s > sin_floor)) throw Error(ErrorCode::singular_flight, "flight_jacobian: sin(theta) <= sin_floor");
  return {1.0, W / (s * s), 0.0, 1.0};
}

double entry_offset(double theta, double R, double W) {
  const double y = W / std::tan(theta) - R;
  return y - std::floor(y);
}

std::int64_t cell_displacement(double theta, double R, double W) {
  return static_cast<std::int64_t>(std::floor(W / std::tan(theta) - R));
}

VisitTrace trace_visit(const Microstructure& m, double R, double theta_in, const DynamicsOptions& opt) {
  if (!(theta_in > 0.0 && theta_in < kPi) || !(std::sin(theta_in) >= opt.sin_floor)) {
    throw Error(ErrorCode::grazing_degenerate, "trace_visit: entry angle in the sin_floor band, " +
                                                   fmt_state(R, theta_in));
  }
  if (!(R >= 0.0 && R <= 1.0)) throw Error(ErrorCode::domain_error, "trace_visit: offset outside [0,1]");

  VisitTrace tr;
  tr.entry_offset = R;
  tr.theta_in = theta_in;

  Vec2 p{R, 0.0};
  Vec2 v{std::cos(theta_in), -std::sin(theta_in)};
  const Vec2 open_tangent{-1.0, 0.0};
  const Vec2 open_normal{0.0, -1.0};
  tr.events.push_back({kOpenSide, 1.0 - R, theta_in, 0.0, 0.0, p, v});

  const auto& arcs = m.arcs();
  int last = kOpenSide;
  for (;;) {
    const auto hit = m.first_hit_lean(p, v, last, opt.t_min);
    if (hit.arc_index < kOpenSide) {
      throw Error(ErrorCode::no_intersection, "trace_visit: ray escaped the cavity, " + fmt_state(R, theta_in));
    }
    if (hit.arc_index == kOpenSide) {
      Vec2 q = p + hit.t * v;
      q.y = 0.0;
      const double theta_out = std::atan2(v.y, v.x);
      // Angle of the mirrored (inward) velocity, equal to the tube-frame exit angle.
      const Vec2 mirrored{v.x, -v.y};
      tr.events.push_back({kOpenSide, 1.0 - q.x, event_angle(mirrored, open_tangent, open_normal), 0.0,
                           hit.t, q, v});
      tr.theta_out = theta_out;
      break;
    }
    if (tr.n_collisions + 1 > opt.n_max) {
      throw Error(ErrorCode::collision_cap_exceeded,
                  "trace_visit: more than " + std::to_string(opt.n_max) + " collisions, " +
                      fmt_state(R, theta_in));
    }
    const Arc& a = arcs[static_cast<std::size_t>(hit.arc_index)];
    const Bounce b = land_on(a, p + hit.t * v);
    v = normalized(reflect(v, b.normal));
    p = b.point;
    const double r = a.arclength_of(b.polar, 1e-6).value_or(0.0);
    tr.events.push_back({hit.arc_index, r, event_angle(v, Arc::tangent_at(b.polar), b.normal),
                         a.curvature(), hit.t, p, v});
    ++tr.n_collisions;
    last = hit.arc_index;
  }
  return tr;
}

GrazingPattern classify_grazing(const Microstructure& m, int n_collisions, int first_arc, int second_arc) {
  const int left = m.left_cheek_index();
  const int right = m.right_cheek_index();
  if (n_collisions == 1) {
    if (first_arc == left) return GrazingPattern::left_only;
    if (first_arc == right) return GrazingPattern::right_only;
  } else if (n_collisions == 2) {
    if ((first_arc == left && second_arc == right) || (first_arc == right && second_arc == left)) {
      return GrazingPattern::double_cheek;
    }
  }
  return GrazingPattern::other;
}

AngleMap::AngleMap(Microstructure m, double W, DynamicsOptions opt)
    : m_(std::move(m)), W_(W), opt_(opt) {
  if (!(W > 0.0) || !std::isfinite(W)) throw Error(ErrorCode::invalid_argument, "tube width must be positive");
  if (opt_.n_max < 1) throw Error(ErrorCode::invalid_argument, "n_max must be >= 1");
}

void AngleMap::check_angle(double theta, const char* what) const {
  if (!(theta > 0.0 && theta < kPi) || !(std::sin(theta) >= opt_.sin_floor)) {
    throw Error(ErrorCode::grazing_degenerate, std::string(what) + ": angle in the sin_floor band");
  }
}

FastStep AngleMap::visit(double offset, Vec2 v) const {
  FastStep out;
  Vec2 p{offset, 0.0};
  const auto& arcs = m_.arcs();
  int last = kOpenSide;
  for (;;) {
    const auto hit = m_.first_hit_lean(p, v, last, opt_.t_min);
    if (hit.arc_index == kOpenSide) {
      out.dir_out = v;
      return out;
    }
    if (hit.arc_index < kOpenSide) {
      throw Error(ErrorCode::no_intersection,
                  "visit: ray escaped the cavity, " + fmt_state(offset, std::atan2(-v.y, v.x)));
    }
    if (out.n_collisions + 1 > opt_.n_max) {
      throw Error(ErrorCode::collision_cap_exceeded,
                  "visit: more than " + std::to_string(opt_.n_max) + " collisions, " +
                      fmt_state(offset, std::atan2(-v.y, v.x)));
    }
    const Arc& a = arcs[static_cast<std::size_t>(hit.arc_index)];
    const Vec2 d = p + hit.t * v - a.center;
    const Vec2 n = (1.0 / norm(d)) * d;
    p = a.center + a.radius * n;
    v = reflect(v, n);
    if (out.n_collisions == 0) {
      out.first_arc = hit.arc_index;
    } else if (out.n_collisions == 1) {
      out.second_arc = hit.arc_index;
    }
    ++out.n_collisions;
    last = hit.arc_index;
  }
}

FastStep AngleMap::advance(double theta, double R) const {
  check_angle(theta, "psi_step");
  FastStep f = visit(entry_offset(theta, R, W_), {std::cos(theta), -std::sin(theta)});
  f.theta_out = std::atan2(f.dir_out.y, f.dir_out.x);
  return f;
}

FastStep AngleMap::advance_dir(Vec2 dir, double R) const {
  if (!(dir.y >= opt_.sin_floor)) throw Error(ErrorCode::grazing_degenerate, "psi_step: angle in the sin_floor band");
  const double y = W_ * dir.x / dir.y - R;
  FastStep f = visit(y - std::floor(y), {dir.x, -dir.y});
  f.dir_out = normalized(f.dir_out);
  return f;
}

StepResult AngleMap::psi_step(double theta, double R) const {
  check_angle(theta, "psi_step");
  if (!(R >= 0.0 && R <= 1.0)) throw Error(ErrorCode::domain_error, "psi_step: R outside [0,1]");
  StepResult s;
  s.trace = trace_visit(m_, entry_offset(theta, R, W_), theta, opt_);
  s.trace.events.front().tau = W_ / std::sin(theta);
  s.theta_out = s.trace.theta_out;
  s.xi = cell_displacement(theta, R, W_);
  s.x_disp = W_ / std::tan(s.theta_out);
  return s;
}

StepResult psi_step(const AngleMap& map, double theta, double R) { return map.psi_step(theta, R); }

double AngleMap::finite_difference(double theta, double R, double h) const {
  return (advance(theta + h, R).theta_out - advance(theta - h, R).theta_out) / (2.0 * h);
}

DerivativeReport AngleMap::derivative_report(double theta, double R) const {
  const StepResult s = psi_step(theta, R);
  const auto& ev = s.trace.events;

  // The derivative is only defined inside a domain of monotonicity: require
  // the same collision sequence on both probes.
  const double probe = 10.0 * opt_.fd_step;
  for (double sgn : {-1.0, 1.0}) {
    const double th = theta + sgn * probe;
    if (!(th > 0.0 && th < kPi)) throw Error(ErrorCode::branch_boundary, "step_derivative: probe leaves (0,pi)");
    // Probes that cross an integer of W/tan(theta) - R jump to the far edge
    // of the cell and change branch.
    if (cell_displacement(th, R, W_) != s.xi) {
      throw Error(ErrorCode::branch_boundary, "step_derivative: probe crosses a cell edge");
    }
    const VisitTrace t = trace_visit(m_, entry_offset(th, R, W_), th, opt_);
    bool same = t.events.size() == ev.size();
    for (std::size_t j = 0; same && j < ev.size(); ++j) same = t.events[j].arc_index == ev[j].arc_index;
    if (!same) throw Error(ErrorCode::branch_boundary, "step_derivative: collision sequence changes under probe");
  }

  DerivativeReport rep;
  rep.n_collisions = s.trace.n_collisions;
  rep.theta_out = s.theta_out;

  // Tangent vector (dr, dtheta) of the entry data per unit change of theta.
  const Mat2 dh = flight_jacobian(theta, W_, opt_.sin_floor);
  double dr = dh.b;
  double dth = dh.d;
  int prev_sign = 1;
  rep.min_pair_term = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < ev.size(); ++j) {
    const CollisionEvent& a = ev[j - 1];
    const CollisionEvent& b = ev[j];
    const Mat2 df = collision_jacobian(b.tau, a.kappa, b.kappa, a.theta, b.theta, opt_.sin_floor);
    const double ndr = df.a * dr + df.b * dth;
    const double ndth = df.c * dr + df.d * dth;
    dr = ndr;
    dth = ndth;
    const int s_r = (dr > 0.0) - (dr < 0.0);
    const int s_t = (dth > 0.0) - (dth < 0.0);
    if (s_r == 0 || s_r != s_t || s_r != -prev_sign) rep.sign_pattern_ok = false;
    prev_sign = s_r;
    if (a.arc_index != kOpenSide && b.arc_index != kOpenSide) {
      const double term = b.tau * a.kappa * b.kappa + b.kappa * std::sin(a.theta) + a.kappa * std::sin(b.theta);
      rep.min_pair_term = std::min(rep.min_pair_term, term);
      rep.has_pair = true;
    }
  }
  rep.derivative = dth;
  const double kappa1 = ev.size() > 2 ? ev[1].kappa : 0.0;
  const double si = std::sin(theta);
  const double so = std::sin(s.theta_out);
  rep.lower_bound = 1.0 + W_ * kappa1 / (si * std::max(si, so));
  return rep;
}

double AngleMap::step_derivative(double theta, double R) const { return derivative_report(theta, R).derivative; }

void write_trace_jsonl(std::ostream& os, const VisitTrace& trace) {
  nlohmann::json j;
  j["R"] = trace.entry_offset;
  j["theta_in"] = trace.theta_in;
  j["theta_out"] = trace.theta_out;
  j["n_collisions"] = trace.n_collisions;
  auto& evs = j["events"] = nlohmann::json::array();
  for (const auto& e : trace.events) {
    evs.push_back({{"arc", e.arc_index},
                   {"r", e.r},
                   {"theta", e.theta},
                   {"kappa", e.kappa},
                   {"tau", e.tau},
                   {"x", e.position.x},
                   {"y", e.position.y},
                   {"vx", e.velocity_out.x},
                   {"vy", e.velocity_out.y}});
  }
  os << j.dump() << '\n';
}

}  // namespace rtube
