// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
//
// Microstructure geometry: circular-arc cavity boundaries, their validation
// against the shape conditions (curvature bounds, cheek tangency, corner
// angles, normal cone), and exact ray/arc intersection.
//
// Local frame: the open side runs from (0,0) to (1,0) and the cavity lies in
// y < 0. Every closed boundary piece bulges into the cavity (a dispersing
// wall), so each arc is traversed clockwise about its center when the cavity
// is kept on the left. The positive boundary orientation therefore runs
// (0,0) -> left cheek -> inner arcs -> right cheek -> (1,0) -> open side.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtube/error.hpp"
#include "rtube/vec2.hpp"

namespace rtube {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kDefaultTMin = 1e-9;
inline constexpr int kOpenSide = -1;

// A circular arc traversed clockwise about `center` from polar angle
// `angle_start` down to `angle_end`; angle_start - angle_end is the sweep.
struct Arc {
  Vec2 center;
  double radius = 1.0;
  double angle_start = 0.0;
  double angle_end = 0.0;

  double curvature() const { return 1.0 / radius; }
  double sweep() const { return angle_start - angle_end; }
  double length() const { return radius * sweep(); }
  Vec2 point_at(double polar) const { return center + radius * unit_from_angle(polar); }
  Vec2 start() const { return point_at(angle_start); }
  Vec2 end() const { return point_at(angle_end); }
  // Normal pointing into the cavity (away from the disk).
  static Vec2 inward_normal_at(double polar) { return unit_from_angle(polar); }
  // Positively oriented tangent (cavity on the left).
  static Vec2 tangent_at(double polar) { return {std::sin(polar), -std::cos(polar)}; }
  // Arclength from the arc start to the point at `polar`, or nullopt when the
  // polar angle is outside the sector by more than `tol` radians.
  std::optional<double> arclength_of(double polar, double tol = 0.0) const;
};

// Full-circle helper used mostly by tests.
Arc full_circle(Vec2 center, double radius);
// Minor arc from `from` to `to` bulging toward the left of the travel
// direction, i.e. into a cavity kept on the left.
Arc arc_through(Vec2 from, Vec2 to, double radius);
// Cheek tangent to the tube line at (0,0), descending `sweep` radians.
Arc left_cheek(double radius, double sweep);
// Cheek tangent to the tube line at (1,0), rising over `sweep` radians.
Arc right_cheek(double radius, double sweep);

struct HitRecord {
  int arc_index = kOpenSide;
  double t = 0.0;
  Vec2 point;
  Vec2 inward_normal;
  double r = 0.0;          // arclength coordinate on the hit piece
  double curvature = 0.0;  // 0 on the open side
};

// Smallest t > t_min at which origin + t*direction meets the arc's sector.
std::optional<HitRecord> ray_arc_intersection(Vec2 origin, Vec2 direction, const Arc& arc,
                                              double t_min = kDefaultTMin);

// Elastic reflection v - 2(v.n)n.
inline Vec2 reflect(Vec2 v, Vec2 n) { return v - (2.0 * dot(v, n)) * n; }

struct ShapeTolerances {
  double tangency = 1e-10;  // rad, cheek tangent vs horizontal
  double closure = 1e-9;    // length, arc chain endpoint mismatch
  double gamma0 = 0.1;      // rad, corner angles must lie in (gamma0, pi - gamma0)
  double alpha0 = 1.3;      // rad, normal cone half-width, < pi/2
  double kappa_min = 0.05;
  double kappa_max = 1e3;
  int boundary_samples = 10000;
};

struct ShapeSpec {
  std::string preset;     // non-empty selects a named preset
  std::vector<Arc> arcs;  // otherwise the explicit chain [left, inner..., right]
  ShapeTolerances tol;
};

std::vector<std::string> preset_names();
std::vector<Arc> preset_arcs(const std::string& name);

struct CornerReport {
  Vec2 point;
  double gamma = 0.0;
};

struct ValidationReport {
  std::vector<Arc> arcs;
  std::vector<CornerReport> corners;
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  double gamma_margin = 0.0;  // min over corners of distance to (gamma0, pi - gamma0) ends
  double alpha_max = 0.0;     // largest sampled |normal angle from vertical|
  double alpha_margin = 0.0;  // alpha0 - alpha_max
  double tangency_error = 0.0;
  double closure_error = 0.0;
  ErrorCode violation = ErrorCode::ok;
  std::string message;

  bool valid() const { return violation == ErrorCode::ok; }
};

ValidationReport validate_shape(const ShapeSpec& spec);

class Microstructure {
 public:
  // Throws Error with the violated condition's code.
  static Microstructure build(const ShapeSpec& spec);

  const std::vector<Arc>& arcs() const { return arcs_; }
  const ValidationReport& report() const { return report_; }
  double gamma0() const { return gamma0_; }
  double alpha0() const { return alpha0_; }
  double kappa_min() const { return report_.kappa_min; }
  double kappa_max() const { return report_.kappa_max; }
  int left_cheek_index() const { return 0; }
  int right_cheek_index() const { return static_cast<int>(arcs_.size()) - 1; }

  // Minimal-t hit over all arcs (except `exclude`) and the open side. Throws
  // NoIntersection if nothing is hit.
  HitRecord first_hit(Vec2 origin, Vec2 direction, int exclude = kOpenSide - 1,
                      double t_min = kDefaultTMin) const;

  struct LeanHit {
    int arc_index;
    double t;
  };
  // Same search without building the full record; arc_index == kOpenSide - 1
  // signals no intersection.
  LeanHit first_hit_lean(Vec2 origin, Vec2 direction, int exclude, double t_min) const;

 private:
  struct ArcCache {
    Vec2 center;
    double radius_sq;
    Vec2 start;
    Vec2 chord;
    double side_sign;  // sign of the arc midpoint relative to the chord
    bool use_chord;    // sweep <= pi
  };

  bool in_sector(int index, Vec2 p) const;

  std::vector<Arc> arcs_;
  std::vector<ArcCache> cache_;
  ValidationReport report_;
  double gamma0_ = 0.0;
  double alpha0_ = 0.0;
};

Microstructure build_microstructure(const ShapeSpec& spec);
Microstructure build_preset(const std::string& name);

}  // namespace rtube
