// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

namespace rtube {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// Counter-clockwise quarter turn.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline Vec2 normalized(Vec2 v) { return v * (1.0 / norm(v)); }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }
// Signed angle turning a into b, in (-pi, pi].
inline double signed_angle(Vec2 a, Vec2 b) { return std::atan2(cross(a, b), dot(a, b)); }

}  // namespace rtube
