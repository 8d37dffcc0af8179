// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
//
// One visit to a microstructure and the random angle map built from it.
//
// Both tube walls are folded into the geometry's local frame. A particle that
// left the previous wall at angle theta (measured from the +x direction of the
// tube) crosses the tube, lands W/tan(theta) further along, and enters the
// next cavity moving with velocity (cos theta, -sin theta). The exit angle is
// measured the same way, so the angle process lives on (0, pi) whichever wall
// is being visited.
//
// Randomization: the previous exit point is taken as the origin and the cell
// lattice of the next wall is shifted by R, i.e. cell k spans [R + k, R + k + 1).
// The entry offset is therefore frac(W/tan(theta) - R) and the integer cell
// displacement is floor(W/tan(theta) - R).
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rtube/geometry.hpp"

namespace rtube {

struct DynamicsOptions {
  int n_max = 64;
  double sin_floor = 1e-12;
  double t_min = kDefaultTMin;
  double eta = 0.1;      // near-grazing threshold on sin(theta_in)
  double fd_step = 1e-7;  // finite-difference step in radians
};

struct CollisionEvent {
  int arc_index = kOpenSide;
  double r = 0.0;
  double theta = 0.0;  // outgoing angle against the positive tangent, in [0, pi]
  double kappa = 0.0;
  double tau = 0.0;    // flight length since the previous event
  Vec2 position;
  Vec2 velocity_out;
};

// events[0] is the entry through the open side (theta = theta_in, tau is the
// tube crossing W/sin(theta_in) when produced by psi_step, 0 otherwise), the
// last event is the exit through the open side, and the wall collisions sit
// in between.
struct VisitTrace {
  double entry_offset = 0.0;
  double theta_in = 0.0;
  std::vector<CollisionEvent> events;
  double theta_out = 0.0;
  int n_collisions = 0;
};

enum class GrazingPattern : int { left_only = 0, right_only = 1, double_cheek = 2, other = 3 };
const char* to_string(GrazingPattern p);

struct StepResult {
  double theta_out = 0.0;
  std::int64_t xi = 0;
  double x_disp = 0.0;
  VisitTrace trace;
};

// Lightweight result of one step, used by the Monte Carlo drivers.
struct FastStep {
  double theta_out = 0.0;
  Vec2 dir_out;  // (cos theta_out, sin theta_out)
  int n_collisions = 0;
  int first_arc = kOpenSide;
  int second_arc = kOpenSide;
};

struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // [[a, b], [c, d]]

  double det() const { return a * d - b * c; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

Mat2 collision_jacobian(double tau, double kappa_prev, double kappa_cur, double theta_prev,
                        double theta_cur, double sin_floor = 1e-12);
Mat2 flight_jacobian(double theta, double W, double sin_floor = 1e-12);

// Entry offset and cell index for a crossing at angle theta under shift R.
double entry_offset(double theta, double R, double W);
std::int64_t cell_displacement(double theta, double R, double W);

VisitTrace trace_visit(const Microstructure& m, double R, double theta_in,
                       const DynamicsOptions& opt = {});

GrazingPattern classify_grazing(const Microstructure& m, int n_collisions, int first_arc,
                                int second_arc);

// Diagnostics gathered along the chain product of one step.
struct DerivativeReport {
  double derivative = 0.0;   // d theta_out / d theta
  double lower_bound = 0.0;  // 1 + W kappa_1 / (sin theta_in max(sin theta_in, sin theta_out))
  bool sign_pattern_ok = true;
  double min_pair_term = 0.0;  // min of tau k k' + k' sin th + k sin th' over wall-wall pairs
  bool has_pair = false;
  int n_collisions = 0;
  double theta_out = 0.0;
};

class AngleMap {
 public:
  AngleMap(Microstructure m, double W, DynamicsOptions opt = {});

  const Microstructure& microstructure() const { return m_; }
  double width() const { return W_; }
  const DynamicsOptions& options() const { return opt_; }

  VisitTrace trace(double R, double theta_in) const { return trace_visit(m_, R, theta_in, opt_); }
  StepResult psi_step(double theta, double R) const;
  // Exit angle only, without building a trace.
  FastStep advance(double theta, double R) const;
  double operator()(double theta, double R) const { return advance(theta, R).theta_out; }
  // Same step with the angle carried as the unit direction (cos theta,
  // sin theta); theta_out is left unset. This is the Monte Carlo hot path.
  FastStep advance_dir(Vec2 dir, double R) const;

  // d theta_out / d theta by the Jacobian chain. Throws BranchBoundary if the
  // collision sequence changes within +-10 fd_step of theta.
  double step_derivative(double theta, double R) const;
  DerivativeReport derivative_report(double theta, double R) const;
  // Central difference of the exit angle, for cross-checks.
  double finite_difference(double theta, double R, double h) const;

 private:
  FastStep visit(double offset, Vec2 v) const;
  void check_angle(double theta, const char* what) const;

  Microstructure m_;
  double W_;
  DynamicsOptions opt_;
};

StepResult psi_step(const AngleMap& map, double theta, double R);

// One JSON object per line: R, theta_in, theta_out, events[].
void write_trace_jsonl(std::ostream& os, const VisitTrace& trace);

}  // namespace rtube
