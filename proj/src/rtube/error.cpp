// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/error.hpp"

namespace rtube {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok: return "Ok";
    case ErrorCode::tangency_violation: return "TangencyViolation";
    case ErrorCode::corner_angle_violation: return "CornerAngleViolation";
    case ErrorCode::normal_cone_violation: return "NormalConeViolation";
    case ErrorCode::curvature_out_of_range: return "CurvatureOutOfRange";
    case ErrorCode::open_boundary: return "OpenBoundary";
    case ErrorCode::no_intersection: return "NoIntersection";
    case ErrorCode::collision_cap_exceeded: return "CollisionCapExceeded";
    case ErrorCode::grazing_degenerate: return "GrazingDegenerate";
    case ErrorCode::singular_collision: return "SingularCollision";
    case ErrorCode::singular_flight: return "SingularFlight";
    case ErrorCode::branch_boundary: return "BranchBoundary";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::empty_sample: return "EmptySample";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::noise_floor: return "NoiseFloor";
    case ErrorCode::cell_starved: return "CellStarved";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace rtube
