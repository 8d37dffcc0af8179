// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtube {

// Numeric values are part of the C API (see include/rtube/rtube.h).
enum class ErrorCode : int {
  ok = 0,
  tangency_violation = 1,
  corner_angle_violation = 2,
  normal_cone_violation = 3,
  curvature_out_of_range = 4,
  open_boundary = 5,
  no_intersection = 6,
  collision_cap_exceeded = 7,
  grazing_degenerate = 8,
  singular_collision = 9,
  singular_flight = 10,
  branch_boundary = 11,
  domain_error = 12,
  empty_sample = 13,
  insufficient_data = 14,
  noise_floor = 15,
  cell_starved = 16,
  no_convergence = 17,
  config_error = 18,
  io_error = 19,
  invalid_argument = 20,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rtube
