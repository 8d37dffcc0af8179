// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: a single JSON document. Unknown fields are rejected and
// every error names the offending field path (for example "$.ulam.m").
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtube/dynamics.hpp"
#include "rtube/geometry.hpp"
#include "rtube/measures.hpp"

namespace rtube {

// 0 followed by 11 log-spaced points in [0.01, 0.1].
std::vector<double> default_t_values();

struct UlamSection {
  int m = 256;
  int samples_per_cell = 10000;
  double eps_cut = 1e-4;
  std::vector<double> t_values = default_t_values();
  double fit_lo = 0.01;
  double fit_hi = 0.1;
  bool refine = true;  // also build the 2m-cell matrix for the gap stability check
};

struct TailsSection {
  std::uint64_t samples = 10000000;
  std::vector<double> thresholds{5.0, 10.0, 20.0, 50.0, 100.0};
};

struct CltSection {
  int trend_seeds = 0;            // > 0 enables the n_lo -> n_steps improvement check
  std::uint64_t trend_n_lo = 10000;
  std::uint64_t trend_chains = 0;  // 0 = n_chains
};

struct CorrSection {
  std::uint64_t n_chains = 200000;
  int max_lag = 50;
};

struct DiagnosticsSection {
  int derivative_points = 1000;
  int jacobian_configs = 1000;
  std::uint64_t visits = 1000000;
  std::uint64_t invariance_samples = 1000000;
  std::vector<double> fixed_R{0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95};
  double sandwich_constant = 64.0;
  double min_expansion_width = 1.0;  // expansion > 1 is asserted only when W exceeds this
};

struct RunConfig {
  double W = 10.0;
  ShapeSpec shape;
  NuSpec nu;
  std::uint64_t seed = 0;
  std::uint64_t n_steps = 100000;
  std::uint64_t n_chains = 10000;
  std::vector<std::uint64_t> checkpoints;
  std::uint64_t thin = 0;
  double eta = 0.1;
  int n_max = 64;
  double sin_floor = 1e-12;
  UlamSection ulam;
  TailsSection tails;
  CltSection clt;
  CorrSection corr;
  DiagnosticsSection diagnostics;
  std::string output_dir = "out";

  DynamicsOptions dynamics() const;
  // Canonical JSON of every setting except output_dir.
  nlohmann::json canonical() const;
  // 16 hex digits of FNV-1a over canonical().dump().
  std::string hash() const;
};

// Throws Error(config_error) with the field path in the message.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
// Applies TUBE_SEED from the environment if set.
void apply_env_overrides(RunConfig& cfg);

nlohmann::json shape_to_json(const ShapeSpec& s);
nlohmann::json nu_to_json(const NuSpec& nu);

}  // namespace rtube
