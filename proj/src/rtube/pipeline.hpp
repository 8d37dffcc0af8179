// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
//
// Batch pipelines behind the command line: each command loads what it needs
// from a RunConfig, writes its artifacts into the output directory and
// reports a list of named checks. The check functions are also called
// directly by the acceptance driver.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rtube/chain.hpp"
#include "rtube/config.hpp"
#include "rtube/statistics.hpp"
#include "rtube/transfer.hpp"

namespace rtube {

// Process exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitValidation = 2,
  kExitCollisionCap = 3,
  kExitCheckFailed = 4,
  kExitRuntime = 5,
};

struct CheckResult {
  std::string id;  // stable key, e.g. "tail_law"
  std::string title;
  bool passed = false;
  std::string detail;
  nlohmann::json data;

  // "PASS tail_law: ..." / "FAIL ..."
  std::string line() const;
};

struct RunSummary {
  std::string command;
  std::string config_hash;
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;
  std::vector<std::pair<std::string, double>> timings;  // seconds per phase
  int exit_code = kExitOk;
  std::string error;  // message of the error that stopped the run, if any

  bool all_passed() const;
  nlohmann::json to_json() const;
};

using LogFn = std::function<void(const std::string&)>;

struct RunOptions {
  unsigned workers = 0;
  std::string out_dir;  // empty: use the config's output_dir
  bool dump_traces = false;
  LogFn log;  // progress and PASS/FAIL lines; may be empty
};

// Independent RNG master keys for the different consumers of one seed.
enum class StreamTag : std::uint64_t {
  ensemble = 0,
  tails = 1,
  invariance = 2,
  jacobian = 3,
  visits = 4,
  ulam = 5,
  corr = 6,
  trend = 7,
};
std::uint64_t stream_seed(std::uint64_t seed, StreamTag tag, std::uint64_t extra = 0);

// ---- checks -------------------------------------------------------------

struct TailsOutcome {
  std::vector<TailRow> rows;
  CheckResult check;
};
TailsOutcome run_tails(double W, std::uint64_t samples, const std::vector<double>& thresholds, std::uint64_t seed,
                       unsigned workers);

struct InvarianceRow {
  std::string label;  // "R=0.25" or "nu"
  double ks = 0.0;
};
struct InvarianceOutcome {
  std::vector<InvarianceRow> rows;
  CheckResult check;
};
InvarianceOutcome run_invariance(const AngleMap& map, const NuSampler& nu, const std::vector<double>& fixed_R,
                                 std::uint64_t samples, std::uint64_t seed, unsigned workers);

struct JacobianOutcome {
  double max_det_rel_error = 0.0;
  double max_fd_rel_error = 0.0;
  int fd_exceed = 0;  // points with FD relative error >= 1e-4
  double worst_fd_rel_error_tenth_step = 0.0;
  double min_bound_ratio = 0.0;  // min |derivative| / lower bound
  int sign_failures = 0;
  int pair_failures = 0;  // wall-wall pairs with a nonpositive pair term
  int branch_skips = 0;
  int configs = 0;
  int points = 0;
  CheckResult check;
};
JacobianOutcome run_jacobian(const AngleMap& map, const NuSampler& nu, int configs, int points, std::uint64_t seed);

struct VisitOutcome {
  VisitDiagnostics diagnostics;
  std::uint64_t visits = 0;
  std::uint64_t cap_hits = 0;
  std::string failure;  // first failure message when the ensemble stopped
  CheckResult boundedness;
  CheckResult sandwich;
};
VisitOutcome run_visits(const AngleMap& map, const NuSampler& nu, std::uint64_t visits, double sandwich_constant,
                        std::uint64_t seed, unsigned workers);
CheckResult collision_check(const std::string& id, const VisitDiagnostics& d, int n_max, std::uint64_t cap_hits);
CheckResult sandwich_check(const SandwichStats& s, double constant);

struct SpectrumOutcome {
  UlamMatrix p0;
  GapReport gap;
  std::vector<double> stationary;
  double tv_distance = 0.0;
  double refined_gap = -1.0;  // < 0 when not computed
  CheckResult check;
};
SpectrumOutcome run_spectrum(const AngleMap& map, const NuSampler& nu, const UlamSection& u, std::uint64_t seed,
                             unsigned workers);

struct LambdaOutcome {
  SpectralReport report;
  CheckResult check;
};
LambdaOutcome run_lambda(const AngleMap& map, const NuSampler& nu, const UlamSection& u, std::uint64_t seed,
                         unsigned workers);

struct CorrOutcome {
  CorrReport report;
  CheckResult check;
};
CorrOutcome run_corr(const AngleMap& map, const NuSampler& nu, std::uint64_t n_chains, int max_lag,
                     std::uint64_t seed, unsigned workers);

CheckResult clt_limit_check(const CltReport& r);

struct TrendRow {
  std::uint64_t seed_index = 0;
  CltReport lo;
  CltReport hi;
};
struct TrendOutcome {
  std::vector<TrendRow> rows;
  CheckResult check;
};
// Runs `seeds` ensembles with checkpoints {n_lo, n_hi}; index 0 reuses `first`
// when given. Variance error |var/W^2 - 1| and KS must both shrink on average.
TrendOutcome run_clt_trend(const AngleMap& map, const NuSampler& nu, double W, std::uint64_t n_chains,
                           std::uint64_t n_lo, std::uint64_t n_hi, int seeds, std::uint64_t seed, unsigned workers,
                           const ChainEnsemble* first = nullptr, const LogFn& log = {});

// ---- commands -----------------------------------------------------------

RunSummary cmd_validate(const RunConfig& cfg, const RunOptions& opt);
RunSummary cmd_simulate(const RunConfig& cfg, const RunOptions& opt);
RunSummary cmd_tails(const RunConfig& cfg, const RunOptions& opt);
RunSummary cmd_clt(const RunConfig& cfg, const RunOptions& opt);
RunSummary cmd_spectrum(const RunConfig& cfg, const RunOptions& opt);
RunSummary cmd_diagnostics(const RunConfig& cfg, const RunOptions& opt);
RunSummary cmd_all(const RunConfig& cfg, const RunOptions& opt);

// Dispatch by name; throws InvalidArgument for an unknown command.
RunSummary run_command(const std::string& name, const RunConfig& cfg, const RunOptions& opt);
std::vector<std::string> command_names();

}  // namespace rtube
