// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
//
// The angle Markov chain theta_{k+1} = Psi_{R_k}(theta_k) with R_k ~ nu, its
// displacement sums S_n = X_0 + ... + X_{n-1} where X_k = W / tan(theta_{k+1}),
// and seeded ensembles of independent chains.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "rtube/dynamics.hpp"
#include "rtube/measures.hpp"

namespace rtube {

struct ChainOptions {
  std::vector<std::uint64_t> checkpoints;  // step counts at which S_n is recorded
  std::uint64_t thin = 0;                  // keep theta_k for k % thin == 0; 0 keeps none
  bool record_x = false;                   // keep every X_k (small runs only)
  bool diagnostics = false;                // collision histogram and near-grazing statistics
  int max_redraws = 1000;                  // consecutive sin_floor rejections before giving up
};

// Extremes of the near-grazing ratios sin(in)/sin^2(out) and sin(in)/sqrt(sin(out)).
struct SandwichStats {
  double min_sq = std::numeric_limits<double>::infinity();
  double max_sq = 0.0;
  double min_sqrt = std::numeric_limits<double>::infinity();
  double max_sqrt = 0.0;
  std::uint64_t count = 0;

  void add(double sin_in, double sin_out);
  void merge(const SandwichStats& o);
};

struct VisitDiagnostics {
  std::vector<std::uint64_t> collision_histogram;  // index = collisions per visit
  std::array<std::uint64_t, 4> grazing_patterns{};  // indexed by GrazingPattern
  std::uint64_t grazing_max_collisions = 0;
  SandwichStats sandwich;

  void record(const Microstructure& m, double eta, double sin_in, const FastStep& step);
  void merge(const VisitDiagnostics& o);
  int max_collisions() const;
};

struct ChainResult {
  std::vector<double> orbit;         // thinned theta sequence, theta_0 first
  std::vector<double> x;             // X_k when record_x
  std::vector<double> partial_sums;  // S at each checkpoint
  double sum = 0.0;                  // S_n
  double theta_final = 0.0;
  std::uint64_t rejections = 0;
  VisitDiagnostics diagnostics;
};

ChainResult run_chain(const AngleMap& map, const NuSampler& nu, double theta0, std::uint64_t n,
                      CounterRng& rng, const ChainOptions& opt = {});

struct EnsembleConfig {
  std::uint64_t seed = 0;
  std::uint64_t n_chains = 0;
  std::uint64_t n_steps = 0;
  std::vector<std::uint64_t> checkpoints;  // n_steps is always appended if missing
  std::uint64_t thin = 0;
  bool diagnostics = false;
  unsigned workers = 0;  // 0 = hardware concurrency
};

struct ChainFailure {
  std::uint64_t chain = 0;
  ErrorCode code = ErrorCode::ok;
  std::string message;
};

// Thrown by run_ensemble when one or more chains fail; lists every failure
// in chain order. code() is the code of the first failure.
class EnsembleError : public Error {
 public:
  explicit EnsembleError(std::vector<ChainFailure> failures);
  const std::vector<ChainFailure>& failures() const { return failures_; }

 private:
  std::vector<ChainFailure> failures_;
};

struct ChainEnsemble {
  std::uint64_t master_seed = 0;
  std::uint64_t n_chains = 0;
  std::uint64_t n_steps = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> partial_sums;  // row-major [chain][checkpoint]
  std::vector<double> initial_theta;
  std::vector<double> final_theta;
  std::vector<std::vector<double>> orbits;
  std::uint64_t rejection_count = 0;
  VisitDiagnostics diagnostics;

  double partial_sum(std::uint64_t chain, std::size_t checkpoint) const {
    return partial_sums[chain * checkpoints.size() + checkpoint];
  }
  // S at checkpoint `n` for every chain; throws InvalidArgument if n is not a checkpoint.
  std::vector<double> sums_at(std::uint64_t n) const;
};

// Chain i draws from CounterRng::stream(seed, i): theta_0 from mu, then one
// R per step (more after a rejection). Output is independent of `workers`.
ChainEnsemble run_ensemble(const AngleMap& map, const NuSampler& nu, const EnsembleConfig& cfg);

// Little-endian float64, row-major [chain][checkpoint].
void write_partial_sums(std::ostream& os, const ChainEnsemble& e);

}  // namespace rtube
