// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rtube/chain.hpp"

namespace rtube {

// mu(X > N) for X = W / tan(theta), theta ~ mu.
double tail_exact(double N, double W);

struct TailEstimate {
  double upper = 0.0;
  double lower = 0.0;
  double stderr_upper = 0.0;
  double stderr_lower = 0.0;
};

TailEstimate tail_empirical(const std::vector<double>& thetas, double N, double W);

struct TailRow {
  double N = 0.0;
  double exact = 0.0;
  TailEstimate empirical;
};

// Sup distance between the empirical CDF of `samples` and `cdf`. Left limits
// of `cdf` are taken one ulp below each sample, so step CDFs are handled.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

double normal_cdf(double x, double sigma = 1.0);

struct CltReport {
  std::uint64_t n = 0;
  std::uint64_t n_chains = 0;
  std::vector<double> normalized;  // S_n / sqrt(n ln n)
  double mean = 0.0;
  double sample_variance = 0.0;
  double ks_distance = 0.0;
  double limit_variance = 0.0;  // W^2
};

// Requires n >= min_n and at least min_chains samples.
CltReport clt_check(const std::vector<double>& sums, std::uint64_t n, double W, std::uint64_t min_n = 1000,
                    std::uint64_t min_chains = 1000);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanEstimate mean_with_stderr(const std::vector<double>& v);

struct CorrConfig {
  std::uint64_t seed = 0;
  std::uint64_t n_chains = 100000;
  int max_lag = 50;
  int jackknife_blocks = 20;
  double noise_factor = 3.0;  // lags with |C| below this many stderrs are discarded
  unsigned workers = 0;
};

struct CorrReport {
  std::vector<int> lags;
  std::vector<double> c;
  std::vector<double> std_error;
  std::vector<int> fitted_lags;
  double alpha = 0.0;  // exp(slope) of log|C(k)| vs k
  bool noise_floor = false;  // fewer than two lags above the noise floor
  int first_lag_below_noise = -1;
};

// C(k) = Cov(f(theta_0), g(theta_k)) with theta_0 ~ mu, estimated over
// independent chains; standard errors by delete-one-block jackknife.
CorrReport corr_decay(const AngleMap& map, const NuSampler& nu, const std::function<double(double)>& f,
                      const std::function<double(double)>& g, const CorrConfig& cfg);

// Least-squares slope of log|c| on lags, over the given indices.
double fit_log_slope(const std::vector<int>& lags, const std::vector<double>& c);

}  // namespace rtube
