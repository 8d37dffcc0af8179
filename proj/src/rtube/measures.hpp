// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
//
// The two measures driving the random billiard: nu, the law of the entry
// offset on [0,1], and mu = (1/2) sin(theta) dtheta, the invariant angle law.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "rtube/rng.hpp"

namespace rtube {

struct NuSpec {
  enum class Kind { uniform, piecewise_linear };
  Kind kind = Kind::uniform;
  // (x, density) knots covering [0, 1]; only used for piecewise_linear.
  std::vector<std::pair<double, double>> knots;

  // Throws ConfigError unless knots are sorted, span [0,1], have
  // nonnegative finite heights and integrate to 1 within 1e-9.
  void validate() const;
  double sup_density() const;
  double mean() const;
  double cdf(double x) const;
};

// Inverse-CDF sampler with the segment masses precomputed.
class NuSampler {
 public:
  explicit NuSampler(NuSpec spec);
  double sample(CounterRng& rng) const;
  const NuSpec& spec() const { return spec_; }

 private:
  NuSpec spec_;
  std::vector<double> cumulative_;  // mass before knot i
};

double sample_nu(CounterRng& rng, const NuSpec& spec);

// mu CDF F(theta) = (1 - cos theta) / 2 and its inverse.
inline double mu_cdf(double theta) {
  if (theta <= 0.0) return 0.0;
  if (theta >= M_PI) return 1.0;
  const double s = std::sin(0.5 * theta);
  return s * s;  // (1 - cos) / 2 without cancellation near 0
}

// Inverse of mu_cdf, arccos(1 - 2u) evaluated through half-angles so that the
// near-grazing ends keep full relative precision.
inline double mu_quantile(double u) {
  if (u <= 0.5) return 2.0 * std::asin(std::sqrt(u));
  return M_PI - 2.0 * std::asin(std::sqrt(1.0 - u));
}

inline double sample_mu(CounterRng& rng) { return mu_quantile(rng.uniform_open()); }

}  // namespace rtube
