// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/measures.hpp"

#include <algorithm>
#include <string>

#include "rtube/error.hpp"

namespace rtube {

void NuSpec::validate() const {
  if (kind == Kind::uniform) return;
  if (knots.size() < 2) throw Error(ErrorCode::config_error, "nu: piecewise_linear needs >= 2 knots");
  if (knots.front().first != 0.0 || knots.back().first != 1.0) {
    throw Error(ErrorCode::config_error, "nu: knots must start at x=0 and end at x=1");
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto [x, h] = knots[i];
    if (!std::isfinite(h) || h < 0.0) throw Error(ErrorCode::config_error, "nu: density must be finite and >= 0");
    if (i > 0) {
      const double dx = x - knots[i - 1].first;
      if (!(dx > 0.0)) throw Error(ErrorCode::config_error, "nu: knot x must be strictly increasing");
      mass += 0.5 * dx * (h + knots[i - 1].second);
    }
  }
  if (std::abs(mass - 1.0) > 1e-9) {
    throw Error(ErrorCode::config_error, "nu: density integrates to " + std::to_string(mass) + ", not 1");
  }
}

double NuSpec::sup_density() const {
  if (kind == Kind::uniform) return 1.0;
  double h = 0.0;
  for (const auto& k : knots) h = std::max(h, k.second);
  return h;
}

double NuSpec::mean() const {
  if (kind == Kind::uniform) return 0.5;
  // Integral of x h(x) over each linear segment.
  double m = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const auto [x0, h0] = knots[i - 1];
    const auto [x1, h1] = knots[i];
    const double dx = x1 - x0;
    m += dx * (h0 * (2.0 * x0 + x1) + h1 * (x0 + 2.0 * x1)) / 6.0;
  }
  return m;
}

double NuSpec::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (kind == Kind::uniform) return x;
  double c = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const auto [x0, h0] = knots[i - 1];
    const auto [x1, h1] = knots[i];
    if (x >= x1) {
      c += 0.5 * (x1 - x0) * (h0 + h1);
      continue;
    }
    const double s = x - x0;
    return c + h0 * s + 0.5 * (h1 - h0) * s * s / (x1 - x0);
  }
  return 1.0;
}

NuSampler::NuSampler(NuSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.kind == NuSpec::Kind::piecewise_linear) {
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < spec_.knots.size(); ++i) {
      const auto [x0, h0] = spec_.knots[i - 1];
      const auto [x1, h1] = spec_.knots[i];
      cumulative_.push_back(cumulative_.back() + 0.5 * (x1 - x0) * (h0 + h1));
    }
  }
}

double NuSampler::sample(CounterRng& rng) const {
  const double u = rng.uniform();
  if (spec_.kind == NuSpec::Kind::uniform) return u;
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t seg = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cumulative_.begin()));
  seg = std::min(seg, spec_.knots.size() - 1);
  const auto [x0, h0] = spec_.knots[seg - 1];
  const auto [x1, h1] = spec_.knots[seg];
  const double len = x1 - x0;
  const double need = target - cumulative_[seg - 1];
  // Solve h0 s + (h1 - h0) s^2 / (2 len) = need for s in [0, len].
  const double a = 0.5 * (h1 - h0) / len;
  const double disc = h0 * h0 + 4.0 * a * need;
  const double denom = h0 + std::sqrt(std::max(0.0, disc));
  const double s = denom > 0.0 ? 2.0 * need / denom : 0.0;
  return std::clamp(x0 + s, x0, x1);
}

double sample_nu(CounterRng& rng, const NuSpec& spec) { return NuSampler(spec).sample(rng); }

}  // namespace rtube
