// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/chain.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rtube/binio.hpp"
#include "rtube/parallel.hpp"

namespace rtube {

void SandwichStats::add(double sin_in, double sin_out) {
  const double sq = sin_in / (sin_out * sin_out);
  const double rt = sin_in / std::sqrt(sin_out);
  min_sq = std::min(min_sq, sq);
  max_sq = std::max(max_sq, sq);
  min_sqrt = std::min(min_sqrt, rt);
  max_sqrt = std::max(max_sqrt, rt);
  ++count;
}

void SandwichStats::merge(const SandwichStats& o) {
  min_sq = std::min(min_sq, o.min_sq);
  max_sq = std::max(max_sq, o.max_sq);
  min_sqrt = std::min(min_sqrt, o.min_sqrt);
  max_sqrt = std::max(max_sqrt, o.max_sqrt);
  count += o.count;
}

void VisitDiagnostics::record(const Microstructure& m, double eta, double sin_in, const FastStep& step) {
  const auto k = static_cast<std::size_t>(step.n_collisions);
  if (collision_histogram.size() <= k) collision_histogram.resize(k + 1, 0);
  ++collision_histogram[k];
  if (sin_in < eta) {
    const auto p = classify_grazing(m, step.n_collisions, step.first_arc, step.second_arc);
    ++grazing_patterns[static_cast<std::size_t>(p)];
    grazing_max_collisions = std::max<std::uint64_t>(grazing_max_collisions, k);
    sandwich.add(sin_in, step.dir_out.y);
  }
}

void VisitDiagnostics::merge(const VisitDiagnostics& o) {
  if (collision_histogram.size() < o.collision_histogram.size()) {
    collision_histogram.resize(o.collision_histogram.size(), 0);
  }
  for (std::size_t i = 0; i < o.collision_histogram.size(); ++i) collision_histogram[i] += o.collision_histogram[i];
  for (std::size_t i = 0; i < grazing_patterns.size(); ++i) grazing_patterns[i] += o.grazing_patterns[i];
  grazing_max_collisions = std::max(grazing_max_collisions, o.grazing_max_collisions);
  sandwich.merge(o.sandwich);
}

int VisitDiagnostics::max_collisions() const {
  for (std::size_t i = collision_histogram.size(); i-- > 0;) {
    if (collision_histogram[i] > 0) return static_cast<int>(i);
  }
  return 0;
}

ChainResult run_chain(const AngleMap& map, const NuSampler& nu, double theta0, std::uint64_t n,
                      CounterRng& rng, const ChainOptions& opt) {
  if (!(theta0 > 0.0 && theta0 < kPi)) throw Error(ErrorCode::domain_error, "run_chain: theta0 outside (0,pi)");
  const double W = map.width();
  const double sin_floor = map.options().sin_floor;
  const double eta = map.options().eta;

  ChainResult res;
  res.theta_final = theta0;
  if (opt.thin > 0) {
    res.orbit.reserve(static_cast<std::size_t>(n / opt.thin + 1));
    res.orbit.push_back(theta0);
  }
  if (opt.record_x) res.x.reserve(static_cast<std::size_t>(n));
  std::vector<std::uint64_t> cps = opt.checkpoints;
  std::sort(cps.begin(), cps.end());
  res.partial_sums.assign(cps.size(), 0.0);
  std::size_t next_cp = 0;
  while (next_cp < cps.size() && cps[next_cp] == 0) ++next_cp;

  Vec2 dir{std::cos(theta0), std::sin(theta0)};
  double S = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    FastStep f;
    int redraws = 0;
    for (;;) {
      try {
        f = map.advance_dir(dir, nu.sample(rng));
      } catch (const Error& err) {
        throw Error(err.code(), "step " + std::to_string(k) + ": " + err.what());
      }
      if (f.dir_out.y >= sin_floor) break;
      ++res.rejections;
      if (++redraws >= opt.max_redraws) {
        throw Error(ErrorCode::grazing_degenerate,
                    "run_chain: step " + std::to_string(k) + " keeps landing in the sin_floor band");
      }
    }
    if (opt.diagnostics) res.diagnostics.record(map.microstructure(), eta, dir.y, f);
    dir = f.dir_out;
    const double x = W * dir.x / dir.y;
    S += x;
    if (opt.record_x) res.x.push_back(x);
    if (opt.thin > 0 && (k + 1) % opt.thin == 0) res.orbit.push_back(std::atan2(dir.y, dir.x));
    while (next_cp < cps.size() && cps[next_cp] == k + 1) res.partial_sums[next_cp++] = S;
  }
  res.sum = S;
  res.theta_final = n > 0 ? std::atan2(dir.y, dir.x) : theta0;
  return res;
}

namespace {

std::string describe(const std::vector<ChainFailure>& f) {
  std::string msg = std::to_string(f.size()) + " chain(s) failed";
  for (std::size_t i = 0; i < f.size() && i < 8; ++i) {
    msg += "; chain " + std::to_string(f[i].chain) + ": " + f[i].message;
  }
  return msg;
}

}  // namespace

EnsembleError::EnsembleError(std::vector<ChainFailure> failures)
    : Error(failures.empty() ? ErrorCode::ok : failures.front().code, describe(failures)),
      failures_(std::move(failures)) {}

std::vector<double> ChainEnsemble::sums_at(std::uint64_t n) const {
  const auto it = std::find(checkpoints.begin(), checkpoints.end(), n);
  if (it == checkpoints.end()) {
    throw Error(ErrorCode::invalid_argument, "no checkpoint at n=" + std::to_string(n));
  }
  const auto j = static_cast<std::size_t>(it - checkpoints.begin());
  std::vector<double> out(n_chains);
  for (std::uint64_t c = 0; c < n_chains; ++c) out[c] = partial_sum(c, j);
  return out;
}

ChainEnsemble run_ensemble(const AngleMap& map, const NuSampler& nu, const EnsembleConfig& cfg) {
  if (cfg.n_chains == 0) throw Error(ErrorCode::invalid_argument, "run_ensemble: n_chains must be positive");
  ChainEnsemble e;
  e.master_seed = cfg.seed;
  e.n_chains = cfg.n_chains;
  e.n_steps = cfg.n_steps;
  e.checkpoints = cfg.checkpoints;
  for (auto c : e.checkpoints) {
    if (c > cfg.n_steps) throw Error(ErrorCode::invalid_argument, "run_ensemble: checkpoint beyond n_steps");
  }
  if (std::find(e.checkpoints.begin(), e.checkpoints.end(), cfg.n_steps) == e.checkpoints.end()) {
    e.checkpoints.push_back(cfg.n_steps);
  }
  std::sort(e.checkpoints.begin(), e.checkpoints.end());
  e.checkpoints.erase(std::unique(e.checkpoints.begin(), e.checkpoints.end()), e.checkpoints.end());

  ChainOptions opt;
  opt.checkpoints = e.checkpoints;
  opt.thin = cfg.thin;
  opt.diagnostics = cfg.diagnostics;

  const std::size_t nc = static_cast<std::size_t>(cfg.n_chains);
  const std::size_t ncp = e.checkpoints.size();
  e.partial_sums.assign(nc * ncp, 0.0);
  e.initial_theta.assign(nc, 0.0);
  e.final_theta.assign(nc, 0.0);
  if (cfg.thin > 0) e.orbits.resize(nc);
  std::vector<std::uint64_t> rejections(nc, 0);
  std::vector<VisitDiagnostics> diags(cfg.diagnostics ? nc : 0);
  std::vector<ChainFailure> failures(nc);
  const double sin_floor = map.options().sin_floor;

  parallel_for(nc, cfg.workers, [&](std::size_t i) {
    try {
      CounterRng rng = CounterRng::stream(cfg.seed, i);
      double theta0 = sample_mu(rng);
      while (std::sin(theta0) < sin_floor) {
        ++rejections[i];
        theta0 = sample_mu(rng);
      }
      ChainResult r = run_chain(map, nu, theta0, cfg.n_steps, rng, opt);
      std::copy(r.partial_sums.begin(), r.partial_sums.end(), e.partial_sums.begin() + static_cast<std::ptrdiff_t>(i * ncp));
      e.initial_theta[i] = theta0;
      e.final_theta[i] = r.theta_final;
      rejections[i] += r.rejections;
      if (cfg.thin > 0) e.orbits[i] = std::move(r.orbit);
      if (cfg.diagnostics) diags[i] = std::move(r.diagnostics);
    } catch (const Error& err) {
      failures[i] = {i, err.code(), err.what()};
    } catch (const std::exception& err) {
      failures[i] = {i, ErrorCode::invalid_argument, err.what()};
    }
  });

  std::vector<ChainFailure> failed;
  for (auto& f : failures) {
    if (f.code != ErrorCode::ok) failed.push_back(std::move(f));
  }
  if (!failed.empty()) throw EnsembleError(std::move(failed));

  for (std::size_t i = 0; i < nc; ++i) {
    e.rejection_count += rejections[i];
    if (cfg.diagnostics) e.diagnostics.merge(diags[i]);
  }
  return e;
}

void write_partial_sums(std::ostream& os, const ChainEnsemble& e) {
  for (double v : e.partial_sums) write_le_f64(os, v);
}

}  // namespace rtube
