// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "rtube/parallel.hpp"
#include "rtube/pipeline.hpp"

namespace rtube {
namespace {

constexpr std::size_t kBlock = 1u << 16;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g(double v) { return fmt("%.6g", v); }

CheckResult make_check(std::string id, std::string title) {
  CheckResult c;
  c.id = std::move(id);
  c.title = std::move(title);
  c.data = nlohmann::json::object();
  return c;
}

// Fills `n` samples of theta ~ mu, block b drawing from stream(seed, b).
std::vector<double> mu_samples(std::uint64_t n, std::uint64_t seed, unsigned workers, double sin_floor = 0.0) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const std::size_t blocks = (out.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    CounterRng rng = CounterRng::stream(seed, b);
    const std::size_t end = std::min(out.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      double th = sample_mu(rng);
      while (std::sin(th) < sin_floor) th = sample_mu(rng);
      out[i] = th;
    }
  });
  return out;
}

nlohmann::json histogram_json(const std::vector<std::uint64_t>& h) { return nlohmann::json(h); }

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, StreamTag tag, std::uint64_t extra) {
  return mix64(split_key(seed, static_cast<std::uint64_t>(tag)) + extra * CounterRng::kGolden);
}

std::string CheckResult::line() const {
  return std::string(passed ? "PASS " : "FAIL ") + id + " (" + title + "): " + detail;
}

TailsOutcome run_tails(double W, std::uint64_t samples, const std::vector<double>& thresholds, std::uint64_t seed,
                       unsigned workers) {
  TailsOutcome out;
  out.check = make_check("tail_law", "tail of X under mu");
  const std::vector<double> thetas = mu_samples(samples, seed, workers);
  const double n = static_cast<double>(thetas.size());
  bool ok = true;
  double worst_z = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (double N : thresholds) {
    TailRow row;
    row.N = N;
    row.exact = tail_exact(N, W);
    row.empirical = tail_empirical(thetas, N, W);
    // Binomial standard error under the exact tail probability.
    const double se = std::sqrt(row.exact * (1.0 - row.exact) / n);
    const double z = se > 0.0 ? std::abs(row.empirical.upper - row.exact) / se : 0.0;
    worst_z = std::max(worst_z, z);
    if (!(z <= 3.0)) ok = false;
    rows.push_back({{"N", N},
                    {"exact", row.exact},
                    {"upper", row.empirical.upper},
                    {"lower", row.empirical.lower},
                    {"z_upper", z}});
    out.rows.push_back(row);
  }
  // Leading-order check of the N^-2 decay, on the closed form.
  const double ratio = tail_exact(100.0, W) * 4.0 * 100.0 * 100.0 / (W * W);
  const bool ratio_ok = ratio >= 0.9 && ratio <= 1.0;
  double emp_ratio = NAN;
  for (const auto& r : out.rows) {
    if (r.N == 100.0) emp_ratio = r.empirical.upper * 4.0 * 100.0 * 100.0 / (W * W);
  }
  out.check.passed = ok && ratio_ok;
  out.check.detail = "max |z| = " + fmt("%.3f", worst_z) + " over " + std::to_string(thresholds.size()) +
                     " thresholds (limit 3); 4N^2/W^2 tail at N=100: exact " + fmt("%.5f", ratio) + ", empirical " +
                     fmt("%.5f", emp_ratio) + " (need [0.9, 1])";
  out.check.data = {{"samples", samples}, {"rows", rows}, {"ratio_exact", ratio}, {"ratio_empirical", emp_ratio}};
  return out;
}

InvarianceOutcome run_invariance(const AngleMap& map, const NuSampler& nu, const std::vector<double>& fixed_R,
                                 std::uint64_t samples, std::uint64_t seed, unsigned workers) {
  InvarianceOutcome out;
  out.check = make_check("invariant_measure", "mu preserved by Psi_R and by the nu-average");
  const double sin_floor = map.options().sin_floor;
  double worst = 0.0;
  std::size_t failures = 0;
  std::string first_error;
  for (std::size_t row = 0; row <= fixed_R.size(); ++row) {
    const bool averaged = row == fixed_R.size();
    const double R = averaged ? 0.0 : fixed_R[row];
    const std::uint64_t row_seed = mix64(seed + row * CounterRng::kGolden);
    std::vector<double> pushed = mu_samples(samples, row_seed, workers, sin_floor);
    const std::size_t blocks = (pushed.size() + kBlock - 1) / kBlock;
    std::vector<std::string> errors(blocks);
    parallel_for(blocks, workers, [&](std::size_t b) {
      CounterRng rng = CounterRng::stream(mix64(row_seed ^ 0x5bd1e995ULL), b);
      const std::size_t end = std::min(pushed.size(), (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) {
        try {
          pushed[i] = map.advance(pushed[i], averaged ? nu.sample(rng) : R).theta_out;
        } catch (const Error& e) {
          if (errors[b].empty()) errors[b] = e.what();
          pushed[i] = NAN;
        }
      }
    });
    for (const auto& e : errors) {
      if (!e.empty()) {
        ++failures;
        if (first_error.empty()) first_error = e;
      }
    }
    pushed.erase(std::remove_if(pushed.begin(), pushed.end(), [](double v) { return std::isnan(v); }), pushed.end());
    InvarianceRow r;
    r.label = averaged ? "nu" : "R=" + g(R);
    r.ks = ks_statistic(std::move(pushed), mu_cdf);
    worst = std::max(worst, r.ks);
    out.check.data["rows"].push_back({{"label", r.label}, {"ks", r.ks}});
    out.rows.push_back(r);
  }
  out.check.passed = worst < 0.01 && failures == 0;
  out.check.detail = "max KS = " + fmt("%.5f", worst) + " over " + std::to_string(out.rows.size()) + " rows of " +
                     std::to_string(samples) + " samples (limit 0.01)";
  if (failures) out.check.detail += "; " + std::to_string(failures) + " blocks had step errors: " + first_error;
  out.check.data["samples"] = samples;
  return out;
}

JacobianOutcome run_jacobian(const AngleMap& map, const NuSampler& nu, int configs, int points, std::uint64_t seed) {
  JacobianOutcome out;
  out.check = make_check("jacobian", "collision Jacobian and step derivative");
  const double sin_floor = map.options().sin_floor;
  CounterRng rng(seed);

  // Determinants at collisions taken from real visits, one random pair each.
  int attempts = 0;
  while (out.configs < configs && attempts < 100 * configs) {
    ++attempts;
    const double theta = sample_mu(rng);
    const double R = nu.sample(rng);
    if (std::sin(theta) < sin_floor) continue;
    StepResult st;
    try {
      st = map.psi_step(theta, R);
    } catch (const Error&) {
      continue;
    }
    const auto& ev = st.trace.events;
    std::vector<std::size_t> walls;
    for (std::size_t j = 1; j < ev.size(); ++j) {
      if (ev[j].arc_index != kOpenSide) walls.push_back(j);
    }
    if (walls.empty()) continue;
    const std::size_t j = walls[static_cast<std::size_t>(rng.uniform() * static_cast<double>(walls.size()))];
    const CollisionEvent& a = ev[j - 1];
    const CollisionEvent& b = ev[j];
    if (std::sin(b.theta) <= sin_floor) continue;
    const Mat2 df = collision_jacobian(b.tau, a.kappa, b.kappa, a.theta, b.theta, sin_floor);
    const double expected = std::sin(a.theta) / std::sin(b.theta);
    const double rel = std::abs(std::abs(df.det()) - expected) / expected;
    out.max_det_rel_error = std::max(out.max_det_rel_error, rel);
    ++out.configs;
  }

  // Chain-rule derivative against central differences.
  const double h = map.options().fd_step;
  out.min_bound_ratio = std::numeric_limits<double>::infinity();
  double min_abs_derivative = std::numeric_limits<double>::infinity();
  double worst_theta = 0.0, worst_R = 0.0, worst_derivative = 0.0;
  attempts = 0;
  while (out.points < points && attempts < 100 * points) {
    ++attempts;
    const double theta = sample_mu(rng);
    const double R = nu.sample(rng);
    if (std::sin(theta) < 1e3 * h) continue;
    DerivativeReport rep;
    double fd = 0.0;
    try {
      rep = map.derivative_report(theta, R);
      fd = map.finite_difference(theta, R, h);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::branch_boundary) ++out.branch_skips;
      continue;
    }
    const double rel = std::abs(rep.derivative - fd) / std::abs(fd);
    if (rel > out.max_fd_rel_error) {
      out.max_fd_rel_error = rel;
      worst_theta = theta;
      worst_R = R;
      worst_derivative = rep.derivative;
    }
    if (rel >= 1e-4) ++out.fd_exceed;
    out.min_bound_ratio = std::min(out.min_bound_ratio, std::abs(rep.derivative) / rep.lower_bound);
    min_abs_derivative = std::min(min_abs_derivative, std::abs(rep.derivative));
    if (!rep.sign_pattern_ok) ++out.sign_failures;
    if (rep.has_pair && !(rep.min_pair_term > 0.0)) ++out.pair_failures;
    ++out.points;
  }

  // Same worst point with a ten times smaller step: a drop by about 100
  // separates truncation error of the stencil from a wrong derivative.
  if (out.points > 0) {
    const double fd10 = map.finite_difference(worst_theta, worst_R, 0.1 * h);
    out.worst_fd_rel_error_tenth_step = std::abs(worst_derivative - fd10) / std::abs(fd10);
  }
  const bool det_ok = out.configs == configs && out.max_det_rel_error <= 1e-12;
  const bool fd_ok = out.points == points && out.max_fd_rel_error < 1e-4;
  const bool bound_ok = out.min_bound_ratio >= 1.0 - 1e-12;
  out.check.passed = det_ok && fd_ok && bound_ok && out.sign_failures == 0 && out.pair_failures == 0;
  out.check.detail = "det rel err " + g(out.max_det_rel_error) + " at " + std::to_string(out.configs) +
                     " collisions (limit 1e-12); derivative vs FD rel err " + g(out.max_fd_rel_error) + " at " +
                     std::to_string(out.points) + " points (limit 1e-4, " + std::to_string(out.fd_exceed) + " above; worst point at step h/10: " +
                     g(out.worst_fd_rel_error_tenth_step) + "); min |D|/bound " + g(out.min_bound_ratio) +
                     "; sign failures " + std::to_string(out.sign_failures) + ", pair-term failures " +
                     std::to_string(out.pair_failures);
  out.check.data = {{"configs", out.configs},
                    {"points", out.points},
                    {"max_det_rel_error", out.max_det_rel_error},
                    {"max_fd_rel_error", out.max_fd_rel_error},
                    {"fd_points_above_limit", out.fd_exceed},
                    {"worst_point", {{"theta", worst_theta}, {"R", worst_R}, {"derivative", worst_derivative}}},
                    {"worst_fd_rel_error_tenth_step", out.worst_fd_rel_error_tenth_step},
                    {"min_bound_ratio", out.min_bound_ratio},
                    {"min_abs_derivative", min_abs_derivative},
                    {"sign_failures", out.sign_failures},
                    {"pair_failures", out.pair_failures},
                    {"branch_skips", out.branch_skips}};
  return out;
}

CheckResult collision_check(const std::string& id, const VisitDiagnostics& d, int n_max, std::uint64_t cap_hits) {
  CheckResult c = make_check(id, "bounded collisions and near-grazing patterns");
  const auto& p = d.grazing_patterns;
  const int max_c = d.max_collisions();
  c.passed = cap_hits == 0 && max_c <= n_max && p[3] == 0 && d.grazing_max_collisions <= 2;
  c.detail = "max collisions " + std::to_string(max_c) + " (cap " + std::to_string(n_max) + "), cap hits " +
             std::to_string(cap_hits) + "; near-grazing L/R/D/other = " + std::to_string(p[0]) + "/" +
             std::to_string(p[1]) + "/" + std::to_string(p[2]) + "/" + std::to_string(p[3]) +
             ", max collisions there " + std::to_string(d.grazing_max_collisions);
  c.data = {{"collision_histogram", histogram_json(d.collision_histogram)},
            {"max_collisions", max_c},
            {"cap_hits", cap_hits},
            {"grazing_patterns", {{"L", p[0]}, {"R", p[1]}, {"D", p[2]}, {"other", p[3]}}},
            {"grazing_max_collisions", d.grazing_max_collisions}};
  return c;
}

CheckResult sandwich_check(const SandwichStats& s, double constant) {
  CheckResult c = make_check("grazing_sandwich", "near-grazing exit angle sandwich");
  const bool finite = s.count > 0 && std::isfinite(s.min_sq) && std::isfinite(s.max_sq) &&
                      std::isfinite(s.min_sqrt) && std::isfinite(s.max_sqrt) && s.min_sq > 0.0;
  c.passed = finite && s.min_sq >= 1.0 / constant && s.max_sqrt <= constant;
  c.detail = std::to_string(s.count) + " visits; sin_in/sin_out^2 in [" + g(s.min_sq) + ", " + g(s.max_sq) +
             "], sin_in/sqrt(sin_out) in [" + g(s.min_sqrt) + ", " + g(s.max_sqrt) + "]; need min_sq >= 1/C and " +
             "max_sqrt <= C with C = " + g(constant);
  c.data = {{"count", s.count},       {"min_sq", s.min_sq},     {"max_sq", s.max_sq},
            {"min_sqrt", s.min_sqrt}, {"max_sqrt", s.max_sqrt}, {"constant", constant}};
  return c;
}

VisitOutcome run_visits(const AngleMap& map, const NuSampler& nu, std::uint64_t visits, double sandwich_constant,
                        std::uint64_t seed, unsigned workers) {
  VisitOutcome out;
  EnsembleConfig ec;
  ec.seed = seed;
  ec.n_chains = std::min<std::uint64_t>(100, std::max<std::uint64_t>(visits, 1));
  ec.n_steps = (visits + ec.n_chains - 1) / ec.n_chains;
  ec.diagnostics = true;
  ec.workers = workers;
  out.visits = ec.n_chains * ec.n_steps;
  try {
    const ChainEnsemble e = run_ensemble(map, nu, ec);
    out.diagnostics = e.diagnostics;
  } catch (const EnsembleError& err) {
    out.failure = err.what();
    for (const auto& f : err.failures()) {
      if (f.code == ErrorCode::collision_cap_exceeded) ++out.cap_hits;
    }
  }
  out.boundedness = collision_check("collision_bound", out.diagnostics, map.options().n_max, out.cap_hits);
  out.sandwich = sandwich_check(out.diagnostics.sandwich, sandwich_constant);
  if (!out.failure.empty()) {
    out.boundedness.passed = false;
    out.boundedness.detail += "; ensemble failed: " + out.failure;
    out.sandwich.passed = false;
  }
  out.boundedness.data["visits"] = out.visits;
  return out;
}

SpectrumOutcome run_spectrum(const AngleMap& map, const NuSampler& nu, const UlamSection& u, std::uint64_t seed,
                             unsigned workers) {
  SpectrumOutcome out;
  out.check = make_check("spectral_structure", "untwisted Ulam matrix");
  UlamOptions uo;
  uo.m = u.m;
  uo.samples_per_cell = u.samples_per_cell;
  uo.eps_cut = u.eps_cut;
  uo.seed = mix64(seed + static_cast<std::uint64_t>(u.m));
  uo.workers = workers;
  const UlamSamples s = sample_ulam(map, nu, uo);
  out.p0 = ulam_from_samples(s, 0.0, map.width());
  out.gap = spectral_gap(out.p0.entries);
  out.stationary = stationary_vector(out.p0.entries);
  const double unif = 1.0 / static_cast<double>(u.m);
  for (double p : out.stationary) out.tv_distance += 0.5 * std::abs(p - unif);
  if (u.refine) {
    UlamOptions fine = uo;
    fine.m = 2 * u.m;
    fine.seed = mix64(seed + static_cast<std::uint64_t>(fine.m));
    out.refined_gap = spectral_gap(build_ulam(map, nu, fine, 0.0).entries).gap;
  }
  const double lam_err = std::abs(out.gap.lambda1 - cplx(1.0, 0.0));
  const bool gap_ok = out.gap.gap > 0.0;
  const bool stable = !u.refine ||
                      (out.refined_gap > 0.0 && std::abs(out.refined_gap - out.gap.gap) <= 0.5 * out.gap.gap);
  out.check.passed = lam_err <= 0.005 && out.tv_distance <= 0.02 && gap_ok && stable;
  out.check.detail = "|lambda1 - 1| = " + g(lam_err) + " (limit 0.005); TV to discretized mu " +
                     g(out.tv_distance) + " (limit 0.02); gap " + g(out.gap.gap) + " at m=" + std::to_string(u.m);
  if (u.refine) out.check.detail += ", " + g(out.refined_gap) + " at m=" + std::to_string(2 * u.m) + " (within 50%)";
  out.check.data = {{"m", u.m},
                    {"samples_per_cell", u.samples_per_cell},
                    {"lambda1", {out.gap.lambda1.real(), out.gap.lambda1.imag()}},
                    {"lambda2_modulus", out.gap.lambda2_modulus},
                    {"gap", out.gap.gap},
                    {"refined_gap", u.refine ? nlohmann::json(out.refined_gap) : nlohmann::json()},
                    {"tv_distance", out.tv_distance},
                    {"escaped", s.escaped},
                    {"mc_tolerance", out.p0.mc_tolerance()}};
  return out;
}

LambdaOutcome run_lambda(const AngleMap& map, const NuSampler& nu, const UlamSection& u, std::uint64_t seed,
                         unsigned workers) {
  LambdaOutcome out;
  out.check = make_check("lambda_asymptotics", "twisted leading eigenvalue near t = 0");
  UlamOptions uo;
  uo.m = u.m;
  uo.samples_per_cell = u.samples_per_cell;
  uo.eps_cut = u.eps_cut;
  uo.seed = mix64(seed + static_cast<std::uint64_t>(u.m));
  uo.workers = workers;
  const UlamSamples s = sample_ulam(map, nu, uo);
  const double W = map.width();
  out.report = lambda_curve(s, W, u.t_values, u.fit_lo, u.fit_hi);
  const double target = 0.5 * W * W;
  const double c = out.report.fitted_coefficient;
  const double rel = std::abs(c - target) / target;
  // Same fit applied to 1 - E cos(tX) = 1 - Wt K1(Wt) under mu, the leading
  // term of 1 - lambda_t at these t.
  double sxy = 0.0, sxx = 0.0;
  for (double t : u.t_values) {
    if (!(t >= u.fit_lo && t <= u.fit_hi)) continue;
    const double x = t * t * std::log(1.0 / t);
    sxy += x * (1.0 - W * t * std::cyl_bessel_k(1.0, W * t));
    sxx += x * x;
  }
  const double reference = sxx > 0.0 ? sxy / sxx : NAN;
  out.check.passed = out.report.fit_points >= 2 && rel <= 0.3;
  out.check.detail = "fitted coefficient " + g(c) + " over " + std::to_string(out.report.fit_points) +
                     " t values in [" + g(u.fit_lo) + ", " + g(u.fit_hi) + "], target W^2/2 = " + g(target) +
                     " (within 30%: relative error " + g(rel) + "); same fit of 1 - E cos(tX) gives " +
                     g(reference);
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : out.report.lambda_curve) curve.push_back({p.t, p.lambda.real(), p.lambda.imag()});
  out.check.data = {{"m", u.m},         {"fitted_coefficient", c}, {"target", target}, {"relative_error", rel},
                    {"curve", curve}, {"fit_points", out.report.fit_points},
                    {"leading_term_fit", reference}};
  return out;
}

CorrOutcome run_corr(const AngleMap& map, const NuSampler& nu, std::uint64_t n_chains, int max_lag,
                     std::uint64_t seed, unsigned workers) {
  CorrOutcome out;
  out.check = make_check("mixing", "decay of correlations of cos(theta)");
  CorrConfig cc;
  cc.seed = seed;
  cc.n_chains = n_chains;
  cc.max_lag = max_lag;
  cc.workers = workers;
  // cos has mean zero under mu.
  const auto f = [](double th) { return std::cos(th); };
  out.report = corr_decay(map, nu, f, f, cc);
  const auto& r = out.report;
  out.check.passed = !r.noise_floor && r.first_lag_below_noise > 0 && r.first_lag_below_noise <= max_lag &&
                     r.alpha < 1.0;
  out.check.detail = "C(k) below noise from lag " + std::to_string(r.first_lag_below_noise) + " (limit " +
                     std::to_string(max_lag) + "); fitted rate alpha = " + g(r.alpha) + " over " +
                     std::to_string(r.fitted_lags.size()) + " lags (need < 1)";
  out.check.data = {{"n_chains", n_chains},
                    {"alpha", r.noise_floor ? nlohmann::json() : nlohmann::json(r.alpha)},
                    {"first_lag_below_noise", r.first_lag_below_noise},
                    {"fitted_lags", r.fitted_lags}};
  return out;
}

CheckResult clt_limit_check(const CltReport& r) {
  CheckResult c = make_check("clt_limit", "S_n / sqrt(n ln n) against Normal(0, W^2)");
  const double rel = std::abs(r.sample_variance - r.limit_variance) / r.limit_variance;
  c.passed = rel <= 0.25 && r.ks_distance < 0.05;
  c.detail = "n = " + std::to_string(r.n) + ", " + std::to_string(r.n_chains) + " chains: variance " +
             g(r.sample_variance) + " vs " + g(r.limit_variance) + " (relative error " + g(rel) +
             ", limit 0.25); KS " + g(r.ks_distance) + " (limit 0.05)";
  c.data = {{"n", r.n},
            {"n_chains", r.n_chains},
            {"mean", r.mean},
            {"sample_variance", r.sample_variance},
            {"limit_variance", r.limit_variance},
            {"ks_distance", r.ks_distance}};
  return c;
}

TrendOutcome run_clt_trend(const AngleMap& map, const NuSampler& nu, double W, std::uint64_t n_chains,
                           std::uint64_t n_lo, std::uint64_t n_hi, int seeds, std::uint64_t seed, unsigned workers,
                           const ChainEnsemble* first, const LogFn& log) {
  TrendOutcome out;
  out.check = make_check("clt_trend", "CLT agreement improves with n");
  double var_lo = 0.0, var_hi = 0.0, ks_lo = 0.0, ks_hi = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const auto has = [&](const ChainEnsemble& e) {
      return std::find(e.checkpoints.begin(), e.checkpoints.end(), n_lo) != e.checkpoints.end() &&
             e.n_steps == n_hi && e.n_chains == n_chains;
    };
    ChainEnsemble local;
    const ChainEnsemble* e = nullptr;
    if (s == 0 && first && has(*first)) {
      e = first;
    } else {
      EnsembleConfig ec;
      ec.seed = s == 0 ? stream_seed(seed, StreamTag::ensemble) : stream_seed(seed, StreamTag::trend, s);
      ec.n_chains = n_chains;
      ec.n_steps = n_hi;
      ec.checkpoints = {n_lo};
      ec.workers = workers;
      local = run_ensemble(map, nu, ec);
      e = &local;
    }
    TrendRow row;
    row.seed_index = static_cast<std::uint64_t>(s);
    row.lo = clt_check(e->sums_at(n_lo), n_lo, W);
    row.hi = clt_check(e->sums_at(n_hi), n_hi, W);
    row.lo.normalized.clear();
    row.hi.normalized.clear();
    var_lo += std::abs(row.lo.sample_variance / row.lo.limit_variance - 1.0);
    var_hi += std::abs(row.hi.sample_variance / row.hi.limit_variance - 1.0);
    ks_lo += row.lo.ks_distance;
    ks_hi += row.hi.ks_distance;
    if (log) {
      log("  trend seed " + std::to_string(s) + ": var " + g(row.lo.sample_variance) + " -> " +
          g(row.hi.sample_variance) + ", KS " + g(row.lo.ks_distance) + " -> " + g(row.hi.ks_distance));
    }
    out.rows.push_back(std::move(row));
  }
  const double k = seeds > 0 ? 1.0 / seeds : NAN;
  var_lo *= k;
  var_hi *= k;
  ks_lo *= k;
  ks_hi *= k;
  out.check.passed = seeds > 0 && var_hi < var_lo && ks_hi < ks_lo;
  out.check.detail = "mean over " + std::to_string(seeds) + " seeds, n " + std::to_string(n_lo) + " -> " +
                     std::to_string(n_hi) + ": |var/W^2 - 1| " + g(var_lo) + " -> " + g(var_hi) + ", KS " + g(ks_lo) +
                     " -> " + g(ks_hi) + " (both must decrease)";
  out.check.data = {{"seeds", seeds},          {"n_lo", n_lo},     {"n_hi", n_hi},  {"var_error_lo", var_lo},
                    {"var_error_hi", var_hi}, {"ks_lo", ks_lo}, {"ks_hi", ks_hi}};
  return out;
}

}  // namespace rtube
