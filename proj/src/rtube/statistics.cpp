// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtube/parallel.hpp"

namespace rtube {

double tail_exact(double N, double W) {
  if (!(N > 0.0) || !(W > 0.0)) throw Error(ErrorCode::domain_error, "tail_exact: N and W must be positive");
  // 1/2 (1 - N / sqrt(N^2 + W^2)), rewritten to avoid cancellation for N >> W.
  const double h = std::hypot(N, W);
  return 0.5 * W * W / (h * (h + N));
}

TailEstimate tail_empirical(const std::vector<double>& thetas, double N, double W) {
  if (thetas.empty()) throw Error(ErrorCode::empty_sample, "tail_empirical: no samples");
  std::uint64_t up = 0;
  std::uint64_t lo = 0;
  for (double th : thetas) {
    const double x = W / std::tan(th);
    if (x > N) ++up;
    if (x < -N) ++lo;
  }
  const double n = static_cast<double>(thetas.size());
  TailEstimate t;
  t.upper = static_cast<double>(up) / n;
  t.lower = static_cast<double>(lo) / n;
  t.stderr_upper = std::sqrt(t.upper * (1.0 - t.upper) / n);
  t.stderr_lower = std::sqrt(t.lower * (1.0 - t.lower) / n);
  return t;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error(ErrorCode::empty_sample, "ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    const double v = samples[i];
    std::size_t j = i;
    while (j < samples.size() && samples[j] == v) ++j;
    const double below = cdf(std::nextafter(v, -INFINITY));
    const double at = cdf(v);
    d = std::max(d, std::abs(static_cast<double>(i) / n - below));
    d = std::max(d, std::abs(static_cast<double>(j) / n - at));
    i = j;
  }
  return std::min(d, 1.0);
}

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); }

MeanEstimate mean_with_stderr(const std::vector<double>& v) {
  if (v.empty()) throw Error(ErrorCode::empty_sample, "mean_with_stderr: no samples");
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {m, std::sqrt(var / n)};
}

CltReport clt_check(const std::vector<double>& sums, std::uint64_t n, double W, std::uint64_t min_n,
                    std::uint64_t min_chains) {
  if (n < min_n || sums.size() < min_chains) {
    throw Error(ErrorCode::insufficient_data, "clt_check: need n >= " + std::to_string(min_n) + " and >= " +
                                                  std::to_string(min_chains) + " chains");
  }
  CltReport rep;
  rep.n = n;
  rep.n_chains = sums.size();
  rep.limit_variance = W * W;
  const double nn = static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(nn * std::log(nn));
  rep.normalized.reserve(sums.size());
  for (double s : sums) rep.normalized.push_back(s * scale);
  const auto me = mean_with_stderr(rep.normalized);
  rep.mean = me.mean;
  double ss = 0.0;
  for (double x : rep.normalized) ss += (x - me.mean) * (x - me.mean);
  rep.sample_variance = ss / static_cast<double>(rep.normalized.size() - 1);
  rep.ks_distance = ks_statistic(rep.normalized, [W](double x) { return normal_cdf(x, W); });
  return rep;
}

double fit_log_slope(const std::vector<int>& lags, const std::vector<double>& c) {
  const std::size_t n = lags.size();
  if (n < 2) return NAN;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lags[i];
    const double y = std::log(std::abs(c[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

CorrReport corr_decay(const AngleMap& map, const NuSampler& nu, const std::function<double(double)>& f,
                      const std::function<double(double)>& g, const CorrConfig& cfg) {
  if (cfg.max_lag < 1 || cfg.n_chains < static_cast<std::uint64_t>(cfg.jackknife_blocks) || cfg.jackknife_blocks < 2) {
    throw Error(ErrorCode::invalid_argument, "corr_decay: bad lag/chain/block configuration");
  }
  const std::size_t L = static_cast<std::size_t>(cfg.max_lag) + 1;
  const std::size_t nc = static_cast<std::size_t>(cfg.n_chains);
  std::vector<double> f0(nc);
  std::vector<double> gk(nc * L);
  ChainOptions opt;
  opt.thin = 1;
  parallel_for(nc, cfg.workers, [&](std::size_t i) {
    CounterRng rng = CounterRng::stream(cfg.seed, i);
    double theta0 = sample_mu(rng);
    while (std::sin(theta0) < map.options().sin_floor) theta0 = sample_mu(rng);
    const ChainResult r = run_chain(map, nu, theta0, static_cast<std::uint64_t>(cfg.max_lag), rng, opt);
    f0[i] = f(theta0);
    for (std::size_t k = 0; k < L; ++k) gk[i * L + k] = g(r.orbit[k]);
  });

  // Per-block sums; block of chain i is i * B / nc.
  const std::size_t B = static_cast<std::size_t>(cfg.jackknife_blocks);
  std::vector<double> bf(B, 0.0), bn(B, 0.0), bg(B * L, 0.0), bfg(B * L, 0.0);
  for (std::size_t i = 0; i < nc; ++i) {
    const std::size_t b = i * B / nc;
    bf[b] += f0[i];
    bn[b] += 1.0;
    for (std::size_t k = 0; k < L; ++k) {
      bg[b * L + k] += gk[i * L + k];
      bfg[b * L + k] += f0[i] * gk[i * L + k];
    }
  }
  double tf = 0.0, tn = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    tf += bf[b];
    tn += bn[b];
  }

  CorrReport rep;
  for (std::size_t k = 0; k < L; ++k) {
    double tg = 0.0, tfg = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      tg += bg[b * L + k];
      tfg += bfg[b * L + k];
    }
    const double c = tfg / tn - (tf / tn) * (tg / tn);
    std::vector<double> loo(B);
    double loo_mean = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const double n = tn - bn[b];
      const double mf = (tf - bf[b]) / n;
      const double mg = (tg - bg[b * L + k]) / n;
      loo[b] = (tfg - bfg[b * L + k]) / n - mf * mg;
      loo_mean += loo[b];
    }
    loo_mean /= static_cast<double>(B);
    double var = 0.0;
    for (double v : loo) var += (v - loo_mean) * (v - loo_mean);
    var *= static_cast<double>(B - 1) / static_cast<double>(B);
    rep.lags.push_back(static_cast<int>(k));
    rep.c.push_back(c);
    rep.std_error.push_back(std::sqrt(var));
  }

  std::vector<double> fit_c;
  for (std::size_t k = 0; k < L; ++k) {
    if (std::abs(rep.c[k]) < cfg.noise_factor * rep.std_error[k]) {
      rep.first_lag_below_noise = static_cast<int>(k);
      break;
    }
    rep.fitted_lags.push_back(static_cast<int>(k));
    fit_c.push_back(rep.c[k]);
  }
  if (rep.fitted_lags.size() < 2) {
    rep.noise_floor = true;
    rep.alpha = NAN;
  } else {
    rep.alpha = std::exp(fit_log_slope(rep.fitted_lags, fit_c));
  }
  return rep;
}

}  // namespace rtube
