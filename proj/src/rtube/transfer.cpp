// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#include "rtube/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "rtube/binio.hpp"
#include "rtube/parallel.hpp"

namespace rtube {

DenseMatrix DenseMatrix::from_real(std::size_t size, const std::vector<double>& rows) {
  if (rows.size() != size * size) throw Error(ErrorCode::invalid_argument, "from_real: size mismatch");
  DenseMatrix m(size);
  for (std::size_t i = 0; i < rows.size(); ++i) m.a[i] = rows[i];
  return m;
}

void DenseMatrix::apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
  y.assign(n, cplx{});
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* row = &a[i * n];
    cplx s{};
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void DenseMatrix::apply_transpose(const std::vector<cplx>& x, std::vector<cplx>& y) const {
  y.assign(n, cplx{});
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* row = &a[i * n];
    const cplx xi = x[i];
    for (std::size_t j = 0; j < n; ++j) y[j] += row[j] * xi;
  }
}

UlamGrid::UlamGrid(int m, double eps_cut) : m_(m), eps_(eps_cut) {
  if (m < 1) throw Error(ErrorCode::invalid_argument, "UlamGrid: need at least one cell");
  if (!(eps_cut >= 0.0 && eps_cut < kPi / 2)) throw Error(ErrorCode::invalid_argument, "UlamGrid: bad eps_cut");
  f_lo_ = mu_cdf(eps_cut);
  df_ = (1.0 - 2.0 * f_lo_) / m;
}

double UlamGrid::lower_edge(int c) const { return mu_quantile(f_lo_ + c * df_); }

int UlamGrid::locate(double theta) const {
  const double u = (mu_cdf(theta) - f_lo_) / df_;
  if (u < 0.0) return -1;
  if (u >= m_) return m_;
  return std::min(static_cast<int>(u), m_ - 1);
}

double UlamGrid::sample(int c, double u) const { return mu_quantile(f_lo_ + (c + u) * df_); }

UlamSamples sample_ulam(const AngleMap& map, const NuSampler& nu, const UlamOptions& opt) {
  if (opt.m < 16 || opt.samples_per_cell < 1000) {
    throw Error(ErrorCode::invalid_argument, "sample_ulam: need m >= 16 and samples_per_cell >= 1000");
  }
  UlamSamples s;
  s.grid = UlamGrid(opt.m, opt.eps_cut);
  s.samples_per_cell = opt.samples_per_cell;
  const std::size_t m = static_cast<std::size_t>(opt.m);
  const std::size_t k = static_cast<std::size_t>(opt.samples_per_cell);
  s.source.assign(m * k, 0.0);
  s.destination.assign(m * k, 0);
  std::vector<std::uint64_t> escaped(m, 0);
  std::vector<std::uint64_t> rejected(m, 0);
  std::vector<std::uint64_t> valid(m, 0);
  const double sin_floor = map.options().sin_floor;

  parallel_for(m, opt.workers, [&](std::size_t c) {
    CounterRng rng = CounterRng::stream(opt.seed, c);
    for (std::size_t j = 0; j < k; ++j) {
      const double theta = s.grid.sample(static_cast<int>(c), rng.uniform());
      const Vec2 dir{std::cos(theta), std::sin(theta)};
      FastStep f;
      for (int tries = 0;; ++tries) {
        f = map.advance_dir(dir, nu.sample(rng));
        if (f.dir_out.y >= sin_floor) break;
        ++rejected[c];
        if (tries > 1000) throw Error(ErrorCode::grazing_degenerate, "sample_ulam: persistent sin_floor landing");
      }
      int d = s.grid.locate(std::atan2(f.dir_out.y, f.dir_out.x));
      if (d < 0 || d >= opt.m) {
        ++escaped[c];
        d = std::clamp(d, 0, opt.m - 1);
      }
      s.source[c * k + j] = theta;
      s.destination[c * k + j] = d;
      ++valid[c];
    }
  });
  for (std::size_t c = 0; c < m; ++c) {
    if (valid[c] == 0) throw Error(ErrorCode::cell_starved, "sample_ulam: cell " + std::to_string(c) + " has no samples");
    s.escaped += escaped[c];
    s.rejections += rejected[c];
  }
  return s;
}

double UlamMatrix::mc_tolerance() const { return 3.0 / std::sqrt(static_cast<double>(samples_per_cell)); }

UlamMatrix ulam_from_samples(const UlamSamples& s, double t, double W) {
  UlamMatrix u;
  u.m = s.grid.cells();
  u.t = t;
  u.samples_per_cell = s.samples_per_cell;
  u.escaped = s.escaped;
  u.entries = DenseMatrix(static_cast<std::size_t>(u.m));
  const std::size_t k = static_cast<std::size_t>(s.samples_per_cell);
  const double w = 1.0 / static_cast<double>(k);
  for (std::size_t c = 0; c < static_cast<std::size_t>(u.m); ++c) {
    for (std::size_t j = 0; j < k; ++j) {
      const double theta = s.source[c * k + j];
      const double phase = t * W / std::tan(theta);
      const cplx z = t == 0.0 ? cplx{w, 0.0} : w * cplx{std::cos(phase), std::sin(phase)};
      u.entries(c, static_cast<std::size_t>(s.destination[c * k + j])) += z;
    }
  }
  return u;
}

UlamMatrix build_ulam(const AngleMap& map, const NuSampler& nu, const UlamOptions& opt, double t) {
  return ulam_from_samples(sample_ulam(map, nu, opt), t, map.width());
}

namespace {

double norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

cplx vdot(const std::vector<cplx>& x, const std::vector<cplx>& y) {
  cplx s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

template <class Apply>
EigenResult power_iterate(std::size_t n, Apply apply, const EigenOptions& opt, const char* what) {
  std::vector<cplx> v(n, cplx{1.0 / std::sqrt(static_cast<double>(n)), 0.0});
  std::vector<cplx> w;
  cplx lambda{};
  EigenResult r;
  for (int it = 1; it <= opt.max_iter; ++it) {
    apply(v, w);
    const cplx next = vdot(v, w);  // v has unit norm
    const double nw = norm2(w);
    if (nw == 0.0) {
      r.lambda = 0.0;
      r.vector = v;
      r.iterations = it;
      return r;
    }
    std::vector<cplx> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = w[i] - next * v[i];
    r.residual = norm2(resid);
    // A stalled Rayleigh quotient alone is not enough: an iterate flipping
    // between two eigenvectors of equal modulus also keeps it constant.
    const bool done = it > 1 && std::abs(next - lambda) < opt.tol &&
                      r.residual <= opt.residual_tol * std::max(1.0, std::abs(next));
    lambda = next;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    if (done) {
      r.lambda = lambda;
      r.vector = v;
      r.iterations = it;
      return r;
    }
  }
  throw Error(ErrorCode::no_convergence, std::string(what) + ": no convergence after " + std::to_string(opt.max_iter) +
                                             " iterations, last lambda=(" + std::to_string(lambda.real()) + "," +
                                             std::to_string(lambda.imag()) + ") residual=" + std::to_string(r.residual));
}

}  // namespace

EigenResult leading_eigen(const DenseMatrix& A, const EigenOptions& opt) {
  return power_iterate(A.n, [&](const std::vector<cplx>& x, std::vector<cplx>& y) { A.apply(x, y); }, opt,
                       "leading_eigen");
}

EigenResult leading_left_eigen(const DenseMatrix& A, const EigenOptions& opt) {
  return power_iterate(A.n, [&](const std::vector<cplx>& x, std::vector<cplx>& y) { A.apply_transpose(x, y); }, opt,
                       "leading_left_eigen");
}

std::vector<double> stationary_vector(const DenseMatrix& A, const EigenOptions& opt) {
  const EigenResult l = leading_left_eigen(A, opt);
  std::vector<double> p(A.n);
  double s = 0.0;
  for (std::size_t i = 0; i < A.n; ++i) {
    p[i] = l.vector[i].real();
    s += p[i];
  }
  for (auto& x : p) x /= s;
  return p;
}

GapReport spectral_gap(const DenseMatrix& A, const EigenOptions& opt) {
  const EigenResult r = leading_eigen(A, opt);
  const EigenResult l = leading_left_eigen(A, opt);
  // Deflation B = A - lambda r l^T / (l^T r) removes the dominant pair.
  cplx lr{};
  for (std::size_t i = 0; i < A.n; ++i) lr += l.vector[i] * r.vector[i];
  if (std::abs(lr) < 1e-14) throw Error(ErrorCode::no_convergence, "spectral_gap: degenerate dominant pair");
  const cplx scale = r.lambda / lr;
  auto apply_b = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
    A.apply(x, y);
    cplx lx{};
    for (std::size_t i = 0; i < A.n; ++i) lx += l.vector[i] * x[i];
    for (std::size_t i = 0; i < A.n; ++i) y[i] -= scale * lx * r.vector[i];
  };

  // Deterministic start with components along many eigenvectors.
  std::vector<cplx> v(A.n);
  for (std::size_t i = 0; i < A.n; ++i) v[i] = cplx{std::cos(1.7 * static_cast<double>(i) + 0.3), 0.0};
  double nv = norm2(v);
  for (auto& z : v) z /= nv;

  GapReport g;
  g.lambda1 = r.lambda;
  std::vector<cplx> u1, u2;
  double prev = -1.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    apply_b(v, u1);
    apply_b(u1, u2);
    // Fit u2 = a u1 + b v by least squares. The larger root of z^2 - a z - b
    // is the dominant modulus of B; a complex-conjugate or +-r pair keeps the
    // iterate rotating in a plane, where a one-term Rayleigh quotient fails.
    const cplx g00 = vdot(u1, u1), g01 = vdot(u1, v), g11 = vdot(v, v);
    const cplx r0 = vdot(u1, u2), r1 = vdot(v, u2);
    const cplx det = g00 * g11 - g01 * std::conj(g01);
    double est = 0.0;
    if (std::abs(det) > 1e-12 * std::abs(g00) * std::abs(g11)) {
      const cplx a = (g11 * r0 - g01 * r1) / det;
      const cplx b = (g00 * r1 - std::conj(g01) * r0) / det;
      const cplx disc = std::sqrt(a * a + 4.0 * b);
      est = std::max(std::abs(0.5 * (a + disc)), std::abs(0.5 * (a - disc)));
    } else {
      // u1 parallel to v: a single dominant real or complex eigenvalue.
      est = std::abs(vdot(v, u1));
    }
    const double nw = norm2(u2);
    if (nw == 0.0) {
      g.lambda2_modulus = 0.0;
      g.gap = 1.0;
      g.iterations = it;
      return g;
    }
    for (std::size_t i = 0; i < A.n; ++i) v[i] = u2[i] / nw;
    if (prev >= 0.0 && std::abs(est - prev) < std::max(opt.tol, 1e-12)) {
      g.lambda2_modulus = est;
      g.gap = 1.0 - est;
      g.iterations = it;
      return g;
    }
    prev = est;
  }
  if (prev < 0.0) throw Error(ErrorCode::no_convergence, "spectral_gap: too few iterations");
  // The estimate kept moving; report the last one.
  g.lambda2_modulus = prev;
  g.gap = 1.0 - prev;
  g.iterations = opt.max_iter;
  return g;
}

SpectralReport lambda_curve(const UlamSamples& s, double W, const std::vector<double>& t_values, double fit_lo,
                            double fit_hi, const EigenOptions& opt) {
  SpectralReport rep;
  rep.fit_t_lo = fit_lo;
  rep.fit_t_hi = fit_hi;
  const UlamMatrix p0 = ulam_from_samples(s, 0.0, W);
  const GapReport g = spectral_gap(p0.entries, opt);
  rep.lambda0 = g.lambda1;
  rep.gap = g.gap;
  double sxy = 0.0;
  double sxx = 0.0;
  for (double t : t_values) {
    const cplx lam = t == 0.0 ? rep.lambda0 : leading_eigen(ulam_from_samples(s, t, W).entries, opt).lambda;
    rep.lambda_curve.push_back({t, lam});
    const double at = std::abs(t);
    if (at >= fit_lo && at <= fit_hi && at > 0.0 && at < 1.0) {
      const double x = t * t * std::log(1.0 / at);
      sxy += x * (1.0 - lam.real());
      sxx += x * x;
      ++rep.fit_points;
    }
  }
  rep.fitted_coefficient = sxx > 0.0 ? sxy / sxx : NAN;
  return rep;
}

void write_ulam_matrix(std::ostream& os, const UlamMatrix& u) {
  write_le_u64(os, static_cast<std::uint64_t>(u.m));
  write_le_f64(os, u.t);
  write_le_u64(os, static_cast<std::uint64_t>(u.samples_per_cell));
  for (const auto& z : u.entries.a) {
    write_le_f64(os, z.real());
    write_le_f64(os, z.imag());
  }
}

}  // namespace rtube
