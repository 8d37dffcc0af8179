// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
//
// Ulam discretization of the averaged (and Fourier-twisted) angle operator,
// and the power-iteration eigen tools used on it.
#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rtube/dynamics.hpp"
#include "rtube/measures.hpp"

namespace rtube {

using cplx = std::complex<double>;

struct DenseMatrix {
  std::size_t n = 0;
  std::vector<cplx> a;  // row-major

  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t size) : n(size), a(size * size) {}
  static DenseMatrix from_real(std::size_t size, const std::vector<double>& rows);

  cplx& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  cplx operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  // y = A x and y = A^T x (plain transpose).
  void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const;
  void apply_transpose(const std::vector<cplx>& x, std::vector<cplx>& y) const;
};

// Equal-mu-mass partition of (eps_cut, pi - eps_cut).
class UlamGrid {
 public:
  UlamGrid(int m, double eps_cut);
  int cells() const { return m_; }
  double eps_cut() const { return eps_; }
  double lower_edge(int c) const;
  // Cell index of theta, or -1 / m when theta lies in the excluded ends.
  int locate(double theta) const;
  // Point of cell c at relative mu-mass u in [0,1).
  double sample(int c, double u) const;

 private:
  int m_;
  double eps_;
  double f_lo_;
  double df_;
};

// Source angles and destination cells shared by all twists.
struct UlamSamples {
  UlamGrid grid{16, 1e-4};
  int samples_per_cell = 0;
  std::vector<double> source;   // [cell][sample]
  std::vector<int> destination;  // same layout, always in [0, m)
  std::uint64_t escaped = 0;     // destinations reassigned to a boundary cell
  std::uint64_t rejections = 0;  // R redraws after landing in the sin_floor band
};

struct UlamOptions {
  int m = 256;
  int samples_per_cell = 10000;
  double eps_cut = 1e-4;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

// Cell c draws from CounterRng::stream(seed, c).
UlamSamples sample_ulam(const AngleMap& map, const NuSampler& nu, const UlamOptions& opt);

struct UlamMatrix {
  int m = 0;
  double t = 0.0;
  int samples_per_cell = 0;
  std::uint64_t escaped = 0;
  DenseMatrix entries;

  // 3 / sqrt(samples_per_cell)
  double mc_tolerance() const;
};

// Entry (c, c') = mean over samples from c of exp(i t X(theta)) 1{theta' in c'}.
UlamMatrix ulam_from_samples(const UlamSamples& s, double t, double W);
UlamMatrix build_ulam(const AngleMap& map, const NuSampler& nu, const UlamOptions& opt, double t);

struct EigenResult {
  cplx lambda;
  std::vector<cplx> vector;
  int iterations = 0;
  double residual = 0.0;
};

struct EigenOptions {
  double tol = 1e-10;
  double residual_tol = 1e-6;  // on |A v - lambda v| for unit v
  int max_iter = 10000;
};

// Dominant eigenpair by power iteration from the all-ones vector, with the
// Rayleigh quotient as the eigenvalue estimate. Throws NoConvergence.
EigenResult leading_eigen(const DenseMatrix& A, const EigenOptions& opt = {});
// Dominant left eigenvector (A^T v = lambda v).
EigenResult leading_left_eigen(const DenseMatrix& A, const EigenOptions& opt = {});

// Stationary distribution of an untwisted Ulam matrix, normalized to sum 1.
std::vector<double> stationary_vector(const DenseMatrix& A, const EigenOptions& opt = {});

struct GapReport {
  cplx lambda1;
  double lambda2_modulus = 0.0;
  double gap = 0.0;  // 1 - |lambda2|
  int iterations = 0;
};

// Second eigenvalue modulus from power iteration on A deflated by its
// dominant pair. Each step fits a two-term recurrence to the iterates, so a
// complex-conjugate pair or a +-r pair is resolved.
GapReport spectral_gap(const DenseMatrix& A, const EigenOptions& opt = {});

struct LambdaPoint {
  double t = 0.0;
  cplx lambda;
};

struct SpectralReport {
  cplx lambda0;
  double gap = 0.0;
  std::vector<LambdaPoint> lambda_curve;
  double fitted_coefficient = 0.0;
  double fit_t_lo = 0.0;
  double fit_t_hi = 0.0;
  int fit_points = 0;
};

// lambda_t for each t (samples reused), and the least-squares slope through
// the origin of Re(1 - lambda_t) against t^2 ln(1/t) over [fit_lo, fit_hi].
SpectralReport lambda_curve(const UlamSamples& s, double W, const std::vector<double>& t_values, double fit_lo,
                            double fit_hi, const EigenOptions& opt = {});

// Header (uint64 m, float64 t, uint64 samples_per_cell), then row-major
// (re, im) float64 pairs, all little-endian.
void write_ulam_matrix(std::ostream& os, const UlamMatrix& u);

}  // namespace rtube
