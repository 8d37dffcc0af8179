// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "rtube/transfer.hpp"

using namespace rtube;

namespace {

const AngleMap& map10() {
  static const AngleMap m(build_preset("two-cheeks-one-bottom"), 10.0);
  return m;
}

// Regression value of the default preset's gap at W = 10, m = 256 and 10^4
// samples per cell; three seeds agree to 3e-4.
constexpr double kPinnedGap = 0.7755;

const UlamSamples& samples256() {
  static const UlamSamples s = [] {
    UlamOptions o;
    o.m = 256;
    o.samples_per_cell = 10000;
    o.seed = 1;
    return sample_ulam(map10(), NuSampler{NuSpec{}}, o);
  }();
  return s;
}

double second_modulus_eigen(const DenseMatrix& A) {
  Eigen::MatrixXcd M(A.n, A.n);
  for (std::size_t i = 0; i < A.n; ++i)
    for (std::size_t j = 0; j < A.n; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A(i, j);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
  std::vector<double> mods;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mods.rbegin(), mods.rend());
  return mods.at(1);
}

}  // namespace

TEST_CASE("Ulam cells carry equal mu-mass") {
  const UlamGrid g(64, 1e-4);
  const double total = mu_cdf(kPi - 1e-4) - mu_cdf(1e-4);
  for (int c = 0; c < 64; ++c) {
    const double hi = c + 1 < 64 ? g.lower_edge(c + 1) : kPi - 1e-4;
    CHECK(mu_cdf(hi) - mu_cdf(g.lower_edge(c)) == doctest::Approx(total / 64).epsilon(1e-9));
    for (double u : {1e-6, 0.3, 0.999}) CHECK(g.locate(g.sample(c, u)) == c);
  }
  CHECK(g.lower_edge(0) == doctest::Approx(1e-4));
  CHECK(g.locate(5e-5) == -1);
  CHECK(g.locate(kPi - 5e-5) == 64);
  // Mirror symmetry of the partition.
  CHECK(g.lower_edge(32) == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("power iteration on small matrices") {
  SUBCASE("identity") {
    const DenseMatrix I = DenseMatrix::from_real(3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const EigenResult r = leading_eigen(I);
    CHECK(std::abs(r.lambda - cplx{1.0, 0.0}) < 1e-12);
  }
  SUBCASE("two-state chain") {
    const DenseMatrix A = DenseMatrix::from_real(2, {0.9, 0.1, 0.2, 0.8});
    CHECK(std::abs(leading_eigen(A).lambda - cplx{1.0, 0.0}) < 1e-10);
    const GapReport g = spectral_gap(A);
    CHECK(g.lambda2_modulus == doctest::Approx(0.7).epsilon(1e-8));
    CHECK(g.gap == doctest::Approx(0.3).epsilon(1e-7));
    const std::vector<double> p = stationary_vector(A);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("a periodic chain has no gap") {
    const DenseMatrix P = DenseMatrix::from_real(2, {0, 1, 1, 0});
    const GapReport g = spectral_gap(P);
    CHECK(std::abs(g.gap) < 1e-8);
    const DenseMatrix C = DenseMatrix::from_real(3, {0, 1, 0, 0, 0, 1, 1, 0, 0});
    CHECK(std::abs(spectral_gap(C).gap) < 1e-8);
  }
  SUBCASE("equal-modulus dominant pair does not converge") {
    const DenseMatrix D = DenseMatrix::from_real(3, {1, 0, 0, 0, -1, 0, 0, 0, 0.5});
    try {
      leading_eigen(D);
      FAIL("expected NoConvergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::no_convergence);
      CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
  }
}

TEST_CASE("deflated power iteration agrees with a dense eigensolver") {
  CounterRng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 40;
    std::vector<double> rows(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        // Sparse-ish random stochastic rows.
        rows[i * n + j] = rng.uniform() < 0.2 ? rng.uniform() : 0.0;
        s += rows[i * n + j];
      }
      if (s == 0.0) rows[i * n + i] = s = 1.0;
      for (std::size_t j = 0; j < n; ++j) rows[i * n + j] /= s;
    }
    const DenseMatrix A = DenseMatrix::from_real(n, rows);
    const GapReport g = spectral_gap(A);
    CHECK(g.lambda2_modulus == doctest::Approx(second_modulus_eigen(A)).epsilon(1e-6));
  }
  UlamOptions o;
  o.m = 64;
  o.samples_per_cell = 2000;
  o.seed = 4;
  const UlamMatrix u = build_ulam(map10(), NuSampler{NuSpec{}}, o, 0.0);
  CHECK(spectral_gap(u.entries).lambda2_modulus == doctest::Approx(second_modulus_eigen(u.entries)).epsilon(1e-6));
}

TEST_CASE("untwisted Ulam matrix of the default preset") {
  const UlamMatrix u = ulam_from_samples(samples256(), 0.0, 10.0);
  REQUIRE(u.m == 256);
  const double tol = u.mc_tolerance();
  CHECK(tol == doctest::Approx(0.03));
  for (std::size_t i = 0; i < 256; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 256; ++j) {
      CHECK(u.entries(i, j).imag() == 0.0);
      CHECK(u.entries(i, j).real() >= 0.0);
      row += u.entries(i, j).real();
    }
    CHECK(std::abs(row - 1.0) <= tol);
  }
  const GapReport g = spectral_gap(u.entries);
  CHECK(std::abs(g.lambda1 - cplx{1.0, 0.0}) <= 3.0 * tol);
  CHECK(std::abs(g.lambda1.imag()) < 1e-12);
  CHECK(g.gap > 0.1);
  CHECK(std::abs(g.gap - kPinnedGap) <= 0.005);

  // The stationary vector is the discretized mu: uniform over the cells.
  const std::vector<double> p = stationary_vector(u.entries);
  double tv = 0.0;
  for (double x : p) tv += std::abs(x - 1.0 / 256);
  CHECK(0.5 * tv < 0.02);
}

TEST_CASE("gap is stable under refinement") {
  UlamOptions o;
  o.m = 16;
  o.samples_per_cell = 10000;
  o.seed = 1;
  const double coarse = spectral_gap(build_ulam(map10(), NuSampler{NuSpec{}}, o, 0.0).entries).gap;
  const double fine = spectral_gap(ulam_from_samples(samples256(), 0.0, 10.0).entries).gap;
  CHECK(coarse > 0.0);
  CHECK(fine > 0.0);
  CHECK(std::abs(coarse - fine) <= 0.5 * fine);
  o.m = 128;
  const double half = spectral_gap(build_ulam(map10(), NuSampler{NuSpec{}}, o, 0.0).entries).gap;
  CHECK(std::abs(half - fine) < fine);
}

TEST_CASE("mirror-symmetric preset gives a reversal-invariant matrix") {
  const UlamMatrix u = ulam_from_samples(samples256(), 0.0, 10.0);
  const double tol = u.mc_tolerance();
  for (std::size_t i = 0; i < 256; ++i) {
    for (std::size_t j = 0; j < 256; ++j) {
      CHECK(std::abs(u.entries(i, j) - u.entries(255 - i, 255 - j)) <= tol);
    }
  }
}

TEST_CASE("twisted eigenvalues") {
  std::vector<double> ts{0.0};
  for (int i = 0; i <= 10; ++i) ts.push_back(0.01 * std::pow(10.0, i / 10.0));
  const SpectralReport r = lambda_curve(samples256(), 10.0, ts, 0.01, 0.1);
  REQUIRE(r.lambda_curve.size() == ts.size());
  const double tol = 3.0 / std::sqrt(10000.0);
  CHECK(std::abs(1.0 - r.lambda_curve[0].lambda.real()) <= tol);
  double prev = -1.0;
  for (const auto& pt : r.lambda_curve) {
    CHECK(std::abs(pt.lambda) <= 1.0 + 3.0 * tol);
    const double d = 1.0 - pt.lambda.real();
    CHECK(d >= -tol);
    CHECK(d >= prev - tol);
    prev = d;
  }
  CHECK(r.fit_points == 11);
  CHECK(r.fitted_coefficient > 0.0);
}

TEST_CASE("twisted eigenvalues follow the characteristic function of X at small t") {
  // Under mu, X = W / tan(theta) has density W^2 / (2 (W^2 + x^2)^(3/2)), and
  // 1 - E cos(tX) = 1 - Wt K1(Wt). The leading eigenvalue differs from it by
  // O(t^2) without the logarithm, so the two least-squares fits are close.
  const double W = 10.0;
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(0.01 * std::pow(10.0, i / 10.0));
  double sxy = 0.0, sxx = 0.0;
  for (double t : ts) {
    const double x = t * t * std::log(1.0 / t);
    const double y = 1.0 - W * t * std::cyl_bessel_k(1.0, W * t);
    sxy += x * y;
    sxx += x * x;
  }
  const double oracle = sxy / sxx;
  CHECK(oracle == doctest::Approx(18.9633).epsilon(1e-4));
  const SpectralReport r = lambda_curve(samples256(), W, ts, 0.01, 0.1);
  CHECK(std::abs(r.fitted_coefficient - oracle) <= 0.05 * oracle);
}

TEST_CASE("matrix dump layout") {
  UlamOptions o;
  o.m = 16;
  o.samples_per_cell = 1000;
  o.seed = 2;
  const UlamMatrix u = build_ulam(map10(), NuSampler{NuSpec{}}, o, 0.05);
  std::ostringstream os;
  write_ulam_matrix(os, u);
  const std::string b = os.str();
  REQUIRE(b.size() == 24 + 16 * 16 * 16);
  std::uint64_t m = 0, spc = 0;
  double t = 0.0, re = 0.0, im = 0.0;
  std::memcpy(&m, b.data(), 8);
  std::memcpy(&t, b.data() + 8, 8);
  std::memcpy(&spc, b.data() + 16, 8);
  CHECK(m == 16);
  CHECK(t == 0.05);
  CHECK(spc == 1000);
  // Entry (3, 5).
  std::memcpy(&re, b.data() + 24 + (3 * 16 + 5) * 16, 8);
  std::memcpy(&im, b.data() + 24 + (3 * 16 + 5) * 16 + 8, 8);
  CHECK(re == u.entries(3, 5).real());
  CHECK(im == u.entries(3, 5).imag());
}

TEST_CASE("Ulam assembly is deterministic and rejects tiny grids") {
  UlamOptions o;
  o.m = 32;
  o.samples_per_cell = 1000;
  o.seed = 9;
  o.workers = 1;
  const UlamSamples a = sample_ulam(map10(), NuSampler{NuSpec{}}, o);
  o.workers = 4;
  const UlamSamples b = sample_ulam(map10(), NuSampler{NuSpec{}}, o);
  CHECK(a.destination == b.destination);
  CHECK(std::memcmp(a.source.data(), b.source.data(), a.source.size() * sizeof(double)) == 0);
  o.m = 8;
  CHECK_THROWS_AS(sample_ulam(map10(), NuSampler{NuSpec{}}, o), Error);
}
