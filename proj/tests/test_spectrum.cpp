#include <doctest.h>

#include <cmath>
#include <random>

#include "uniqset/bumps.hpp"
#include "uniqset/errors.hpp"
#include "uniqset/spectrum.hpp"

using namespace uniqset;

namespace {
SpectralSequence indicator_seq(double d, std::int64_t K) {
  SpectralSequence s(K);
  for (std::int64_t n = -K; n <= K; ++n) s.at(n) = n == 0 ? d : std::sin(kPi * d * n) / (kPi * n);
  s.tail = DecayCertificate{1.0 / kPi, 1.0};
  s.real_function = true;
  return s;
}
}  // namespace

TEST_CASE("dft_sample: constant and pure character") {
  VecR one = VecR::Ones(64);
  auto s = dft_sample(one);
  CHECK(std::abs(s[0] - 1.0) < 1e-14);
  for (std::int64_t n = 1; n <= s.K; ++n) CHECK(std::abs(s[n]) < 1e-14);
  VecC e(64);
  for (int k = 0; k < 64; ++k) e[k] = std::polar(1.0, 2 * kPi * 3 * k / 64.0);
  auto t = dft_sample(e);
  for (std::int64_t n = -t.K; n <= t.K; ++n) CHECK(std::abs(t[n] - (n == 3 ? 1.0 : 0.0)) < 1e-13);
  CHECK_THROWS_AS(dft_sample(VecR(VecR::Ones(100))), ParameterError);
  CHECK_THROWS_AS(dft_sample(VecR(VecR::Ones(64)), 40), ParameterError);
}

TEST_CASE("dft_sample: indicator of I(0.5) against closed form") {
  const std::int64_t G = 1 << 16;
  const double d = 0.5;
  VecR f(G);
  for (std::int64_t k = 0; k < G; ++k) {
    double t = double(k) / G;
    double u = t > 0.5 ? t - 1 : t;
    f[k] = std::fabs(u) < d / 2 ? 1.0 : (std::fabs(u) == d / 2 ? 0.5 : 0.0);
  }
  auto s = dft_sample(f, 100);
  double err = 0;
  for (std::int64_t n = -100; n <= 100; ++n) err = std::max(err, std::abs(s[n] - d * sinc_pi(d * n)));
  CHECK(err < 1e-3);
}

TEST_CASE("ap_norm: trivial examples") {
  auto one = constant_sequence(1.0);
  auto r = ap_norm(one, 2.0);
  CHECK(r.lower == 1.0);
  CHECK(r.upper == 1.0);
  SpectralSequence s(1, true);
  s.at(-1) = s.at(0) = s.at(1) = 1.0;
  CHECK(ap_norm(s, 1.0).lower == doctest::Approx(3.0));
  SpectralSequence u(3);
  CHECK_FALSE(ap_norm(u, 2.0).certified);
}

TEST_CASE("ap_norm: divergent tail") {
  auto s = indicator_seq(0.1, 100);
  CHECK_THROWS_AS(ap_norm(s, 1.0), DivergentTailError);
  CHECK_NOTHROW(ap_norm(s, 1.5));
}

TEST_CASE("ap_norm: phi_{0.1,4} at K=1000 brackets brute force at K=1e5") {
  BumpSpec b{BumpKind::PHI_DELTA_L, 4, 0.1, 1, 0.25};
  auto s = bump_spectrum(b, 1000);
  auto r = ap_norm(s, 1.0);
  double brute = 0;
  for (std::int64_t n = -100000; n <= 100000; ++n) brute += std::fabs(bump_coeff(b, n));
  CHECK(brute >= r.lower);
  CHECK(brute <= r.upper);
  // the true tail past K=1000 is ~6.5e-6, so no certified width can be below 1e-6 here
  CHECK(r.upper - r.lower < 2e-5);
  CHECK(brute - r.lower > 1e-6);
  auto r5 = ap_norm(bump_spectrum(b, 5000), 1.0);
  CHECK(r5.upper - r5.lower < 1e-6);
}

TEST_CASE("ap_norm monotone in K") {
  BumpSpec b{BumpKind::PHI_DELTA_L, 3, 0.05, 1, 0.25};
  double lo = 0, hi = 1e300;
  for (std::int64_t K : {50, 100, 200, 400, 800, 1600, 3200}) {
    auto r = ap_norm(bump_spectrum(b, K), 1.5);
    CHECK(r.lower >= lo - 1e-15);
    CHECK(r.upper <= hi + 1e-15);
    CHECK(r.lower <= r.upper);
    lo = r.lower;
    hi = r.upper;
  }
}

TEST_CASE("pairing") {
  auto one = constant_sequence(1.0);
  CHECK(std::abs(pairing(one, one).value - 1.0) < 1e-15);
  CHECK(pairing(one, one).error == 0.0);
  CHECK(std::abs(pairing(character(3), character(5)).value) == 0.0);
  // Parseval for the indicator: <1_I, 1_I> = delta
  const double d = 0.3;
  auto s = indicator_seq(d, 1000000);
  auto p = pairing(s, s);
  CHECK(p.error < 1e-6);
  CHECK(std::fabs(p.value.real() - d) <= p.error + 1e-12);
  // grid integration oracle
  const int G = 1 << 20;
  double grid = 0;
  for (int k = 0; k < G; ++k) {
    double t = (k + 0.5) / G;
    grid += dist_to_int(t) < d / 2 ? 1.0 / G : 0.0;
  }
  CHECK(std::fabs(p.value.real() - grid) < 1e-5);
}

TEST_CASE("Parseval against the grid L2 norm") {
  BumpSpec b{BumpKind::PHI_DELTA_L, 6, 0.3, 1, 0.25};
  const std::int64_t G = 1 << 14;
  VecR f = bump_samples(b, G);
  auto s = dft_sample(f, G / 2 - 1);
  double l2 = std::sqrt(f.squaredNorm() / G);
  CHECK(ap_norm(s, 2.0).lower == doctest::Approx(l2).epsilon(1e-12));
}

TEST_CASE("convolution theorem on smooth pairs") {
  // phi_{d,l} * phi_{d,l} = phi_{2d,2l}
  const std::int64_t G = 1 << 14;
  BumpSpec a{BumpKind::PHI_DELTA_L, 6, 0.2, 1, 0.25};
  BumpSpec c{BumpKind::PHI_DELTA_L, 12, 0.4, 1, 0.25};
  auto sa = dft_sample(bump_samples(a, G));
  auto sc = dft_sample(bump_samples(c, G));
  double err = 0;
  for (std::int64_t n = -sa.K; n <= sa.K; ++n) err = std::max(err, std::abs(sa[n] * sa[n] - sc[n]));
  CHECK(err < 1e-10);
}

TEST_CASE("Hoelder block inequality on random sequences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> Z;
  for (int trial = 0; trial < 200; ++trial) {
    int B = 1 + trial % 37;
    double q = 1.0 + (trial % 9 + 1) / 10.0;
    double s1 = 0, sq = 0;
    for (int i = 0; i < B; ++i) {
      double v = std::fabs(Z(rng)) * std::exp(Z(rng));
      s1 += v;
      sq += std::pow(v, q);
    }
    CHECK(sq >= std::pow(s1, q) / std::pow(B, q - 1) * (1 - 1e-12));
  }
}

TEST_CASE("cauchy_transform_trace") {
  auto t = cauchy_transform_trace(constant_sequence(1.0), 0.7, 32);
  for (int k = 0; k < 32; ++k) CHECK(std::abs(t.values[k] - 1.0) < 1e-15);
  auto u = cauchy_transform_trace(character(1), 0.5, 64);
  for (int k = 0; k < 64; ++k) CHECK(std::abs(u.values[k] - 0.5 * std::polar(1.0, 2 * kPi * k / 64.0)) < 1e-15);
  CHECK_THROWS_AS(cauchy_transform_trace(character(1), 1.0, 8), ParameterError);
}

TEST_CASE("fejer mean") {
  auto s = indicator_seq(0.2, 50);
  auto f = fejer_mean(s, 10);
  CHECK(f.K == 10);
  CHECK(f.exact());
  CHECK(std::abs(f[0] - 0.2) < 1e-15);
  CHECK(std::abs(f[10] - s[10] / 11.0) < 1e-15);
}
