#include <doctest.h>

#include <cmath>

#include "uniqset/bumps.hpp"
#include "uniqset/errors.hpp"

using namespace uniqset;

TEST_CASE("B-spline basics") {
  // M_2 is the hat on [0,2]
  CHECK(bspline(2, 1.0) == doctest::Approx(1.0));
  CHECK(bspline(2, 0.5) == doctest::Approx(0.5));
  // M_4(2) = 2/3, M_4(1) = 1/6
  CHECK(bspline(4, 2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(bspline(4, 1.0) == doctest::Approx(1.0 / 6.0));
  CHECK(bspline_cdf(4, 2.0) == doctest::Approx(0.5));
  CHECK(bspline_cdf(3, 0.0) == 0.0);
  CHECK(bspline_cdf(3, 3.0) == 1.0);
  // integral of M_l over [0,l] = 1
  for (int l = 2; l <= 12; ++l) {
    double s = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) s += bspline(l, (i + 0.5) * l / n) * l / n;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("phi_l_coeff") {
  for (int l = 2; l <= 9; ++l) CHECK(phi_l_coeff(l, 0) == 1.0);
  CHECK(std::fabs(phi_l_coeff(2, 2)) < 1e-30);
  CHECK(phi_l_coeff(2, 1) == doctest::Approx(4.0 / (kPi * kPi)).epsilon(1e-14));
  for (int l = 2; l <= 8; ++l)
    for (int n = 1; n < 200; ++n)
      CHECK(std::fabs(phi_l_coeff(l, n)) <= std::min(1.0, std::pow(l / kPi, l) * std::pow(n, -l)) * (1 + 1e-12));
}

TEST_CASE("phi_l_coeff oracle: 2-fold grid convolution of 2 1_{I(1/2)}") {
  const std::int64_t G = 1 << 16;
  VecR box(G);
  for (std::int64_t k = 0; k < G; ++k) {
    double u = double(k) / G;
    u = u > 0.5 ? u - 1 : u;
    box[k] = std::fabs(u) < 0.25 ? 2.0 : (std::fabs(u) == 0.25 ? 1.0 : 0.0);
  }
  // circular convolution on the grid = product of DFTs
  auto s = dft_sample(box, 4);
  CHECK(std::abs(s[1] * s[1] - phi_l_coeff(2, 1)) < 1e-6);
}

TEST_CASE("phi_delta_l examples") {
  BumpSpec b{BumpKind::PHI_DELTA_L, 4, 0.1, 1, 0.25};
  CHECK(bump_coeff(b, 0) == 1.0);
  CHECK(std::fabs(bump_coeff(b, 40)) < 1e-30);
  double v = bump_coeff(b, 100);
  CHECK(std::fabs(v) <= 2.6e-2);
  CHECK(v == doctest::Approx(std::pow(std::sin(kPi * 2.5) / (kPi * 2.5), 4)).epsilon(1e-14));
  // FFT oracle from exact samples
  const std::int64_t G = 1 << 16;
  auto s = dft_sample(bump_samples(b, G), 200);
  CHECK(std::abs(s[100] - v) < 1e-9);
  CHECK(std::abs(s[0] - 1.0) < 1e-12);
}

TEST_CASE("phi_N_delta_l") {
  BumpSpec b{BumpKind::PHI_N_DELTA_L, 4, 0.1, 5, 0.25};
  CHECK(bump_coeff(b, 7) == 0.0);
  BumpSpec one = b;
  one.N = 1;
  BumpSpec base{BumpKind::PHI_DELTA_L, 4, 0.1, 1, 0.25};
  for (int n = -50; n <= 50; ++n) CHECK(bump_coeff(one, n) == bump_coeff(base, n));
  const std::int64_t G = 1 << 18;
  auto s = dft_sample(bump_samples(b, G), 5 * 200);
  double err = 0, off = 0;
  for (int k = -200; k <= 200; ++k) err = std::max(err, std::abs(s[5 * k] - bump_coeff(base, k)));
  for (int n = -1000; n <= 1000; ++n)
    if (n % 5) off = std::max(off, std::abs(s[n]));
  CHECK(err < 1e-10);
  CHECK(off < 1e-10);
  // support: N components of length delta/N
  auto sup = bump_support(b);
  CHECK(sup.components().size() == 5);
  for (auto& a : sup.components()) CHECK(a.length == doctest::Approx(0.02));
}

TEST_CASE("psi_j") {
  auto p = psi_j(0.05, 0.1, 4, 20000);
  CHECK(p.seq[0].real() == doctest::Approx(0.055).epsilon(1e-15));
  CHECK(bump_value(p.spec, 0.0) == 1.0);
  CHECK(bump_value(p.spec, 0.5 * 1.2 * 0.05 + 1e-9) == 0.0);
  CHECK(bump_value(p.spec, 0.3) == 0.0);
  // plateau exactly on I(delta)
  for (int i = 0; i < 100; ++i) CHECK(bump_value(p.spec, -0.025 + 0.05 * i / 100.0) == 1.0);
  CHECK(bump_value(p.spec, 0.025) == 1.0);
  // A_{1.5} norm: interval vs direct summation to 1e6
  auto r = ap_norm(p.seq, 1.5);
  double brute = 0;
  for (std::int64_t n = -1000000; n <= 1000000; ++n) brute += std::pow(std::fabs(bump_coeff(p.spec, n)), 1.5);
  brute = std::pow(brute, 1 / 1.5);
  CHECK(brute >= r.lower - 1e-12);
  CHECK(brute <= r.upper + 1e-8);
  CHECK(r.upper - r.lower < 1e-8);
  // instance constant of the A_r estimate
  double C = r.upper / std::pow(0.05, 1 - 1 / 1.5);
  CHECK(C < 3.0);
  CHECK_THROWS_AS(psi_j(0.5, 0.5, 4), ParameterError);
}

TEST_CASE("psi_indicator") {
  auto s = psi_indicator(0.1, 2, 100);
  CHECK(s[0].real() == 1.0);
  CHECK(psi_indicator(0.1, 3, 10)[4] == 0.0);
  CHECK(s[10].real() == doctest::Approx(std::sin(0.5 * kPi) / (0.5 * kPi)).epsilon(1e-14));
  CHECK(s[10].real() == doctest::Approx(0.63662).epsilon(1e-5));
  // FFT oracle of the sampled scaled indicator (jump-limited)
  BumpSpec b{BumpKind::PSI_INDICATOR, 2, 0.1, 2, 0.25};
  auto d = dft_sample(bump_samples(b, 1 << 18), 20);
  CHECK(std::abs(d[10] - s[10]) < 1e-4);
}

TEST_CASE("f_M") {
  std::vector<std::int64_t> one{3};
  auto a = f_M(0.1, one, 60);
  auto b = psi_indicator(0.1, 3, 60);
  for (int n = -60; n <= 60; ++n) CHECK(std::abs(a[n] - b[n]) < 1e-15);
  std::vector<std::int64_t> Ns{1, 7, 50, 301};
  CHECK(f_M(0.05, Ns, 100)[0].real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(f_M(0.05, {3, 2}, 10), PreconditionError);
}

TEST_CASE("invariants: nonnegativity, mass, support, decay") {
  const std::int64_t G = 1 << 16;
  std::vector<BumpSpec> specs = {
      {BumpKind::PHI_L, 3, 1.0, 1, 0.25},         {BumpKind::PHI_DELTA_L, 5, 0.2, 1, 0.25},
      {BumpKind::PHI_N_DELTA_L, 4, 0.1, 7, 0.25}, {BumpKind::PSI_J, 4, 0.1, 1, 0.25},
      {BumpKind::PSI_J, 6, 0.05, 3, 0.1},         {BumpKind::PSI_INDICATOR, 2, 0.1, 4, 0.25}};
  for (auto& s : specs) {
    VecR f = bump_samples(s, G);
    CHECK(f.minCoeff() >= -1e-12);
    auto sup = bump_support(s);
    double outside = 0;
    for (std::int64_t k = 0; k < G; ++k) {
      double t = double(k) / G;
      if (!sup.contains(t) && sup.measure() < 1.0) {
        // closed support: skip boundary points
        bool edge = false;
        for (auto& a : sup.components())
          edge |= std::fabs(dist_to_int(t - a.center) - a.length / 2) < 1e-12;
        if (!edge) outside = std::max(outside, std::fabs(f[k]));
      }
    }
    CHECK(outside < 1e-12);
    if (s.kind == BumpKind::PSI_J) {
      CHECK(bump_coeff(s, 0) == (1 + s.eps0) * s.delta);
    } else {
      CHECK(bump_coeff(s, 0) == 1.0);
    }
    auto cert = bump_certificate(s);
    double lt = s.kind == BumpKind::PHI_L ? 2.0 * s.l : 2.0 * s.l / s.delta;
    for (std::int64_t n = 1; n < 5000; ++n) {
      double c = std::fabs(bump_coeff(s, n)), bnd = cert.bound(double(n));
      CHECK(c <= bnd * (1 + 1e-12));
      if (n > lt * s.N && c > 0) CHECK(c < bnd);
    }
  }
}

TEST_CASE("aliased comparison removes the sampling alias") {
  const std::int64_t G = 1 << 18;
  BumpSpec b{BumpKind::PHI_N_DELTA_L, 2, 0.01, 17, 0.25};
  auto s = dft_sample(bump_samples(b, G), 2048);
  double raw = 0, fixed = 0;
  for (std::int64_t n = -2048; n <= 2048; n += 7) {
    raw = std::max(raw, std::abs(s[n] - bump_coeff(b, n)));
    auto a = aliased_coeff(b, n, G);
    fixed = std::max(fixed, std::abs(s[n] - a.value) - a.remainder);
  }
  CHECK(raw > 1e-6);  // plain comparison is alias-limited for l=2
  CHECK(fixed < 1e-8);
}
