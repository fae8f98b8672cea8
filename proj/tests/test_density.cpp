#include <doctest.h>

#include <cmath>
#include <random>

#include "uniqset/bumps.hpp"
#include "uniqset/density.hpp"
#include "uniqset/errors.hpp"

using namespace uniqset;

namespace {
DensitySpec geo_spec(int n, double r = 1.5) {
  DensitySpec s;
  s.delta = density_schedule("geo:0.4", n);
  s.r_list = {r};
  return s;
}

SpectralSequence random_poly(std::mt19937_64& rng, int K) {
  std::uniform_real_distribution<double> U(-1, 1);
  SpectralSequence s(K, true);
  for (int n = 0; n <= K; ++n) {
    double v = U(rng);
    s.at(n) = v;
    s.at(-n) = v;
  }
  s.real_function = true;
  return s;
}
}  // namespace

TEST_CASE("empty schedule is the constant 1") {
  DensitySpec s;
  auto run = build_density(s, 0);
  CHECK(run.h.steps() == 0);
  CHECK(run.h.coeff(0) == 1.0);
  CHECK(run.h.coeff(5) == 0.0);
  CHECK(run.h.value(0.3) == 1.0);
  CHECK(run.h.norm(1.5).upper == 1.0);
}

TEST_CASE("one step: h_1 = 1 - psi_1") {
  auto run = build_density(geo_spec(1), 1);
  const auto& f = run.h.factors()[0];
  CHECK(f.N == 1);
  CHECK(f.tau <= 1e-13);
  auto nr = run.h.norm(1.5);
  auto psi = bump_spectrum(BumpSpec{BumpKind::PSI_J, 16, 0.2, 1, 0.25}, 4000);
  CHECK(nr.upper <= 1.0 + ap_norm(psi, 1.5).upper);
  for (int n : {0, 1, 7, 100}) CHECK(run.h.coeff(n) == doctest::Approx((n == 0 ? 1.0 : 0.0) - psi[n].real()).epsilon(1e-15));
  VecR v = run.h.samples(1 << 12);
  CHECK(v.minCoeff() >= 0.0);
  CHECK(v.maxCoeff() <= 1.0);
  CHECK(run.ok());
}

TEST_CASE("stored tensor vs grid DFT for a small two-step density") {
  DensitySpec s;
  s.delta = {0.2, 0.1};
  s.l = 8;
  s.tau = 1e-6;  // keeps the windows small enough to alias-check on a 2^20 grid
  auto run = build_density(s, 2);
  REQUIRE(run.h.steps() == 2);
  const auto& F = run.h.factors();
  CHECK(F[1].N >= 2 * F[0].N * F[0].K + 1);
  const std::int64_t G = 1 << 20;
  CHECK(run.h.extent(2) < G / 2);
  auto seq = dft_sample(run.h.samples(G), 2000);
  double maxerr = 0;
  for (std::int64_t n = -2000; n <= 2000; ++n) maxerr = std::max(maxerr, std::abs(seq[n] - run.h.coeff(n)));
  // aliasing of the true tails past G/2 is tiny; rho covers the truncation
  CHECK(maxerr <= run.h.rho() + 1e-9);
  // tail recursion vs direct sum of the stored tensor
  for (std::int64_t X : {1, 50, 500, 1500, 3000}) {
    double direct = 0;
    for (std::int64_t n = X; n <= (std::int64_t)run.h.extent(2); ++n) direct += 2 * std::fabs(run.h.coeff(n));
    CHECK(run.h.tail_beyond(X) == doctest::Approx(direct + run.h.rho()).epsilon(1e-10));
  }
  // value() at a dyadic point agrees with samples()
  CHECK(run.h.value(12345.0 / G) == doctest::Approx(run.h.samples(G)[12345]).epsilon(1e-14));
}

TEST_CASE("geometric schedule, r = 1.5, six steps") {
  auto spec = geo_spec(6);
  auto run = build_density(spec, 6);
  REQUIRE(run.ledgers.size() == 1);
  auto& L = run.ledgers[0];
  CHECK(L.ok());
  for (auto& r : L.rows) {
    CHECK(r.norm_upper <= r.cap);
    CHECK(r.ao == AOStatus::CERTIFIED);
    CHECK(r.gamma <= spec.delta[r.j - 1]);
    CHECK(r.h0_lower >= r.h0_floor - 1e-9);
  }
  for (std::size_t i = 1; i < L.rows.size(); ++i) CHECK(L.rows[i].h0_upper <= L.rows[i - 1].h0_upper);
  const std::int64_t G = 1 << 18;
  VecR v = run.h.samples(G);
  CHECK(v.minCoeff() >= -1e-12);
  CHECK(v.maxCoeff() <= 1 + 1e-12);
  auto E = run.h.support_set();
  int outside = 0;
  for (std::int64_t k = 0; k < G; ++k)
    if (!E.contains_grid(k, G)) {
      ++outside;
      CHECK(std::fabs(v[k]) < 1e-12);
    }
  CHECK(outside > 1000);
  double sd = 0, sdr = 0;
  for (double d : spec.delta) {
    sd += d;
    sdr += std::sqrt(d);
  }
  CHECK(L.rows.back().norm_upper <= std::exp(sd) * std::exp(L.c * sdr));
}

TEST_CASE("intersection density with the default gauge") {
  DensitySpec s;
  s.delta = density_schedule("exp", 5);
  s.r_list = {1.1, 1.5, 1.9};
  RefinementGauge g;
  CHECK(g.check_monotone());
  auto run = build_intersection_density(s, g, 5);
  CHECK(run.ledgers.size() == 3);
  for (auto& L : run.ledgers) CHECK(L.ok());
  double expect = 0;
  for (int j = 1; j <= 5; ++j) expect += std::exp(-double(j) * j);
  CHECK(run.gauge_sum == doctest::Approx(expect));
  CHECK(run.h.h0().lo > 0);
}

TEST_CASE("almost orthogonality on random polynomials") {
  std::mt19937_64 rng(3);
  auto psi = random_poly(rng, 50), phi = random_poly(rng, 50);
  auto res = check_almost_orthogonality(psi, phi, 200, 0.0, 1.5);
  CHECK(res.hypothesis_ok);
  CHECK(res.status == AOStatus::CERTIFIED);
  CHECK(res.ratio == doctest::Approx(1.0).epsilon(1e-10));
  // phi = 1
  auto one = constant_sequence(1.0);
  auto r1 = check_almost_orthogonality(psi, one, 3, 0.0, 1.5);
  CHECK(r1.holds());
  CHECK(r1.ratio == doctest::Approx(1.0).epsilon(1e-12));
  // N too small: overlapping frequencies, hypothesis needs gamma > 0
  auto r2 = check_almost_orthogonality(psi, phi, 20, 0.0, 1.5);
  CHECK(r2.status == AOStatus::INCONCLUSIVE);
}

TEST_CASE("select_next_N") {
  CHECK(select_next_N(constant_sequence(1.0), 0.1, 17, 1.5) == 17);
  BumpSpec b{BumpKind::PSI_J, 8, 0.2, 1, 0.25};
  SpectralSequence h1 = bump_spectrum(b, 3000);
  for (std::int64_t n = -h1.K; n <= h1.K; ++n) h1.at(n) = -h1[n];
  h1.at(0) += 1.0;
  std::int64_t N1 = select_next_N(h1, 0.1, 1, 1.5);
  std::int64_t N2 = select_next_N(h1, 0.01, 1, 1.5);
  CHECK(N2 >= N1);
  double target = 0.1 * ap_norm(h1, 1.5).lower;
  CHECK(tail_mass(h1, N1) <= target);
  CHECK(tail_mass(h1, N1 - 1) > target);
}

TEST_CASE("gauge checks and schedule parsing") {
  RefinementGauge g;
  for (double r : {1.1, 1.5, 1.9}) CHECK(g.check_ratio(r, std::exp(-1.0)));
  RefinementGauge bad;
  bad.g = [](double t) { return std::sqrt(t); };
  CHECK_FALSE(bad.check_ratio(1.9, 0.3));
  auto d = density_schedule("0.1,0.05", 2);
  CHECK(d[1] == 0.05);
  CHECK_THROWS_AS(density_schedule("0.1", 2), ParameterError);
  DensitySpec s;
  s.delta = {0.7};
  CHECK_THROWS_AS(build_density(s, 1), ParameterError);
}
