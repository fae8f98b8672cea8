#include <doctest.h>

#include <cmath>

#include "uniqset/builder.hpp"
#include "uniqset/bumps.hpp"
#include "uniqset/capacity.hpp"
#include "uniqset/errors.hpp"

using namespace uniqset;

namespace {
double brute_nonzero_pow(const DilatedIndicatorSum& f, double p, std::int64_t K) {
  double s = 0;
  for (std::int64_t n = 1; n <= K; ++n) s += 2 * std::pow(std::fabs(f.coeff(n)), p);
  return s;
}
}  // namespace

TEST_CASE("nonzero norm brackets a brute-force sum, overlaps included") {
  DilatedIndicatorSum f;
  f.terms = {{0.5, 2, 0.1}, {0.3, 3, 0.15}, {0.2, 6, 0.05, 0.1, 4}};
  auto r = nonzero_ap_norm(f, 4, 1e-14);
  double b = std::pow(brute_nonzero_pow(f, 4, 2'000'000), 0.25);
  CHECK(r.lower <= b * (1 + 1e-9));
  CHECK(b <= r.upper);
  CHECK(r.upper - r.lower < 1e-6);
  // spectrum agrees with coeff and carries a valid tail
  auto s = f.spectrum(500);
  CHECK(s[6].real() == doctest::Approx(f.coeff(6)));
  CHECK(std::fabs(f.coeff(100001)) <= s.tail->bound(100001));
}

TEST_CASE("smoothed profile matches its values") {
  DilatedTerm t{1.0, 3, 0.2, 0.1, 4};
  DilatedIndicatorSum f{{t}};
  // mean of g(3t) over the circle is the zeroth coefficient
  const int G = 1 << 14;
  double mean = 0;
  for (int k = 0; k < G; ++k) mean += f.value(double(k) / G);
  CHECK(mean / G == doctest::Approx(1.0).epsilon(1e-9));
  // first harmonic via quadrature
  double c3 = 0;
  for (int k = 0; k < G; ++k) c3 += f.value(double(k) / G) * std::cos(2 * M_PI * 3 * k / double(G));
  CHECK(c3 / G == doctest::Approx(f.coeff(3)).epsilon(1e-9));
  // vanishes off U_{3, 0.2}
  CHECK(f.value(1.0 / 6.0) == 0.0);
}

TEST_CASE("indicator norm estimate") {
  for (double p : {3.0, 4.0, 6.0}) {
    double C = indicator_norm_constant(p);
    for (double d : {0.3, 0.1, 0.03, 0.01}) {
      auto r = indicator_norm(d, p);
      CHECK(r.upper <= C * std::pow(d, 1 - 1 / p));
      CHECK(r.lower > 0.3 * std::pow(d, 1 - 1 / p));
    }
  }
}

TEST_CASE("kat scheme p=4 eps=0.5") {
  auto k = kat_scheme(0.5, 4);
  CHECK(k.ok);
  CHECK(k.norm.upper <= 0.5);
  CHECK(k.measure_lower >= 0.5);
  CHECK(k.E.measure() >= 0.5);
  CHECK(int(k.Ns.size()) == k.M);
  for (std::size_t i = 1; i < k.Ns.size(); ++i) CHECK(k.Ns[i] > k.Ns[i - 1]);
  CHECK(k.norm.upper <= k.katz_bound);
  // blocks of significant coefficients are pairwise disjoint
  CHECK(check_disjoint(k.Ns, std::vector<std::int64_t>(k.M, k.significant_max)).ok);
  auto up = primal_upper(k.E, 4, k.witness);
  CHECK(up.upper < 1.0);
  // the paper's f_M vanishes on E
  for (int i = 0; i < 2000; ++i) {
    double t = (i + 0.37) / 2000.0;
    if (k.E.contains(t)) CHECK(k.f.value(t) == 0.0);
  }
}

TEST_CASE("eps close to 1 admits M = 1") {
  auto k = kat_scheme(0.99, 6);
  CHECK(k.ok);
  CHECK(k.M >= 1);
  auto k1 = kat_scheme(0.5, 4, 1);
  CHECK(k1.M == 1);
}

TEST_CASE("two-stage composition lowers the upper bound") {
  auto s1 = kat_scheme(0.5, 4), s2 = kat_scheme(0.25, 4);
  auto rows = capacity_zero_trend({s1, s2}, 4);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].upper < rows[0].upper);
  CHECK(rows[0].upper == doctest::Approx(s1.witness_norm.upper));
  CHECK(rows[1].measure_lower == doctest::Approx(0.25));
  // composite witness vanishes on the intersection
  std::vector<Generation> g = s1.E.generations();
  for (auto x : s2.E.generations()) g.push_back(x);
  CompactSet E2(g);
  CHECK(E2.measure() >= 0.25);
}

TEST_CASE("primal: full circle and rejection") {
  CompactSet full;
  auto est = estimate_capacity(full, 4);
  CHECK(est.upper == 1.0);
  CHECK(est.lower == 1.0);
  auto one = constant_sequence(1.0);
  CHECK(primal_upper(full, 4, one).upper == doctest::Approx(1.0));
  CompactSet E({{1, 0.5}});
  DilatedIndicatorSum bad{{{1.0, 2, 0.3, 0.1, 4}}};
  CHECK_THROWS_AS(primal_upper(E, 4, bad), SupportViolation);
  // a witness that is not 1 on E
  SpectralSequence z(0, true);
  z.at(0) = 0.5;
  CHECK_THROWS_AS(primal_upper(E, 4, z), SupportViolation);
}

TEST_CASE("dual: bump in the complement of one arc") {
  CompactSet E({{1, 0.5}});  // removes (-1/4, 1/4)
  double q = conjugate_exponent(4);
  CHECK(q == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  DualWitness g{{{0.5, 0.4, 4, 1.0}}, "phi_0.4_4"};
  double lo = dual_lower(E, q, g);
  auto seq = bump_spectrum(BumpSpec{BumpKind::PHI_DELTA_L, 4, 0.4, 1}, 20000);
  CHECK(lo == doctest::Approx(1.0 / ap_norm(seq, q).upper).epsilon(1e-9));
  CHECK(lo > 0);
  DualWitness out{{{0.1, 0.4, 4, 1.0}}, "bad"};
  CHECK_THROWS_AS(dual_lower(E, q, out), SupportViolation);
  auto est = estimate_capacity(E, 4);
  CHECK(est.sandwich_ok());
  CHECK(est.lower >= lo);
}

TEST_CASE("pairing and Fejer checks") {
  auto k = kat_scheme(0.5, 4);
  // phi = 1 - f (smoothed) pairs with a density in E to int g
  auto comps = set_components(k.E);
  BumpPlacement b{comps[0].center, comps[0].length * (1 - 1e-9), 4, 1.0};
  DualWitness g{{b}, "g"};
  REQUIRE(g.supported_in(k.E));
  const std::int64_t K = 200000;
  auto phi = k.witness.spectrum(K);
  for (std::int64_t n = -K; n <= K; ++n) phi.at(n) = -phi[n];
  phi.at(0) += 1.0;
  SpectralSequence gs = bump_spectrum(BumpSpec{BumpKind::PHI_DELTA_L, 4, b.width, 1}, K);
  for (std::int64_t n = -K; n <= K; ++n) gs.at(n) *= std::polar(1.0, -2 * M_PI * frac(n * b.x0));
  auto pr = pairing(phi, gs);
  CHECK(std::abs(pr.value - 1.0) <= pr.error + 1e-9);
  auto fe = fejer_mean(phi, 5000);
  auto n0 = ap_norm(phi, 4), n1 = ap_norm(fe, 4);
  CHECK(n1.lower <= n0.upper);
  CHECK(n0.lower <= 2 * n1.upper);
}

TEST_CASE("sandwich and trend over MAIN sets") {
  ScheduleSpec sp;
  sp.rule = ScheduleRule::MAIN;
  sp.a = 3;
  sp.budget = 0.1;
  double prev = 2;
  for (int J : {1, 2, 4, 8}) {
    sp.J = J;
    auto run = assemble_uniqueness_set(build_schedule(sp));
    for (double p : {3.0, 4.0, 6.0}) {
      auto est = estimate_capacity(run.E, p);
      CHECK(est.sandwich_ok());
      CHECK(est.upper <= 1.0);
    }
    auto e4 = estimate_capacity(run.E, 4);
    CHECK(e4.lower <= prev);
    prev = e4.lower;
  }
}
