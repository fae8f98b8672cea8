#include <doctest.h>

#include <cmath>

#include "uniqset/builder.hpp"
#include "uniqset/bumps.hpp"
#include "uniqset/errors.hpp"

using namespace uniqset;

namespace {
ScheduleSpec main_spec(int J, double budget = 0.1) {
  ScheduleSpec sp;
  sp.rule = ScheduleRule::MAIN;
  sp.a = 3;
  sp.budget = budget;
  sp.J = J;
  return sp;
}
}  // namespace

TEST_CASE("main schedule formula and budget") {
  auto s = build_schedule(main_spec(10, 0.5));
  CHECK(s.budget_ok);
  CHECK(s.partial_sum <= 0.5);
  CHECK(s.infinite_upper <= 0.5 * (1 + 1e-12));
  CHECK(s.delta[1] == doctest::Approx(s.c / (2 * std::pow(std::log(2.0), 3))).epsilon(1e-14));
  CHECK(s.delta[0] == s.delta[1]);
  for (std::size_t j = 2; j < s.delta.size(); ++j) CHECK(s.delta[j] <= s.delta[j - 1]);
  // unit sum: partial sum to 1e6 is a lower bound, the reported value is above it
  double part = 1.0 / (2 * std::pow(std::log(2.0), 3));
  for (int j = 2; j <= 1000; ++j) part += 1.0 / (j * std::pow(std::log(double(j)), 3));
  CHECK(main_unit_sum_upper(3) > part);
  CHECK(main_unit_sum_upper(3) < part + 0.1);
}

TEST_CASE("custom schedule M and l") {
  ScheduleSpec sp;
  sp.rule = ScheduleRule::CUSTOM;
  sp.custom = {0.1};
  sp.budget = 0.5;
  auto s = build_schedule(sp);
  auto g = generation_params(s);
  REQUIRE(g.size() == 1);
  CHECK(g[0].M == 24);
  CHECK(g[0].l == std::max(2, int(std::lround(2 / std::log(M_PI) * std::log(10.0)))));
}

TEST_CASE("budget violation suggests smaller c") {
  auto sp = main_spec(10, 0.1);
  sp.c = 0.5;
  try {
    build_schedule(sp);
    FAIL("expected throw");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("try c <=") != std::string::npos);
  }
  sp.c = 0;
  sp.a = 2.0;
  CHECK_THROWS_AS(build_schedule(sp), ParameterError);
}

TEST_CASE("hk schedule sums within budget") {
  ScheduleSpec sp;
  sp.rule = ScheduleRule::HK;
  sp.hk_q = 1.5;
  sp.hk_eps = 0.1;
  sp.budget = 0.2;
  sp.J = 20;
  auto s = build_schedule(sp);
  CHECK(s.budget_ok);
  for (std::size_t j = 2; j < s.delta.size(); ++j) CHECK(s.delta[j] <= s.delta[j - 1]);
}

TEST_CASE("J=1 trivial set") {
  ScheduleSpec sp;
  sp.rule = ScheduleRule::CUSTOM;
  sp.custom = {0.1};
  sp.budget = 0.5;
  auto run = assemble_uniqueness_set(build_schedule(sp));
  CHECK(run.gens[0].N == 1);
  CHECK(run.E.measure() >= 0.9 - 1e-15);
  CHECK(run.balance_ok);
}

TEST_CASE("main J=50 entropy below balance caps") {
  auto run = assemble_uniqueness_set(build_schedule(main_spec(50)));
  CHECK(run.sep.all_bounds_ok());
  double acc = 0, cap = 0, prev = -1;
  for (std::size_t j = 0; j < run.entropy_terms.size(); ++j) {
    acc += run.entropy_terms[j];
    cap += run.balance_cap_terms[j];
    CHECK(acc > prev);
    CHECK(acc <= cap);
    prev = acc;
  }
  CHECK(run.balance_ok);
  CHECK(run.E.measure_lower() >= 1 - 0.1);
}

TEST_CASE("blocktail bound by direct summation") {
  for (int l = 2; l <= 8; ++l)
    for (double d : {0.01, 0.05, 0.1}) {
      double measured = phi_tail_beyond(d, l, std::int64_t(std::floor(l / d)));
      CHECK(measured <= blocktail_bound(d, l));
    }
}

TEST_CASE("restricted Lebesgue on J=1 set vs quadrature") {
  ScheduleSpec sp;
  sp.rule = ScheduleRule::CUSTOM;
  sp.custom = {0.1};
  sp.budget = 0.5;
  auto run = assemble_uniqueness_set(build_schedule(sp));
  auto mu = TestMeasure::restricted_lebesgue(run.E);
  double err = 0;
  auto v = mu.block(1, 24, &err);
  // midpoint quadrature of indicator/m(E) at G = 2^20
  const int G = 1 << 20;
  double mE = 0.9;
  for (int m : {1, 3, 7, 24}) {
    std::complex<double> s = 0;
    for (int i = 0; i < G; ++i) {
      double t = (i + 0.5) / G;
      if (run.E.contains(t)) s += std::polar(1.0, -2 * M_PI * m * t);
    }
    s /= double(G) * mE;
    CHECK(std::abs(s - v[m]) < 1e-5);
    CHECK(std::abs(mu.coeff(m) - v[m]) < 1e-12);
  }
  auto c = block_mass_certificate(run.gens, mu, {1.5});
  CHECK(c.ok());
  CHECK(c.rows[0].S >= 1 - c.rows[0].tail);
}

TEST_CASE("single atom has unimodular coefficients") {
  auto run = assemble_uniqueness_set(build_schedule(main_spec(4)));
  auto atoms = sample_atoms(run.E, 1, 0.0, 7);
  auto mu = TestMeasure::atomic(run.E, atoms);
  auto c = block_mass_certificate(run.gens, mu, {1.1, 1.5});
  CHECK(c.ok());
  for (auto& r : c.rows) {
    CHECK(r.S == doctest::Approx(2.0 * run.gens[r.j - 1].M).epsilon(1e-9));
    for (std::size_t i = 0; i < 2; ++i) CHECK(r.lq_partial[i] >= r.reference[i]);
    CHECK(r.annihilation < 1e-6);
    CHECK(r.annihilation >= 0);
  }
}

TEST_CASE("smoothed atoms: mass, Holder and annihilation") {
  auto run = assemble_uniqueness_set(build_schedule(main_spec(8)));
  auto atoms = sample_atoms(run.E, 3, 1e-8, 42);
  auto mu = TestMeasure::smoothed(run.E, atoms, 1e-8, 4);
  auto c = block_mass_certificate(run.gens, mu, {1.1, 1.5, 1.9});
  CHECK(c.ok());
  CHECK(c.max_annihilation() < 1e-6);
  for (auto& r : c.rows) CHECK(r.blocktail_measured <= r.blocktail_bound);
}

TEST_CASE("atoms outside E are refused") {
  auto run = assemble_uniqueness_set(build_schedule(main_spec(3)));
  std::vector<Atom> bad{{0, 40, 1.0}};  // t = 0 is the center of the first removed arc
  CHECK_THROWS_AS(TestMeasure::atomic(run.E, bad), SupportViolation);
  CHECK_THROWS_AS(TestMeasure::smoothed(run.E, bad, 1e-6, 4), SupportViolation);
}

TEST_CASE("divergence report and balance tail") {
  auto s = build_schedule(main_spec(10));
  auto rep = divergence_report(s, {1.1, 1.5, 1.9}, {10000, 20000});
  REQUIRE(rep.rows.size() == 2);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rep.rows[1].partial[i] > rep.rows[0].partial[i]);
  CHECK(rep.rows[1].partial[1] - rep.rows[0].partial[1] > 1e-3);
  double tb = balance_tail_bound(s.c, 3, 10000);
  CHECK(tb < 1e-2);
  CHECK(tb > 0);
  // tail bound dominates a long stretch of the actual tail
  double p1 = balance_partial(s.c, 3, 10000), p2 = balance_partial(s.c, 3, 200000);
  CHECK(p2 - p1 <= tb);
}
