#include <doctest.h>

#include <cmath>

#include "uniqset/builder.hpp"
#include "uniqset/errors.hpp"
#include "uniqset/expr.hpp"
#include "uniqset/outer.hpp"

using namespace uniqset;

TEST_CASE("expression grammar") {
  auto e = Expression::parse("1/log(2+n)");
  CHECK(e(0.0) == doctest::Approx(1.0 / std::log(2.0)));
  CHECK(Expression::parse("-2^2")(0.0) == -4.0);
  CHECK(Expression::parse("2^3^2")(0.0) == 512.0);
  CHECK(Expression::parse("pow(n, -0.5) * 4")(16.0) == doctest::Approx(1.0));
  CHECK(Expression::parse("max(1, min(t, 3)) + abs(-x) - sqrt(xi)")(4.0) == doctest::Approx(3.0 + 4.0 - 2.0));
  CHECK(Expression::parse("exp(1) - e + pi")(0.0) == doctest::Approx(kPi));
  CHECK_THROWS_AS(Expression::parse("1/"), ParameterError);
  CHECK_THROWS_AS(Expression::parse("foo(n)"), ParameterError);
  CHECK_THROWS_AS(Expression::parse("(n"), ParameterError);
  CHECK_THROWS_AS(Expression::parse("log(n, 2)"), ParameterError);

  // log representation agrees with plain evaluation in range
  for (const char* src : {"1/log(2+n)", "n^(-0.5)", "(1+n)^(-2)", "exp(-sqrt(log(1+n)))", "1/n - 1/(2*n)"}) {
    auto f = Expression::parse(src);
    for (double n : {1.0, 7.0, 1e3, 1e12}) {
      LogNum v = f.eval_log(std::log(n));
      CHECK(v.sign == 1);
      CHECK(v.value() == doctest::Approx(f(n)).epsilon(1e-12));
    }
  }
  // and stays finite where doubles do not
  LogNum far = e.eval_log(1e5);
  CHECK(far.value() == doctest::Approx(1e-5).epsilon(1e-12));
}

TEST_CASE("chi profile") {
  auto z = build_chi(0.2, 1.0, 0.25, 1 << 12);
  CHECK(z.samples.cwiseAbs().maxCoeff() == 0.0);

  auto c = build_chi(0.2, 0.1, 0.25, 1 << 18);
  CHECK(c.a > 0.0);
  CHECK(std::fabs(c.mean) < 1e-12);
  const double le = std::log(0.1);
  bool off_exact = true;
  for (std::int64_t k = 0; k < c.G; ++k) {
    double t = static_cast<double>(k) / static_cast<double>(c.G);
    if (dist_to_int(t) >= 0.125) off_exact = off_exact && c.samples[k] == le;
  }
  CHECK(off_exact);
  CHECK(c.value(0.0) == doctest::Approx(c.a));
  CHECK(c.window(0.05) == 1.0);
  CHECK(c.window(0.2) == 0.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));

  CHECK_THROWS_AS(build_chi(0.2, 1.5), ParameterError);
  CHECK_THROWS_AS(build_chi(0.9, 0.1, 0.25), ParameterError);
  CHECK_THROWS_AS(build_chi(0.01, 0.1, 0.05, 1 << 12), ResourceError);
}

TEST_CASE("conjugate function") {
  auto c = build_chi(0.3, 0.2, 0.4, 1 << 14);
  VecR hh = conjugate(conjugate(c.samples));
  double err = (hh + c.samples - VecR::Constant(c.G, c.mean)).cwiseAbs().maxCoeff();
  CHECK(err < 1e-10);
  // H cos = sin
  const std::int64_t G = 256;
  VecR u(G), v(G);
  for (std::int64_t k = 0; k < G; ++k) {
    u[k] = std::cos(2.0 * kPi * 3.0 * k / G);
    v[k] = std::sin(2.0 * kPi * 3.0 * k / G);
  }
  CHECK((conjugate(u) - v).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("outer function at delta=0.2, eps=0.1") {
  auto zero = build_outer(build_chi(0.2, 1.0, 0.25, 1 << 12));
  CHECK(zero.F.cwiseAbs().maxCoeff() < 1e-15);

  auto F = build_outer(build_chi(0.2, 0.1, 0.25, 1 << 18));
  CHECK(F.F0 < 1e-9);
  CHECK(F.F0_numeric < 1e-9);
  CHECK(F.offarc_sup <= 0.1 + 1e-9);
  CHECK(F.modulus_err < 1e-9);
  CHECK(F.neg_energy_rel < 1e-18);
  double neg = 0.0;
  for (std::int64_t n = -F.coeffs.K; n < 0; ++n) neg = std::max(neg, std::abs(F.coeffs[n]));
  CHECK(neg < 1e-10);
  CHECK(F.a1.lower > 1.0);
  CHECK(F.a1.upper >= F.a1.lower);
  CHECK(F.a1.upper - F.a1.lower < 1e-6 * F.a1.upper);
  CHECK(F.ok());
}

TEST_CASE("cauchy trace of F against the Herglotz integral") {
  auto chi = build_chi(0.2, 0.1, 0.25, 1 << 16);
  auto F = build_outer(chi);
  const double r = 0.99;
  auto tr = cauchy_transform_trace(F.coeffs, r, 64);
  CHECK(std::isfinite(tr.values.cwiseAbs().maxCoeff()));
  double err = 0.0;
  for (int k = 0; k < 64; ++k) err = std::max(err, std::abs(tr.values[k] - outer_interior(chi, r, k / 64.0)));
  CHECK(err < 1e-4);
  CHECK(std::abs(outer_interior(chi, 0.0, 0.0)) < 1e-12);
}

TEST_CASE("omega gate") {
  auto inv = OmegaGauge::parse("1/n");
  CHECK(inv.check_decreasing());
  auto s = select_N_for_omega(5.0, inv, 0.01);
  CHECK(s.fits_int64);
  CHECK(s.N64 == 500);
  auto s2 = select_N_for_omega(5.0, inv, 0.005);
  CHECK(s2.N64 >= 2 * s.N64);
  CHECK(select_N_for_omega(5.0, inv, 0.01, 700).N64 == 700);
  CHECK_THROWS_AS(select_N_for_omega(5.0, OmegaGauge::parse("1"), 0.01), ResourceError);

  // 1/log(2+n): N far beyond 64 bits, gate checked post hoc
  auto lg = OmegaGauge::parse("1/log(2+n)");
  auto F = build_outer(build_chi(0.2, 0.1, 0.25, 1 << 16));
  auto sel = select_N_for_omega(F, lg, 0.1);
  CHECK_FALSE(sel.fits_int64);
  CHECK(sel.log_omega <= std::log(0.1) - std::log(F.a1.upper));
  // one ulp lower in log N no longer passes
  CHECK(std::exp(lg.log_at(sel.log_N * (1.0 - 1e-12))) * F.a1.upper > 0.1);
  auto w = weighted_sum(F, lg, sel);
  CHECK(w.lo <= w.hi);
  CHECK(w.hi <= 0.1 + (F.a1.upper - F.a1.lower));
  CHECK(w.hi <= std::exp(sel.log_omega) * F.a1.upper + (F.a1.upper - F.a1.lower) * std::exp(sel.log_omega) + 1e-12);
}

TEST_CASE("stages and simultaneous approximation") {
  OuterConfig cfg;
  cfg.G = 1 << 14;
  for (int j = 0; j < 4; ++j) cfg.delta.push_back(0.3 * std::pow(0.6, j));
  auto om = OmegaGauge::parse("n^(-0.5)");
  auto st = build_outer_stages(cfg, om);
  REQUIRE(st.size() == 4);
  for (std::size_t j = 0; j < st.size(); ++j) {
    CHECK(st[j].ok());
    CHECK(st[j].weighted.hi <= st[j].gate + (st[j].F.a1.upper - st[j].F.a1.lower));
    if (j > 0) {
      CHECK(st[j].N.log_N > st[j - 1].N.log_N);
      CHECK(st[j].weighted.hi < st[j - 1].weighted.hi);
    }
  }
  CHECK(st[0].N.fits_int64);

  CompactSet full;
  std::vector<Atom> atoms{{1ull << 38, 40, 0.6}, {3ull << 37, 40, -0.4}};
  auto mu = TestMeasure::smoothed(full, atoms, 0.05, 4, "smoothed2");
  auto rep = sa_certificate(st, om, {&mu}, {0, 1, 2}, 20000, 64);
  CHECK(rep.ok());
  CHECK(rep.sup_grid[0] >= 0.0);
  CHECK(rep.sup_grid[0] <= st[0].eps + 1e-6);
  for (std::size_t j = 0; j < st.size(); ++j) CHECK(rep.sup_offarc[j] <= st[j].eps + 1e-9);
  REQUIRE_FALSE(rep.annihilation.empty());
  double prev_bound = 1e300;
  int prev_j = 0;
  for (const auto& r : rep.annihilation) {
    CHECK(r.value <= r.bound * (1.0 + 1e-9) + 1e-12);
    if (r.j != prev_j) {
      CHECK(r.bound < prev_bound);
      prev_bound = r.bound;
      prev_j = r.j;
    }
  }
  CHECK_THROWS_AS(build_outer_stages(OuterConfig{{0.6, 0.5}, {}, 0.25, 1 << 12}, om), ParameterError);
}

TEST_CASE("kahane transfer") {
  auto phi = OmegaGauge::parse("(1+xi)^(-1)");
  auto leb = LineMeasure::lebesgue01();
  CHECK(std::abs(leb.transform(0.5)) == doctest::Approx(1.0 / (kPi * 0.5)).epsilon(1e-12));
  // closed form e^{-pi i xi} sin(pi xi)/(pi xi)
  for (double xi : {0.3, 7.25, 99.9}) {
    cplx want = std::polar(1.0, -kPi * xi) * std::sin(kPi * xi) / (kPi * xi);
    CHECK(std::abs(leb.transform(xi) - want) < 1e-12);
  }
  auto r = kahane_transfer(leb, phi, 100.0, 10000);
  CHECK(r.C_fit <= 2.0);
  CHECK(r.C_fit >= 1.0);
  CHECK(r.violations == 0);
  CHECK(r.C_cert >= r.C_fit);
  CHECK(r.doubling <= 2.0 + 1e-12);

  auto sq = OmegaGauge::parse("(1+t)^(-2)");
  CHECK(sq.doubling_ratio(1e-3, 1e6) <= 4.0);

  LineMeasure atom;
  atom.atoms.push_back({0.0, 1.0});
  CHECK_THROWS_AS(kahane_transfer(atom, phi, 100.0, 100), PreconditionError);
  CHECK_THROWS_AS(kahane_transfer(leb, OmegaGauge::parse("exp(-t)"), 100.0, 100), PreconditionError);

  // pieces: the same measure in closed form
  LineMeasure pc;
  pc.pieces.push_back({0.0, 1.0});
  CHECK(std::abs(pc.transform(3.3) - leb.transform(3.3)) < 1e-12);
}
