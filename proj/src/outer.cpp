#include "uniqset/outer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uniqset/errors.hpp"
#include "uniqset/expr.hpp"

namespace uniqset {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// frac(N * (2i+1) / Q) with Q = 2P, exact
double frac_rational(std::int64_t N, std::int64_t odd, std::int64_t Q) {
  auto r = static_cast<std::int64_t>((static_cast<__int128>(N % Q) * odd) % Q);
  return static_cast<double>(r) / static_cast<double>(Q);
}
}  // namespace

// ---- gauges

OmegaGauge OmegaGauge::parse(const std::string& expr) {
  OmegaGauge g;
  g.e = Expression::parse(expr);
  return g;
}

double OmegaGauge::log_at(double log_n) const {
  LogNum v = e.eval_log(log_n);
  if (v.sign <= 0) return std::numeric_limits<double>::quiet_NaN();
  return v.l;
}

bool OmegaGauge::check_decreasing(double n_max, int points) const {
  double prev = kInf;
  for (int i = 0; i < points; ++i) {
    double n = std::exp(std::log(n_max) * i / (points - 1));
    double v = e(n);
    if (!(v > 0.0) || !std::isfinite(v)) return false;
    if (v > prev * (1.0 + 1e-15)) return false;
    prev = v;
  }
  return true;
}

double OmegaGauge::doubling_ratio(double t_min, double t_max, int points) const {
  double D = 0.0;
  const double l0 = std::log(t_min), l1 = std::log(t_max);
  for (int i = 0; i < points; ++i) {
    double t = std::exp(l0 + (l1 - l0) * i / (points - 1));
    double a = e(0.5 * t), b = e(t);
    if (!(b > 0.0)) return kInf;
    D = std::max(D, a / b);
  }
  return D;
}

// ---- chi

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

double ChiProfile::window(double t) const {
  double d = dist_to_int(t);
  double r0 = 0.5 * delta * (1.0 - eta), r1 = 0.5 * delta * (1.0 + eta);
  if (d <= r0) return 1.0;
  if (d >= r1) return 0.0;
  return 1.0 - smooth_step((d - r0) / (r1 - r0));
}

double ChiProfile::value(double t) const {
  double w = window(t);
  if (w == 0.0) return std::log(eps);
  return std::log(eps) * (1.0 - w) + a * w;
}

ChiProfile build_chi(double delta, double eps, double eta, std::int64_t G) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("build_chi: eps must lie in (0,1]");
  if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("build_chi: eta must lie in (0,1)");
  if (!(delta > 0.0 && (1.0 + eta) * delta < 1.0)) throw ParameterError("build_chi: need 0 < (1+eta) delta < 1");
  if (!is_pow2(G)) throw ParameterError("build_chi: grid must be a power of two");
  if (delta * eta * static_cast<double>(G) < 16.0)
    throw ResourceError("build_chi: transition of width delta*eta is not resolved by the grid, raise G or eta");
  ChiProfile c;
  c.delta = delta;
  c.eps = eps;
  c.eta = eta;
  c.G = G;
  VecR w(G);
  long double sw = 0.0L, s1w = 0.0L;
  for (std::int64_t k = 0; k < G; ++k) {
    w[k] = c.window(static_cast<double>(k) / static_cast<double>(G));
    sw += w[k];
    s1w += 1.0 - w[k];
  }
  const double le = std::log(eps);
  c.a = static_cast<double>(-le * s1w / sw);
  c.samples.resize(G);
  long double m = 0.0L;
  for (std::int64_t k = 0; k < G; ++k) {
    c.samples[k] = w[k] == 0.0 ? le : le * (1.0 - w[k]) + c.a * w[k];
    m += c.samples[k];
  }
  c.mean = static_cast<double>(m / static_cast<long double>(G));
  return c;
}

VecR conjugate(const VecR& u) {
  const std::int64_t G = u.size();
  VecC X = fft_forward(u.cast<cplx>());
  X[0] = 0.0;
  X[G / 2] = 0.0;
  for (std::int64_t n = 1; n < G / 2; ++n) {
    X[n] *= cplx(0.0, -1.0);
    X[G - n] *= cplx(0.0, 1.0);
  }
  return (fft_inverse_unscaled(X) / static_cast<double>(G)).real();
}

// ---- F

bool OuterSpec::ok(double tol) const {
  return F0 < tol && offarc_sup <= chi.eps + tol && modulus_err < tol && neg_energy_rel < 1e-18;
}

nlohmann::json OuterSpec::to_json() const {
  return {{"delta", chi.delta},       {"eps", chi.eps},
          {"eta", chi.eta},           {"G", chi.G},
          {"plateau", chi.a},         {"chi_mean", chi.mean},
          {"F0", F0},                 {"F0_numeric", F0_numeric},
          {"offarc_sup", offarc_sup},
          {"modulus_err", modulus_err}, {"neg_energy_rel", neg_energy_rel},
          {"a1_lower", a1.lower},     {"a1_upper", a1.upper},
          {"decay_beta", decay_beta}, {"rescale_warning", rescale_warning},
          {"ok", ok()}};
}

OuterSpec build_outer(const ChiProfile& chi) {
  const std::int64_t G = chi.G;
  if (G < 64 || chi.samples.size() != G) throw ParameterError("build_outer: chi is not grid-resolved");
  double cmax = chi.samples.maxCoeff();
  if (cmax > 700.0) throw ResourceError("build_outer: exp(chi) overflows (plateau " + std::to_string(cmax) + ")");
  OuterSpec o;
  o.chi = chi;
  o.rescale_warning = cmax > 300.0;

  // analytic extension of chi: spectrum 2 chi_hat(n) for n > 0
  VecC X = fft_forward(chi.samples.cast<cplx>()) / static_cast<double>(G);
  VecC U = VecC::Zero(G);
  U[0] = X[0];
  for (std::int64_t n = 1; n < G / 2; ++n) U[n] = 2.0 * X[n];
  VecC u = fft_inverse_unscaled(U);
  o.F.resize(G);
  double merr = 0.0, off = 0.0;
  const double r1 = 0.5 * chi.delta * (1.0 + chi.eta);
  for (std::int64_t k = 0; k < G; ++k) {
    cplx e = std::exp(cplx(chi.samples[k], u[k].imag()));
    o.F[k] = 1.0 - e;
    double ex = std::exp(chi.samples[k]);
    merr = std::max(merr, std::fabs(std::abs(e) - ex) / ex);
    if (dist_to_int(static_cast<double>(k) / static_cast<double>(G)) >= r1) off = std::max(off, std::abs(e));
  }
  o.modulus_err = merr;
  o.offarc_sup = off;

  VecC Fh = fft_forward(o.F) / static_cast<double>(G);
  double e_all = 0.0, e_neg = 0.0, alias = 0.0;
  for (std::int64_t n = 0; n < G; ++n) {
    double a2 = std::norm(Fh[n]);
    e_all += a2;
    if (n > G / 2) {
      e_neg += a2;
      alias = std::max(alias, std::sqrt(a2));
    }
  }
  o.neg_energy_rel = e_all > 0.0 ? e_neg / e_all : 0.0;
  // F(0) = 1 - exp(mean chi) exactly; the FFT value only measures rounding
  o.F0 = std::fabs(std::expm1(chi.mean));
  o.F0_numeric = std::abs(Fh[0]);

  const std::int64_t K = G / 4;
  o.coeffs = SpectralSequence(K);
  for (std::int64_t n = -K; n <= K; ++n) o.coeffs.at(n) = Fh[((n % G) + G) % G];
  o.coeffs.quad_err = alias;
  // measured decay constant over the upper stored range
  double C = 0.0;
  for (std::int64_t n = K / 4; n <= K; ++n)
    C = std::max(C, std::abs(Fh[n]) * std::pow(static_cast<double>(n), o.decay_beta));
  o.coeffs.tail = DecayCertificate{C, o.decay_beta};
  o.a1 = ap_norm(o.coeffs, 1.0);
  return o;
}

cplx outer_interior(const ChiProfile& chi, double r, double theta) {
  if (!(r >= 0.0 && r < 1.0)) throw ParameterError("outer_interior: need 0 <= r < 1");
  const std::int64_t G = chi.G;
  const cplx z = std::polar(r, 2.0 * kPi * theta);
  cplx acc = 0.0;
  for (std::int64_t k = 0; k < G; ++k) {
    cplx zeta = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / static_cast<double>(G));
    acc += (zeta + z) / (zeta - z) * chi.samples[k];
  }
  return 1.0 - std::exp(acc / static_cast<double>(G));
}

// ---- gate

nlohmann::json NSelection::to_json() const {
  return {{"N", fits_int64 ? nlohmann::json(N64) : nlohmann::json(nullptr)},
          {"log_N", log_N},
          {"log_omega", log_omega}};
}

NSelection select_N_for_omega(double a1_upper, const OmegaGauge& omega, double gate, std::int64_t N_min,
                              double log_cap) {
  if (!(a1_upper >= 0.0) || !(gate > 0.0)) throw ParameterError("select_N_for_omega: need a1 >= 0 and gate > 0");
  N_min = std::max<std::int64_t>(1, N_min);
  NSelection s;
  // 64-bit range: plain arithmetic, exact smallest integer
  auto pass = [&](std::int64_t N) {
    double w = omega(static_cast<double>(N));
    if (std::isnan(w)) throw ParameterError("select_N_for_omega: omega is NaN at " + std::to_string(N));
    return w * a1_upper <= gate;
  };
  constexpr std::int64_t kTop = std::int64_t(1) << 62;
  std::int64_t lo = N_min, hi = N_min;
  bool found = pass(N_min);
  while (!found && hi < kTop) {
    lo = hi;
    hi = hi > kTop / 2 ? kTop : 2 * hi;
    found = pass(hi);
  }
  if (found) {
    while (hi - lo > 1) {
      std::int64_t mid = lo + (hi - lo) / 2;
      (pass(mid) ? hi : lo) = mid;
    }
    if (hi == N_min) lo = hi;
    s.fits_int64 = true;
    s.N64 = hi;
    s.log_N = std::log(static_cast<double>(hi));
    s.log_omega = std::log(omega(static_cast<double>(hi)));
    return s;
  }
  // beyond: search log N
  const double target = std::log(gate) - std::log(a1_upper);
  auto lpass = [&](double L) {
    double w = omega.log_at(L);
    if (std::isnan(w)) throw ParameterError("select_N_for_omega: omega is not positive at log N = " + std::to_string(L));
    return w <= target;
  };
  double Llo = std::log(static_cast<double>(kTop)), Lhi = Llo;
  for (;;) {
    Llo = Lhi;
    Lhi *= 2.0;
    if (Lhi > log_cap || !std::isfinite(Lhi))
      throw ResourceError("select_N_for_omega: omega does not fall below gate/||F|| within the search cap");
    if (lpass(Lhi)) break;
  }
  for (int it = 0; it < 2000; ++it) {
    double mid = Llo + 0.5 * (Lhi - Llo);
    if (mid <= Llo || mid >= Lhi) break;
    (lpass(mid) ? Lhi : Llo) = mid;
  }
  s.fits_int64 = false;
  s.N64 = -1;
  s.log_N = Lhi;
  s.log_omega = omega.log_at(Lhi);
  return s;
}

NSelection select_N_for_omega(const OuterSpec& F, const OmegaGauge& omega, double gate, std::int64_t N_min) {
  return select_N_for_omega(F.a1.upper, omega, gate, N_min);
}

Interval weighted_sum(const OuterSpec& F, const OmegaGauge& omega, const NSelection& N) {
  auto om = [&](std::int64_t m) {
    if (N.fits_int64) return omega(static_cast<double>(N.N64) * static_cast<double>(m));
    return std::exp(omega.log_at(N.log_N + std::log(static_cast<double>(m))));
  };
  const auto& c = F.coeffs;
  double s = 0.0, wsum = 0.0;
  for (std::int64_t m = 1; m <= c.K; ++m) {
    double w = om(m);
    s += std::abs(c[m]) * w;
    wsum += w;
  }
  double q = c.quad_err * wsum;
  double tail = 0.0;
  if (c.tail && c.tail->C > 0.0) {
    double b = c.tail->beta;
    tail = c.tail->C * std::pow(static_cast<double>(c.K), 1.0 - b) / (b - 1.0) * om(c.K + 1);
  }
  return {std::max(0.0, s - q), s + q + tail};
}

std::vector<OuterStage> build_outer_stages(const OuterConfig& cfg, const OmegaGauge& omega) {
  if (cfg.delta.empty()) throw ParameterError("outer stages: empty delta schedule");
  std::vector<double> eps = cfg.eps.empty() ? cfg.delta : cfg.eps;
  if (eps.size() != cfg.delta.size()) throw ParameterError("outer stages: delta and eps lengths differ");
  double ds = 0.0;
  for (double d : cfg.delta) ds += d;
  if (!(ds < 1.0)) throw ParameterError("outer stages: sum of delta_j must stay below 1");
  const double w0 = omega(0.0);
  std::vector<OuterStage> out;
  std::int64_t N_prev = 0;
  bool beyond = false;
  for (std::size_t j = 0; j < cfg.delta.size(); ++j) {
    OuterStage st;
    st.j = static_cast<int>(j + 1);
    st.delta = cfg.delta[j];
    st.eps = eps[j];
    st.gate = eps[j];
    auto chi = build_chi(cfg.delta[j] / (1.0 + cfg.eta), eps[j], cfg.eta, cfg.G);
    st.F = build_outer(chi);
    if (beyond) {
      // previous N already past 64 bits; keep log N increasing
      st.N = select_N_for_omega(st.F, omega, st.gate, std::int64_t(1) << 62);
      if (st.N.log_N <= out.back().N.log_N) {
        st.N.log_N = std::nextafter(out.back().N.log_N, kInf);
        st.N.log_omega = omega.log_at(st.N.log_N);
      }
    } else {
      st.N = select_N_for_omega(st.F, omega, st.gate, N_prev + 1);
    }
    st.weighted = weighted_sum(st.F, omega, st.N);
    if (std::isfinite(w0)) {
      st.weighted.lo += st.F.F0 * w0;
      st.weighted.hi += st.F.F0 * w0;
    }
    st.gate_ok = st.weighted.hi <= st.gate + (st.F.a1.upper - st.F.a1.lower) + 1e-15;
    beyond = !st.N.fits_int64;
    N_prev = st.N.N64;
    out.push_back(std::move(st));
  }
  return out;
}

// ---- simultaneous approximation

nlohmann::json SAReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : annihilation)
    rows.push_back({{"j", r.j}, {"measure", r.measure}, {"N", r.N}, {"value", r.value}, {"bound", r.bound}});
  return {{"weighted_upper", weighted_upper},   {"sup_offarc", sup_offarc},
          {"sup_grid", sup_grid},               {"weighted_trend_ok", weighted_trend_ok},
          {"sup_trend_ok", sup_trend_ok},     {"sup_within_eps", sup_within_eps},
          {"annihilation", rows},               {"ok", ok()}};
}

SAReport sa_certificate(const std::vector<OuterStage>& stages, const OmegaGauge& omega,
                        const std::vector<const TestMeasure*>& measures, const std::vector<std::int64_t>& shifts,
                        std::int64_t ratio_n, int grid_points) {
  SAReport rep;
  std::vector<Generation> gens;
  for (const auto& s : stages) {
    rep.weighted_upper.push_back(s.weighted.hi);
    rep.sup_offarc.push_back(s.F.offarc_sup);
    if (s.N.fits_int64) gens.push_back({s.N.N64, s.delta});
  }
  // each value under its own gate, gates strictly decreasing
  rep.weighted_trend_ok = rep.sup_trend_ok = rep.sup_within_eps = true;
  for (std::size_t j = 0; j < stages.size(); ++j) {
    const auto& s = stages[j];
    if (!s.gate_ok) rep.weighted_trend_ok = false;
    if (s.F.offarc_sup > s.eps + 1e-9) rep.sup_within_eps = false;
    if (j > 0 && !(s.eps < stages[j - 1].eps)) rep.weighted_trend_ok = rep.sup_trend_ok = false;
  }

  // direct synthesis of f_j at grid points of E (generations with 64-bit N;
  // membership is integer arithmetic, no realization needed)
  const CompactSet E(gens);
  const std::int64_t P = 1 << 14, Q = 2 * P;
  std::vector<std::int64_t> odd;
  for (std::int64_t i = 0; i < P; ++i)
    if (E.contains_grid(2 * i + 1, Q)) odd.push_back(2 * i + 1);
  std::vector<std::int64_t> pick;
  if (!odd.empty()) {
    std::size_t step = std::max<std::size_t>(1, odd.size() / static_cast<std::size_t>(std::max(1, grid_points)));
    for (std::size_t i = 0; i < odd.size(); i += step) pick.push_back(odd[i]);
  }
  for (const auto& s : stages) {
    if (!s.N.fits_int64 || pick.empty()) {
      rep.sup_grid.push_back(-1.0);
      continue;
    }
    const auto& c = s.F.coeffs;
    double sup = 0.0;
    for (std::int64_t o : pick) {
      double x = frac_rational(s.N.N64, o, Q);
      cplx rot = std::polar(1.0, 2.0 * kPi * x), z = 1.0, acc = 0.0;
      for (std::int64_t m = 0; m <= c.K; ++m) {
        acc += c[m] * z;
        z *= rot;
        if ((m & 1023) == 1023) z = std::polar(1.0, 2.0 * kPi * std::fmod(x * static_cast<double>(m + 1), 1.0));
      }
      sup = std::max(sup, std::abs(acc - 1.0));
    }
    rep.sup_grid.push_back(sup);
    if (sup > s.eps + 1e-6) rep.sup_within_eps = false;
  }

  // annihilation table
  const double w0 = omega(0.0);
  for (const TestMeasure* mu : measures) {
    double R = 0.0;
    for (std::int64_t n = std::isfinite(w0) ? 0 : 1; n <= ratio_n; ++n) R = std::max(R, std::abs(mu->coeff(n)) / omega(static_cast<double>(n)));
    for (const auto& s : stages) {
      if (!s.N.fits_int64) continue;
      const auto& c = s.F.coeffs;
      if (static_cast<long double>(s.N.N64) * c.K > 9e18L) continue;
      for (std::int64_t N : shifts) {
        cplx acc = 0.0;
        for (std::int64_t m = 0; m <= c.K; ++m) acc += std::conj(c[m]) * mu->coeff(s.N.N64 * m + N);
        AnnihilationRow row;
        row.j = s.j;
        row.measure = mu->name();
        row.N = N;
        row.value = std::abs(acc);
        row.bound = s.weighted.hi * R + (std::isfinite(w0) ? 0.0 : s.F.F0 * mu->total_variation());
        rep.annihilation.push_back(row);
      }
    }
  }
  return rep;
}

// ---- real line

namespace {
constexpr double kGLx[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
constexpr double kGLw[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
}  // namespace

cplx LineMeasure::transform(double xi) const {
  cplx acc = 0.0;
  for (auto [x, w] : atoms) acc += w * std::polar(1.0, -2.0 * kPi * xi * x);
  for (auto [a, b] : pieces) {
    if (xi == 0.0) {
      acc += b - a;
    } else {
      acc += (std::polar(1.0, -2.0 * kPi * xi * a) - std::polar(1.0, -2.0 * kPi * xi * b)) /
             cplx(0.0, 2.0 * kPi * xi);
    }
  }
  if (density) {
    std::int64_t P = std::max<std::int64_t>(panels, static_cast<std::int64_t>(std::ceil(4.0 * std::fabs(xi))) + panels);
    const double h = 1.0 / static_cast<double>(P);
    for (std::int64_t i = 0; i < P; ++i) {
      double c = (static_cast<double>(i) + 0.5) * h;
      for (int k = 0; k < 4; ++k)
        for (int sg = -1; sg <= 1; sg += 2) {
          double x = c + sg * 0.5 * h * kGLx[k];
          acc += 0.5 * h * kGLw[k] * density(x) * std::polar(1.0, -2.0 * kPi * xi * x);
        }
    }
  }
  return acc;
}

double LineMeasure::total_variation() const {
  double tv = 0.0;
  for (auto [x, w] : atoms) tv += std::fabs(w);
  for (auto [a, b] : pieces) tv += b - a;
  if (density) {
    const double h = 1.0 / static_cast<double>(panels);
    for (int i = 0; i < panels; ++i) {
      double c = (i + 0.5) * h;
      for (int k = 0; k < 4; ++k)
        tv += 0.5 * h * kGLw[k] * (std::fabs(density(c - 0.5 * h * kGLx[k])) + std::fabs(density(c + 0.5 * h * kGLx[k])));
    }
  }
  return tv;
}

LineMeasure LineMeasure::lebesgue01() {
  LineMeasure m;
  m.density = [](double) { return 1.0; };
  return m;
}

nlohmann::json TransferResult::to_json() const {
  return {{"doubling", doubling}, {"C_fit", C_fit}, {"C_cert", C_cert}, {"violations", violations},
          {"grid", grid}, {"xi_max", xi_max}, {"integer_ratio", integer_ratio}};
}

TransferResult kahane_transfer(const LineMeasure& mu, const OmegaGauge& phi, double xi_max, std::int64_t grid,
                               std::int64_t n_check, double max_doubling, double slack) {
  if (!(xi_max > 0.0) || grid < 2) throw ParameterError("kahane_transfer: need xi_max > 0 and grid >= 2");
  for (auto [x, w] : mu.atoms)
    if (x < 0.0 || x > 1.0) throw PreconditionError("kahane_transfer: atom outside [0,1]");
  for (auto [a, b] : mu.pieces)
    if (a < 0.0 || b > 1.0 || a > b) throw PreconditionError("kahane_transfer: piece outside [0,1]");
  TransferResult r;
  r.grid = grid;
  r.xi_max = xi_max;
  const double h = xi_max / static_cast<double>(grid);
  if (!phi.check_decreasing(std::max(xi_max, static_cast<double>(n_check)) * 2.0, 1000))
    throw PreconditionError("kahane_transfer: Phi must be positive and decreasing");
  r.doubling = phi.doubling_ratio(h, 2.0 * std::max(xi_max, static_cast<double>(n_check)));
  if (!(r.doubling <= max_doubling) || (phi.doubling && r.doubling > *phi.doubling * (1.0 + 1e-9)))
    throw PreconditionError("kahane_transfer: doubling check Phi(t/2) <= D Phi(t) fails (measured " +
                            std::to_string(r.doubling) + ")");
  for (std::int64_t n = 1; n <= n_check; ++n) {
    double v = std::abs(mu.transform(static_cast<double>(n))), p = phi(static_cast<double>(n));
    r.integer_ratio = std::max(r.integer_ratio, v / p);
    if (v > p + 1e-12)
      throw PreconditionError("kahane_transfer: |mu_hat(n)| <= Phi(n) fails at n = " + std::to_string(n));
  }
  const double tv = mu.total_variation();
  std::vector<double> m(grid + 1);
  for (std::int64_t i = 0; i <= grid; ++i) m[i] = std::abs(mu.transform(h * static_cast<double>(i)));
  r.xi.reserve(grid);
  r.ratio.reserve(grid);
  for (std::int64_t i = 1; i <= grid; ++i) {
    double xi = h * static_cast<double>(i), q = m[i] / phi(xi);
    r.xi.push_back(xi);
    r.ratio.push_back(q);
    r.C_fit = std::max(r.C_fit, q);
    // |d/dxi mu_hat| <= 2 pi ||mu|| on [0,1]
    r.C_cert = std::max(r.C_cert, (std::max(m[i - 1], m[i]) + kPi * h * tv) / phi(xi));
  }
  for (std::int64_t i = 0; i < grid; ++i) {
    double xi = h * (static_cast<double>(i) + 0.5);
    if (std::abs(mu.transform(xi)) > r.C_fit * (1.0 + slack) * phi(xi)) ++r.violations;
  }
  return r;
}

}  // namespace uniqset
