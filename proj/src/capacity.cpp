#include "uniqset/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "uniqset/bumps.hpp"
#include "uniqset/errors.hpp"
#include "uniqset/separation.hpp"

namespace uniqset {

double DilatedTerm::profile_coeff(double m) const {
  if (m == 0.0) return 1.0;
  if (smooth <= 0.0) return sinc_pi(delta * m);
  return sinc_pi((1.0 - smooth) * delta * m) * phi_delta_l_coeff(smooth * delta, l, m);
}

double DilatedTerm::decay_const() const { return 1.0 / (kPi * (1.0 - std::max(0.0, smooth)) * delta); }

double DilatedIndicatorSum::coeff(std::int64_t n) const {
  double s = 0.0;
  for (auto& t : terms)
    if (n % t.N == 0) s += t.w * t.profile_coeff(static_cast<double>(n / t.N));
  return s;
}

double DilatedIndicatorSum::weight_sum() const {
  double s = 0.0;
  for (auto& t : terms) s += t.w;
  return s;
}

DecayCertificate DilatedIndicatorSum::certificate() const {
  double C = 0.0;
  for (auto& t : terms) C += std::fabs(t.w) * static_cast<double>(t.N) * t.decay_const();
  return {C * (1.0 + 1e-9), 1.0};
}

SpectralSequence DilatedIndicatorSum::spectrum(std::int64_t K) const {
  SpectralSequence s(K);
  for (std::int64_t n = 0; n <= K; ++n) {
    double v = coeff(n);
    s.at(n) = v;
    s.at(-n) = v;
  }
  s.tail = certificate();
  s.real_function = true;
  return s;
}

double DilatedIndicatorSum::value(double t) const {
  double v = 0.0;
  for (auto& term : terms) {
    if (term.smooth <= 0.0) {
      double x = static_cast<double>(term.N) * t;
      double u = std::fabs(x - std::nearbyint(x));
      if (u < 0.5 * term.delta) v += term.w / term.delta;
      continue;
    }
    // PSI_J with (1+e) d' = (1-s) delta and e d' = s delta
    double s = term.smooth;
    double dp = (1.0 - 2.0 * s) * term.delta;
    BumpSpec b{BumpKind::PSI_J, term.l, dp, term.N, s / (1.0 - 2.0 * s)};
    v += term.w * bump_value(b, t) / ((1.0 - s) * term.delta);
  }
  return v;
}

nlohmann::json DilatedIndicatorSum::to_json() const {
  auto a = nlohmann::json::array();
  for (auto& t : terms) a.push_back({{"w", t.w}, {"N", t.N}, {"delta", t.delta}, {"smooth", t.smooth}, {"l", t.l}});
  return a;
}

NormResult nonzero_ap_norm(const DilatedIndicatorSum& f, double p, double tol) {
  if (!(p > 1.0)) throw ParameterError("nonzero_ap_norm: p must exceed 1");
  if (f.terms.empty()) return {0.0, 0.0, true};
  for (auto& t : f.terms) {
    if (t.N < 1 || !(t.delta > 0.0 && t.delta < 1.0)) throw ParameterError("dilated term: bad N or delta");
    if (t.smooth < 0.0 || t.smooth >= 0.5) throw ParameterError("dilated term: smooth must lie in [0, 0.5)");
  }
  // group terms sharing N
  std::map<std::int64_t, std::vector<DilatedTerm>> groups;
  for (auto& t : f.terms) groups[t.N].push_back(t);
  struct G {
    std::int64_t N;
    std::vector<DilatedTerm> t;
    double B;  // |a(m)| <= B / |m|
    std::int64_t K = 0;
    double at(double m) const {
      double s = 0.0;
      for (auto& x : t) s += x.w * x.profile_coeff(m);
      return s;
    }
  };
  std::vector<G> gs;
  for (auto& [N, v] : groups) {
    double B = 0.0;
    for (auto& x : v) B += std::fabs(x.w) * x.decay_const();
    gs.push_back({N, v, B});
  }
  const double T = static_cast<double>(gs.size());
  const double powT = std::pow(T, p - 1.0);
  // per-group cut: one-sided tail B^p K^{1-p}/(p-1), two sides, below tol/T
  double S = 0.0, tail = 0.0;
  const double kcap = 2e7 / T;
  for (auto& g : gs) {
    double Kneed = std::pow(2.0 * std::pow(g.B, p) * T / ((p - 1.0) * tol), 1.0 / (p - 1.0));
    g.K = static_cast<std::int64_t>(std::min(std::ceil(Kneed), kcap));
    g.K = std::max<std::int64_t>(g.K, 1);
    double s = 0.0;
    for (std::int64_t m = 1; m <= g.K; ++m) s += std::pow(std::fabs(g.at(static_cast<double>(m))), p);
    S += 2.0 * s;
    tail += 2.0 * std::pow(g.B, p) * std::pow(static_cast<double>(g.K), 1.0 - p) / (p - 1.0);
  }
  // frequencies shared by two or more groups: exact up to X, bounded past it
  double inv_l = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<long double> lcms;
  for (std::size_t i = 0; i < gs.size(); ++i)
    for (std::size_t j = i + 1; j < gs.size(); ++j) {
      long double L = static_cast<long double>(gs[i].N) / std::gcd(gs[i].N, gs[j].N) * gs[j].N;
      pairs.push_back({i, j});
      lcms.push_back(L);
      inv_l += static_cast<double>(1.0L / L);
    }
  double Rb = 0.0;
  if (!pairs.empty()) {
    const long double X = std::min<long double>(2e6L / inv_l, 4e18L);
    std::vector<std::int64_t> multi;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (lcms[k] <= X) {
        auto L = static_cast<std::int64_t>(lcms[k]);
        for (std::int64_t n = L; n <= static_cast<std::int64_t>(X); n += L) multi.push_back(n);
      }
      auto& gi = gs[pairs[k].first];
      auto& gj = gs[pairs[k].second];
      double k0 = std::floor(static_cast<double>(X / lcms[k]));
      double zeta_tail = k0 < 1.0 ? p / (p - 1.0) : std::pow(k0, 1.0 - p) / (p - 1.0);
      double Lp = std::pow(static_cast<double>(lcms[k]), p);
      Rb += 2.0 * (std::pow(gi.B * gi.N, p) + std::pow(gj.B * gj.N, p)) / Lp * zeta_tail;
    }
    std::sort(multi.begin(), multi.end());
    multi.erase(std::unique(multi.begin(), multi.end()), multi.end());
    for (std::int64_t n : multi) {
      double v = 0.0, counted = 0.0;
      for (auto& g : gs)
        if (n % g.N == 0) {
          std::int64_t m = n / g.N;
          double a = g.at(static_cast<double>(m));
          v += a;
          if (m <= g.K) counted += std::pow(std::fabs(a), p);
        }
      S += 2.0 * (std::pow(std::fabs(v), p) - counted);
    }
  }
  NormResult r;
  r.lower = std::pow(std::max(0.0, S * (1.0 - 1e-12) - Rb), 1.0 / p);
  r.upper = std::pow(S * (1.0 + 1e-12) + tail + powT * Rb, 1.0 / p);
  return r;
}

NormResult indicator_norm(double delta, double p) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("indicator_norm: delta must lie in (0,1)");
  DilatedIndicatorSum f;
  f.terms.push_back({1.0, 1, delta});
  NormResult nz = nonzero_ap_norm(f, p);
  // coefficients of 1_I are delta times those of delta^{-1} 1_I; n = 0 adds delta^p
  NormResult r;
  r.lower = delta * std::pow(std::pow(nz.lower, p) + 1.0, 1.0 / p);
  r.upper = delta * std::pow(std::pow(nz.upper, p) + 1.0, 1.0 / p);
  return r;
}

double indicator_norm_constant(double p) {
  // sum_n delta^p min(1, (pi delta |n|)^-p) <= delta^p + 2 p delta^{p-1} / ((p-1) pi), delta < 1
  return std::pow(1.0 + 2.0 * p / ((p - 1.0) * kPi), 1.0 / p);
}

nlohmann::json KatResult::to_json() const {
  nlohmann::json j;
  j["eps"] = eps;
  j["p"] = p;
  j["M"] = M;
  j["delta"] = delta;
  j["Ns"] = Ns;
  j["significant_max"] = significant_max;
  j["norm_lower"] = norm.lower;
  j["norm_upper"] = norm.upper;
  j["katz_bound"] = katz_bound;
  j["witness_norm_upper"] = witness_norm.upper;
  j["measure_lower"] = measure_lower;
  j["ok"] = ok;
  return j;
}

KatResult kat_scheme(double eps, double p, int M_cap, double smooth, double theta_factor) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("kat_scheme: eps must lie in (0,1)");
  if (!(p > 2.0)) throw ParameterError("kat_scheme: p must exceed 2");
  if (M_cap < 1) throw ParameterError("kat_scheme: M_cap must be >= 1");
  KatResult best;
  best.norm.upper = std::numeric_limits<double>::infinity();
  for (int M = 1; M <= M_cap; ++M) {
    KatResult r;
    r.eps = eps;
    r.p = p;
    r.M = M;
    r.delta = eps / M;
    const double theta = theta_factor * r.delta;
    // |sinc(pi delta m)| <= 1/(pi delta m) <= theta past Ms
    r.significant_max = static_cast<std::int64_t>(std::ceil(1.0 / (kPi * r.delta * theta)));
    r.Ns = M == 1 ? std::vector<std::int64_t>{1}
                  : greedy_select(std::vector<std::int64_t>(M, r.significant_max)).Ns;
    for (auto N : r.Ns) {
      r.f.terms.push_back({1.0 / M, N, r.delta, 0.0, 4});
      r.witness.terms.push_back({1.0 / M, N, r.delta, smooth, 4});
    }
    // coarse cut first; its interval is still rigorous, only wider
    r.norm = nonzero_ap_norm(r.f, p, 1e-7);
    if (r.norm.lower <= eps && r.norm.upper > eps) r.norm = nonzero_ap_norm(r.f, p);
    r.katz_bound = 2.0 * std::pow(M, 1.0 / p - 1.0) / r.delta * indicator_norm(r.delta, p).upper;
    r.ok = r.norm.upper <= eps;
    if (r.ok || r.norm.upper < best.norm.upper) {
      std::vector<Generation> g;
      for (auto N : r.Ns) g.push_back({N, r.delta});
      r.E = CompactSet(g);
      r.measure_lower = r.E.measure_lower();
      if (smooth > 0.0) r.witness_norm = nonzero_ap_norm(r.witness, p);
      else r.witness_norm = r.norm;
      best = r;
    }
    if (r.ok) break;
  }
  return best;
}

bool witness_vanishes_on(const CompactSet& E, const DilatedIndicatorSum& f) {
  for (auto& t : f.terms) {
    bool matched = false;
    for (auto& g : E.generations())
      if (g.N == t.N && g.delta >= t.delta) matched = true;  // same centers, wider removed arcs
    if (matched) continue;
    if (!E.realizable()) return false;
    if (!E.complement().covers(dilate_arcs(t.delta, t.N))) return false;
  }
  return true;
}

NormResult primal_upper(const CompactSet& E, double p, const DilatedIndicatorSum& f) {
  if (std::fabs(f.weight_sum() - 1.0) > 1e-12) throw ParameterError("primal witness: weights must sum to 1");
  if (!witness_vanishes_on(E, f)) throw SupportViolation("primal witness is not identically 1 on E");
  for (auto& t : f.terms)
    if (t.smooth <= 0.0) throw PreconditionError("primal witness must be continuous (smooth > 0)");
  return nonzero_ap_norm(f, p);
}

NormResult primal_upper(const CompactSet& E, double p, const SpectralSequence& phi, std::int64_t G) {
  if (!phi.tail) throw PreconditionError("primal witness needs a decay certificate");
  VecC v = synthesize(phi, G);
  // synthesis error: l1 tail plus sampled-coefficient error
  double err = (phi.tail->C > 0.0 ? phi.tail->tail_pow_sum(phi.K, 1.0) : 0.0) +
               phi.quad_err * static_cast<double>(phi.c.size());
  for (std::int64_t k = 0; k < G; ++k)
    if (E.contains_grid(k, G) && std::abs(v[k] - 1.0) > 1e-9 + err)
      throw SupportViolation("primal witness is not identically 1 on E");
  return ap_norm(phi, p);
}

bool DualWitness::supported_in(const CompactSet& E) const {
  for (auto& b : bumps)
    if (!E.contains_interval(b.x0 - 0.5 * b.width, b.x0 + 0.5 * b.width)) return false;
  return true;
}

double DualWitness::mass() const {
  double s = 0.0;
  for (auto& b : bumps) s += b.c;
  return s;
}

double dual_lower(const CompactSet& E, double q, const DualWitness& g, std::int64_t K) {
  if (g.bumps.empty()) throw ParameterError("dual witness: no bumps");
  if (!(q > 1.0)) throw ParameterError("dual_lower: q must exceed 1");
  // full-circle witness g = 1
  if (g.bumps.size() == 1 && g.bumps[0].width >= 1.0) {
    if (!E.generations().empty() && E.delta_sum() > 0.0) throw SupportViolation("g = 1 needs E = circle");
    return 1.0;
  }
  if (!g.supported_in(E)) throw SupportViolation("dual witness leaves E");
  for (auto& b : g.bumps)
    if (b.c < 0.0) throw ParameterError("dual witness: weights must be nonnegative");
  if (g.bumps.size() == 1) {
    auto& b = g.bumps[0];
    BumpSpec s{BumpKind::PHI_DELTA_L, b.l, b.width, 1, 0.25};
    auto seq = bump_spectrum(s, std::min<std::int64_t>(K, default_truncation(b.l, b.width)));
    return 1.0 / ap_norm(seq, q).upper;  // translation does not change |coefficients|
  }
  VecC c = VecC::Zero(2 * K + 1);
  double tail = 0.0;
  for (auto& b : g.bumps) {
    BumpSpec s{BumpKind::PHI_DELTA_L, b.l, b.width, 1, 0.25};
    auto cert = bump_certificate(s);
    if (cert.beta * q <= 1.0) throw DivergentTailError("dual witness: bump too rough for q");
    tail += b.c * std::pow(cert.tail_pow_sum(K, q), 1.0 / q);
    for (std::int64_t n = -K; n <= K; ++n) {
      double a = phi_delta_l_coeff(b.width, b.l, static_cast<double>(n));
      c[n + K] += b.c * a * std::polar(1.0, -2.0 * kPi * frac(static_cast<double>(n) * b.x0));
    }
  }
  double s = 0.0;
  for (std::int64_t i = 0; i < c.size(); ++i) s += std::pow(std::abs(c[i]), q);
  double up = std::pow(s, 1.0 / q) * (1.0 + 1e-12) + tail;
  return g.mass() / up;
}

std::vector<Arc> set_components(const CompactSet& E) {
  std::vector<Arc> out;
  const ArcUnion& U = E.complement();
  const auto& P = U.pieces();
  if (P.empty()) return {Arc{0.5, 1.0}};
  for (std::size_t i = 0; i < P.size(); ++i) {
    double a = P[i].second;
    double b = i + 1 < P.size() ? P[i + 1].first : P[0].first + 1.0;
    if (b > a) out.push_back(Arc{frac(0.5 * (a + b)), b - a});
  }
  std::sort(out.begin(), out.end(), [](const Arc& x, const Arc& y) { return x.length > y.length; });
  return out;
}

nlohmann::json CapacityEstimate::to_json() const {
  return {{"p", p},         {"q", q},
          {"lower", lower}, {"upper", upper},
          {"lower_witness", lower_witness}, {"upper_witness", upper_witness},
          {"sandwich_ok", sandwich_ok()}};
}

CapacityEstimate estimate_capacity(const CompactSet& E, double p, const std::vector<NamedWitness>& candidates) {
  if (!(p > 2.0)) throw ParameterError("capacity: p must exceed 2");
  CapacityEstimate est;
  est.p = p;
  est.q = conjugate_exponent(p);
  est.upper = 1.0;
  est.upper_witness = "one";
  for (auto& c : candidates) {
    if (!witness_vanishes_on(E, c.f)) continue;
    double u = primal_upper(E, p, c.f).upper;
    if (u < est.upper) {
      est.upper = u;
      est.upper_witness = c.id;
    }
  }
  auto comps = set_components(E);
  if (comps.size() == 1 && comps[0].length >= 1.0) {
    est.lower = 1.0;
    est.lower_witness = "one";
    return est;
  }
  const double shrink = 1.0 - 1e-9;
  for (int l : {2, 3, 4, 6, 8}) {
    if (l * est.q <= 1.0) continue;
    DualWitness g{{{comps[0].center, comps[0].length * shrink, l, 1.0}}, "bump_l" + std::to_string(l)};
    if (!g.supported_in(E)) continue;
    double lo = dual_lower(E, est.q, g);
    if (lo > est.lower) {
      est.lower = lo;
      est.lower_witness = g.id;
    }
  }
  if (comps.size() > 1) {
    DualWitness g;
    g.id = "multi_bump";
    for (std::size_t i = 0; i < comps.size() && i < 32; ++i)
      g.bumps.push_back({comps[i].center, comps[i].length * shrink, 3, comps[i].length});
    if (g.supported_in(E)) {
      double lo = dual_lower(E, est.q, g, 1 << 16);
      if (lo > est.lower) {
        est.lower = lo;
        est.lower_witness = g.id;
      }
    }
  }
  return est;
}

std::vector<TrendRow> capacity_zero_trend(const std::vector<KatResult>& stages, double p, bool smoothed) {
  std::vector<TrendRow> rows;
  if (stages.empty()) return rows;
  auto stage_f = [&](std::size_t s) -> const DilatedIndicatorSum& { return smoothed ? stages[s].witness : stages[s].f; };
  auto combine = [&](const std::vector<double>& lam) {
    DilatedIndicatorSum f;
    for (std::size_t s = 0; s < lam.size(); ++s)
      if (lam[s] > 0.0)
        for (auto t : stage_f(s).terms) {
          t.w *= lam[s];
          f.terms.push_back(t);
        }
    return f;
  };
  std::vector<double> best_lam{1.0};
  double best = nonzero_ap_norm(stage_f(0), p).upper;
  double eps_sum = 0.0;
  for (std::size_t J = 0; J < stages.size(); ++J) {
    eps_sum += stages[J].eps;
    if (J > 0) {
      // line search between the current best combination and the new stage
      std::vector<double> lam_best = best_lam;
      lam_best.push_back(0.0);
      for (int i = 1; i <= 20; ++i) {
        double t = i / 20.0;
        std::vector<double> lam;
        for (double x : best_lam) lam.push_back((1.0 - t) * x);
        lam.push_back(t);
        double u = nonzero_ap_norm(combine(lam), p).upper;
        if (u < best) {
          best = u;
          lam_best = lam;
        }
      }
      best_lam = lam_best;
    }
    TrendRow r;
    r.J = static_cast<int>(J) + 1;
    r.upper = best;
    r.lambda = best_lam;
    r.measure_lower = 1.0 - eps_sum;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace uniqset
