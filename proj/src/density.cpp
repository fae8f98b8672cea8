#include "uniqset/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "uniqset/bumps.hpp"
#include "uniqset/errors.hpp"

namespace uniqset {

using i128 = __int128;

std::string to_string(AOStatus s) {
  switch (s) {
    case AOStatus::CERTIFIED: return "certified";
    case AOStatus::CONSISTENT: return "consistent";
    case AOStatus::VIOLATED: return "violated";
    case AOStatus::INCONCLUSIVE: return "inconclusive";
  }
  return "?";
}

namespace {

double l1_tail(const SpectralSequence& s) {
  if (!s.tail) throw PreconditionError("sequence needs a decay certificate");
  double t = s.tail->C == 0.0 ? 0.0 : s.tail->tail_pow_sum(s.K, 1.0);
  return t + s.quad_err * static_cast<double>(s.c.size());
}

double l1_stored(const SpectralSequence& s) { return s.c.cwiseAbs().sum(); }

AOStatus ao_decide(bool hyp, double gamma, double lhs_lo, double lhs_hi, double psi_lo, double psi_hi, double phi_lo,
                   double phi_hi) {
  if (!hyp) return AOStatus::INCONCLUSIVE;
  const double eg = std::exp(gamma), slack = 1.0 + 1e-12;
  if (lhs_hi <= eg * psi_lo * phi_lo * slack) return AOStatus::CERTIFIED;
  if (lhs_lo > eg * psi_hi * phi_hi * slack) return AOStatus::VIOLATED;
  return AOStatus::CONSISTENT;
}

i128 floor_div(i128 a, i128 b) {  // b > 0
  i128 q = a / b;
  if ((a % b != 0) && (a < 0)) --q;
  return q;
}
i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

// frac(N t) without losing the low bits of t
double frac_mul(std::int64_t N, double t) {
  t = frac(t);
  if (t == 0.0) return 0.0;
  int ex;
  double m = std::frexp(t, &ex);  // t = m 2^ex, m in [0.5, 1)
  std::uint64_t mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
  int s = 53 - ex;  // t = mant / 2^s
  if (s > 120) return frac(static_cast<double>(N) * t);
  unsigned __int128 p = (unsigned __int128)static_cast<std::uint64_t>(N) * mant;
  unsigned __int128 mask = (((unsigned __int128)1) << s) - 1;
  unsigned __int128 r = p & mask;
  // r / 2^s with r < 2^120: split to keep precision
  double hi = static_cast<double>(static_cast<std::uint64_t>(r >> 64));
  double lo = static_cast<double>(static_cast<std::uint64_t>(r));
  return std::ldexp(hi, 64 - s) + std::ldexp(lo, -s);
}

}  // namespace

double tail_mass(const SpectralSequence& h, std::int64_t N) {
  if (!h.tail) throw PreconditionError("tail_mass: sequence needs a decay certificate");
  N = std::max<std::int64_t>(N, 0);
  double acc = 0.0;
  for (std::int64_t n = std::max<std::int64_t>(N, 1); n <= h.K; ++n) acc += std::abs(h[n]) + std::abs(h[-n]);
  if (N == 0) acc += std::abs(h[0]);
  if (h.tail->C > 0.0) acc += h.tail->tail_pow_sum(std::max(h.K, N - 1), 1.0);
  if (h.quad_err > 0.0 && N <= h.K) acc += h.quad_err * 2.0 * static_cast<double>(h.K - std::max<std::int64_t>(N, 1) + 1);
  return acc;
}

std::int64_t select_next_N(const SpectralSequence& h, double gate, std::int64_t N_min, double r) {
  if (N_min < 1) N_min = 1;
  const double target = gate * ap_norm(h, r).lower;
  auto pass = [&](std::int64_t N) { return tail_mass(h, N) <= target; };
  if (pass(N_min)) return N_min;
  std::int64_t lo = N_min, hi = N_min;
  while (!pass(hi)) {
    if (hi > (std::int64_t(1) << 61)) throw ParameterError("select_next_N: tail certificate too weak; request larger K");
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {  // pass(hi), !pass(lo)
    std::int64_t mid = lo + (hi - lo) / 2;
    if (pass(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

AOResult check_almost_orthogonality(const SpectralSequence& psi, const SpectralSequence& phi, std::int64_t N,
                                    double gamma, double r) {
  if (N < 1) throw ParameterError("almost orthogonality: N must be >= 1");
  if (gamma < 0.0) throw ParameterError("almost orthogonality: gamma must be >= 0");
  AOResult res;
  auto np = ap_norm(psi, r), nf = ap_norm(phi, r);
  res.psi_lower = np.lower;
  res.psi_upper = np.upper;
  res.phi_lower = nf.lower;
  res.phi_upper = nf.upper;
  res.hyp_tail = tail_mass(phi, N);
  res.hypothesis_ok = res.hyp_tail <= gamma * nf.lower;

  std::vector<std::pair<std::int64_t, cplx>> terms;
  for (std::int64_t m = -psi.K; m <= psi.K; ++m) {
    cplx a = psi[m];
    if (a == 0.0) continue;
    for (std::int64_t k = -phi.K; k <= phi.K; ++k) {
      cplx b = phi[k];
      if (b == 0.0) continue;
      terms.emplace_back(N * m + k, a * b);
    }
  }
  if (terms.size() > 200'000'000) throw ResourceError("almost orthogonality: convolution too large");
  std::sort(terms.begin(), terms.end(), [](auto& x, auto& y) { return x.first < y.first; });
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size();) {
    cplx s = 0.0;
    std::size_t j = i;
    for (; j < terms.size() && terms[j].first == terms[i].first; ++j) s += terms[j].second;
    acc += std::pow(std::abs(s), r);
    i = j;
  }
  double lhs = std::pow(acc, 1.0 / r);
  const double e_psi = l1_tail(psi), e_phi = l1_tail(phi);
  const double n_psi = l1_stored(psi), n_phi = l1_stored(phi);
  double pert = e_psi * (n_phi + e_phi) + n_psi * e_phi + 1e-15 * lhs;
  res.lhs_lower = std::max(0.0, lhs - pert);
  res.lhs_upper = lhs + pert;
  double den = 0.25 * (np.lower + np.upper) * (nf.lower + nf.upper);
  res.ratio = den > 0.0 ? lhs / den : 0.0;
  res.status = ao_decide(res.hypothesis_ok, gamma, res.lhs_lower, res.lhs_upper, np.lower, np.upper, nf.lower,
                         nf.upper);
  return res;
}

bool RefinementGauge::check_monotone(int points) const {
  double prev = -1.0;
  for (int i = 1; i < points; ++i) {
    double t = static_cast<double>(i) / points;
    double v = g(t);
    if (!(v >= prev)) return false;
    prev = v;
  }
  return true;
}

bool RefinementGauge::check_ratio(double r, double t_max, int points) const {
  // on a log grid toward 0 the ratio must shrink
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    double t = t_max * std::exp(-20.0 * i / points);
    double v = g(t) / std::pow(t, r - 1.0);
    if (!(v <= prev)) return false;
    prev = v;
  }
  return prev < 1e-6 * g(t_max) / std::pow(t_max, r - 1.0);
}

double DensityFactor::norm(double r) const {
  double s = 0.0;
  for (double v : a) s += std::pow(std::fabs(v), r);
  return std::pow(s, 1.0 / r);
}

DensityFactor make_factor(int j, double delta, std::int64_t N, double eps0, int l, double tau) {
  BumpSpec s{BumpKind::PSI_J, l, delta, 1, eps0};
  s.validate();
  if (!(tau > 0.0)) throw ParameterError("density: tau must be positive");
  const DecayCertificate cert = bump_certificate(s);  // beta = l + 1
  // two-sided certificate tail past Kc: 2 C Kc^{-l} / l <= tau / 2
  double Kcd = std::pow(4.0 * cert.C / (l * tau), 1.0 / l);
  if (Kcd > 5e7) throw ResourceError("density: factor window too large");
  std::int64_t Kc = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(Kcd)));
  double cert_tail = 2.0 * cert.C * std::pow(static_cast<double>(Kc), -static_cast<double>(l)) / l;
  std::vector<double> absv(Kc + 1);
  for (std::int64_t m = 1; m <= Kc; ++m) absv[m] = std::fabs(psi_j_coeff(delta, eps0, l, static_cast<double>(m)));
  // smallest K with 2 sum_{K<m<=Kc} |a| + cert_tail <= tau
  double run = cert_tail;
  std::int64_t K = Kc;
  while (K > 0 && run + 2.0 * absv[K] <= tau) {
    run += 2.0 * absv[K];
    --K;
  }
  DensityFactor f;
  f.j = j;
  f.delta = delta;
  f.N = N;
  f.K = K;
  f.tau = run;
  f.a.resize(2 * K + 1);
  f.a[K] = 1.0 - psi_j_coeff(delta, eps0, l, 0.0);
  for (std::int64_t m = 1; m <= K; ++m) {
    double v = -psi_j_coeff(delta, eps0, l, static_cast<double>(m));
    f.a[K + m] = v;
    f.a[K - m] = v;
  }
  for (double v : f.a) f.norm1 += std::fabs(v);
  return f;
}

// ---- Density

std::int64_t Density::separation_floor() const {
  if (f_.empty()) return spec_.N1;
  i128 E = E_.back();
  i128 lo = std::max<i128>(static_cast<i128>(f_.back().N) + 1, 2 * E + 1);
  if (lo > static_cast<i128>(std::numeric_limits<std::int64_t>::max()))
    throw ResourceError("density: separation floor leaves 64-bit range");
  return static_cast<std::int64_t>(lo);
}

long double Density::extent(std::size_t k) const { return static_cast<long double>(E_.at(k)); }

void Density::push(const DensityFactor& f) {
  if (f.N < separation_floor()) throw PreconditionError("density: N below the separation floor");
  if (f.K > (std::int64_t(1) << 40)) throw ResourceError("density: factor window too large");
  i128 E = E_.back() + static_cast<i128>(f.N) * f.K;  // < 2^104
  double rp = rho_.back(), p1 = pnorm1_.back();
  rho_.push_back(f.norm1 * rp + f.tau * (p1 + rp));
  pnorm1_.push_back(p1 * f.norm1);
  E_.push_back(E);
  std::vector<double> suf(f.a.size() + 1, 0.0);
  for (std::size_t i = f.a.size(); i-- > 0;) suf[i] = suf[i + 1] + std::fabs(f.a[i]);
  suffix_.push_back(std::move(suf));
  f_.push_back(f);
}

double Density::rho(int k) const { return rho_[upto(k)]; }
double Density::stored_norm1(int k) const { return pnorm1_[upto(k)]; }

double Density::stored_norm(double r, int k) const {
  double p = 1.0;
  for (std::size_t j = 0; j < upto(k); ++j) p *= f_[j].norm(r);
  return p;
}

NormResult Density::norm(double r, int k) const {
  double s = stored_norm(r, k), e = rho(k);
  return {std::max(0.0, s - e), s + e, true};
}

Interval Density::h0(int k) const {
  double p = 1.0;
  for (std::size_t j = 0; j < upto(k); ++j) p *= f_[j].at(0);
  return {p - rho(k), p + rho(k)};
}

double Density::coeff(std::int64_t n, int k) const {
  i128 rem = n;
  double v = 1.0;
  for (std::size_t j = upto(k); j-- > 0;) {
    const auto& f = f_[j];
    i128 N = f.N;
    i128 m = floor_div(2 * rem + N, 2 * N);
    if (m < -f.K || m > f.K) return 0.0;
    v *= f.a[static_cast<std::size_t>(m + f.K)];
    rem -= N * m;
  }
  return rem == 0 ? v : 0.0;
}

double Density::F(std::size_t k, i128 y) const {
  if (k == 0) return y <= 0 ? 1.0 : 0.0;
  const auto& f = f_[k - 1];
  const auto& suf = suffix_[k - 1];
  const i128 N = f.N, E = E_[k - 1];
  auto S = [&](i128 m) -> double {  // sum_{m' >= m} |a(m')|
    if (m > f.K) return 0.0;
    if (m < -f.K) return suf[0];
    return suf[static_cast<std::size_t>(m + f.K)];
  };
  i128 m_hi = ceil_div(y + E, N);
  double acc = pnorm1_[k - 1] * S(m_hi);
  i128 m_lo = ceil_div(y - E, N);
  for (i128 m = m_lo; m < m_hi; ++m)  // at most one term
    if (m >= -f.K && m <= f.K) acc += std::fabs(f.a[static_cast<std::size_t>(m + f.K)]) * F(k - 1, y - N * m);
  return acc;
}

double Density::tail_beyond(long double X, int k) const {
  std::size_t kk = upto(k);
  if (X <= 0.0L) return pnorm1_[kk] + rho_[kk];
  if (X > static_cast<long double>(E_[kk]) + 1.0L) return rho_[kk];
  i128 y = static_cast<i128>(std::ceil(X));
  if (y > E_[kk]) return rho_[kk];
  return 2.0 * F(kk, y) + rho_[kk];
}

double Density::value(double t, int k) const {
  double v = 1.0;
  for (std::size_t j = 0; j < upto(k); ++j) {
    BumpSpec s{BumpKind::PSI_J, spec_.l, f_[j].delta, 1, spec_.eps0};
    v *= 1.0 - bump_value(s, frac_mul(f_[j].N, t));
  }
  return v;
}

VecR Density::samples(std::int64_t G, int k) const {
  VecR out = VecR::Ones(G);
  for (std::size_t j = 0; j < upto(k); ++j) {
    BumpSpec s{BumpKind::PSI_J, spec_.l, f_[j].delta, f_[j].N, spec_.eps0};
    out.array() *= (1.0 - bump_samples(s, G).array());
  }
  return out;
}

SpectralSequence Density::spectrum(std::int64_t K, int k) const {
  SpectralSequence s(K);
  for (std::int64_t n = -K; n <= K; ++n) s.at(n) = coeff(n, k);
  s.quad_err = rho(k);
  s.real_function = true;
  return s;
}

CompactSet Density::support_set(int k) const {
  std::vector<Generation> g;
  for (std::size_t j = 0; j < upto(k); ++j) g.push_back({f_[j].N, f_[j].delta});
  return CompactSet(g);
}

// ---- ledgers

bool NormLedger::ok() const {
  for (auto& r : rows)
    if (!r.ok) return false;
  return true;
}

nlohmann::json NormLedger::to_json() const {
  nlohmann::json j;
  j["r"] = r;
  j["c"] = c;
  j["c_alt"] = c_alt;
  j["ok"] = ok();
  auto& a = j["rows"] = nlohmann::json::array();
  for (auto& x : rows)
    a.push_back({{"j", x.j},
                 {"N", x.N},
                 {"norm_lower", x.norm_lower},
                 {"norm_upper", x.norm_upper},
                 {"gamma", x.gamma},
                 {"N_next", x.N_next},
                 {"cap", x.cap},
                 {"cap_alt", x.cap_alt},
                 {"h0_lower", x.h0_lower},
                 {"h0_upper", x.h0_upper},
                 {"h0_floor", x.h0_floor},
                 {"rho", x.rho},
                 {"ao", to_string(x.ao)},
                 {"ao_ratio", x.ao_ratio},
                 {"ok", x.ok}});
  return j;
}

bool DensityRun::ok() const {
  for (auto& l : ledgers)
    if (!l.ok()) return false;
  return true;
}

namespace {

void validate_density(const DensitySpec& spec, int n_max) {
  if (n_max < 0 || n_max > static_cast<int>(spec.delta.size()))
    throw ParameterError("density: n_max exceeds the schedule length");
  if (spec.r_list.empty()) throw ParameterError("density: empty r list");
  for (double r : spec.r_list)
    if (!(r > 1.0 && r < 2.0)) throw ParameterError("density: r must lie in (1,2)");
  if (spec.N1 < 1) throw ParameterError("density: N1 must be >= 1");
}

NormLedger make_ledger(const Density& h, const DensitySpec& spec, double r) {
  NormLedger L;
  L.r = r;
  const std::size_t n = h.steps();
  for (auto& f : h.factors()) {
    double nr = std::log(f.norm(r) + f.tau);
    L.c = std::max(L.c, nr / std::pow(f.delta, r - 1.0));
    L.c_alt = std::max(L.c_alt, nr / std::pow(f.delta, (r - 1.0) / r));
  }
  double sd = 0.0, sdr = 0.0, sda = 0.0, floor0 = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto& f = h.factors()[k - 1];
    sd += f.delta;
    sdr += std::pow(f.delta, r - 1.0);
    sda += std::pow(f.delta, (r - 1.0) / r);
    floor0 *= 1.0 - (1.0 + spec.eps0) * f.delta;
    LedgerRow row;
    row.j = static_cast<int>(k);
    row.N = f.N;
    auto nk = h.norm(r, static_cast<int>(k));
    row.norm_lower = nk.lower;
    row.norm_upper = nk.upper;
    long double X;
    if (k < n) {
      row.N_next = h.factors()[k].N;
      X = static_cast<long double>(row.N_next);
    } else {
      X = h.extent(k) + 1.0L;  // the stored tensor vanishes from here on
    }
    row.gamma = h.tail_beyond(X, static_cast<int>(k)) / nk.lower;
    row.cap = std::exp(sd) * std::exp(L.c * sdr);
    row.cap_alt = std::exp(sd) * std::exp(L.c_alt * sda);
    auto z = h.h0(static_cast<int>(k));
    row.h0_lower = z.lo;
    row.h0_upper = z.hi;
    row.h0_floor = floor0;
    row.rho = h.rho(static_cast<int>(k));
    // step k: psi = 1 - psi_k dilated by N_k, phi = h_{k-1}, gamma = delta_k
    const double g = f.delta;
    auto prev = h.norm(r, static_cast<int>(k) - 1);
    double hyp = h.tail_beyond(static_cast<long double>(f.N), static_cast<int>(k) - 1);
    double pn = f.norm(r);
    row.ao = ao_decide(hyp <= g * prev.lower, g, nk.lower, nk.upper, pn, pn + f.tau, prev.lower, prev.upper);
    row.ao_ratio = h.stored_norm(r, static_cast<int>(k)) / (pn * h.stored_norm(r, static_cast<int>(k) - 1));
    row.ok = row.norm_upper <= row.cap && row.gamma <= f.delta && row.h0_lower >= row.h0_floor - 1e-9 &&
             row.ao == AOStatus::CERTIFIED;
    L.rows.push_back(row);
  }
  return L;
}

}  // namespace

DensityRun build_density(const DensitySpec& spec, int n_max) {
  validate_density(spec, n_max);
  DensityRun run;
  for (int j = 0; j < n_max; ++j) {
    double d = spec.delta[j];
    if (!(d > 0.0 && (1.0 + 2.0 * spec.eps0) * d < 1.0)) throw ParameterError("density: bad delta_j");
    run.support_budget += (1.0 + 2.0 * spec.eps0) * d;
  }
  if (run.support_budget >= spec.budget) {
    std::ostringstream os;
    os << "density: sum (1+2 eps0) delta_j = " << run.support_budget << " is not below the budget " << spec.budget;
    throw ParameterError(os.str());
  }
  run.h = Density(spec);
  for (int k = 1; k <= n_max; ++k) {
    const double d = spec.delta[k - 1];
    std::int64_t N_min = run.h.separation_floor();
    double target = std::numeric_limits<double>::infinity();
    for (double r : spec.r_list) target = std::min(target, d * run.h.norm(r).lower);
    auto pass = [&](std::int64_t N) { return run.h.tail_beyond(static_cast<long double>(N)) <= target; };
    std::int64_t N = N_min;
    if (!pass(N)) {
      std::int64_t lo = N, hi = N;
      while (!pass(hi)) {
        if (hi > (std::int64_t(1) << 61)) {
          std::ostringstream os;
          os << "density: step " << k << " tail gate unreachable (rho = " << run.h.rho() << ")";
          throw ResourceError(os.str());
        }
        lo = hi;
        hi *= 2;
      }
      while (hi - lo > 1) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (pass(mid)) hi = mid;
        else lo = mid;
      }
      N = hi;
    }
    run.h.push(make_factor(k, d, N, spec.eps0, spec.l, spec.tau));
  }
  for (double r : spec.r_list) run.ledgers.push_back(make_ledger(run.h, spec, r));
  return run;
}

DensityRun build_intersection_density(const DensitySpec& spec, const RefinementGauge& gauge, int n_max) {
  if (!gauge.check_monotone()) throw ParameterError("gauge is not increasing on (0,1)");
  for (double r : spec.r_list)
    if (!gauge.check_ratio(r, std::exp(-1.0))) throw ParameterError("gauge ratio g(t)/t^{r-1} does not decay");
  DensityRun run = build_density(spec, n_max);
  run.gauge_sum = 0.0;
  for (int j = 0; j < n_max; ++j) run.gauge_sum += gauge.g(spec.delta[j]);
  return run;
}

std::vector<double> density_schedule(const std::string& s, int n) {
  std::vector<double> out;
  if (s.rfind("geo:", 0) == 0) {
    double x0 = std::stod(s.substr(4));
    for (int j = 1; j <= n; ++j) out.push_back(x0 * std::ldexp(1.0, -j));
  } else if (s == "exp") {
    for (int j = 1; j <= n; ++j) out.push_back(std::exp(-static_cast<double>(j)));
  } else {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(std::stod(tok));
    if (static_cast<int>(out.size()) < n) throw ParameterError("density schedule shorter than the step count");
    out.resize(n);
  }
  return out;
}

}  // namespace uniqset
