#include "uniqset/builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "uniqset/bumps.hpp"
#include "uniqset/errors.hpp"
#include "uniqset/nufft.hpp"

namespace uniqset {

std::string to_string(ScheduleRule r) {
  switch (r) {
    case ScheduleRule::MAIN: return "main";
    case ScheduleRule::HK: return "hk";
    case ScheduleRule::CUSTOM: return "custom";
  }
  return "?";
}

ScheduleRule schedule_rule_from_string(const std::string& s) {
  if (s == "main") return ScheduleRule::MAIN;
  if (s == "hk") return ScheduleRule::HK;
  if (s == "custom") return ScheduleRule::CUSTOM;
  throw ParameterError("unknown schedule rule: " + s);
}

std::string to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::RESTRICTED_LEBESGUE: return "restricted_lebesgue";
    case MeasureKind::ATOMIC: return "atomic";
    case MeasureKind::SMOOTHED_ATOMIC: return "smoothed_atomic";
  }
  return "?";
}

namespace {
constexpr int kSumCut = 1'000'000;

double main_unit_term(double a, int j) {
  if (j < 2) j = 2;  // log 1 = 0: the first generation reuses delta_2
  double lj = std::log(static_cast<double>(j));
  return 1.0 / (j * std::pow(lj, a));
}

double hk_unit_term(double q, double eps, int j) {
  double s = 1.0 / (q - 1.0), t = q / (q - 1.0) - eps;
  return std::pow(static_cast<double>(j), -s) * std::pow(std::log(1.0 + j), t);
}

double hk_unit_sum_upper(double q, double eps) {
  double s = 1.0 / (q - 1.0), t = q / (q - 1.0) - eps;
  double acc = 0.0;
  for (int j = 1; j <= kSumCut; ++j) acc += hk_unit_term(q, eps, j);
  // log(1+x) <= L (x/J)^{1/L} for x >= J, L = log(1+J)
  double J = kSumCut, L = std::log(1.0 + J);
  double e = s - 1.0 - t / L;
  if (e <= 0.0) throw ParameterError("hk schedule: tail bound needs 1/(q-1) - 1 > t/log(1+J)");
  return acc + std::pow(L, t) * std::pow(J, 1.0 - s) / e;
}

double ipow(double x, int l) {
  double r = 1.0;
  while (l) {
    if (l & 1) r *= x;
    x *= x;
    l >>= 1;
  }
  return r;
}

// sum_{n=a}^{b} |sinc(pi theta n)|^l / with theta = delta/l; rotation recurrence, resynced
double abs_sinc_pow_sum(double delta, int l, std::int64_t a, std::int64_t b) {
  if (b < a) return 0.0;
  const double th = kPi * delta / l;
  double acc = 0.0;
  const cplx rot = std::polar(1.0, th);
  cplx z;
  for (std::int64_t n = a; n <= b; ++n) {
    if (n == a || (n - a) % 256 == 0) z = std::polar(1.0, th * static_cast<double>(n));
    else z *= rot;
    double x = th * static_cast<double>(n);
    acc += ipow(std::fabs(z.imag()) / x, l);
  }
  return acc;
}
}  // namespace

double main_unit_sum_upper(double a) {
  static thread_local double cached_a = -1.0, cached = 0.0;
  if (a == cached_a) return cached;
  if (!(a > 1.0)) throw ParameterError("main schedule: a must exceed 1 for summability");
  double acc = main_unit_term(a, 1);
  for (int j = 2; j <= kSumCut; ++j) acc += main_unit_term(a, j);
  acc += 1.0 / ((a - 1.0) * std::pow(std::log(static_cast<double>(kSumCut)), a - 1.0));
  cached_a = a;
  cached = acc;
  return acc;
}

double main_delta(double c, double a, int j) { return c * main_unit_term(a, j); }

nlohmann::json Schedule::to_json() const {
  nlohmann::json j;
  j["rule"] = to_string(spec.rule);
  j["c"] = c;
  j["a"] = spec.a;
  j["budget"] = spec.budget;
  j["J"] = static_cast<int>(delta.size());
  j["kappa"] = kappa;
  j["partial_sum"] = partial_sum;
  j["infinite_upper"] = infinite_upper;
  j["budget_ok"] = budget_ok;
  if (spec.rule == ScheduleRule::HK) {
    j["hk_q"] = spec.hk_q;
    j["hk_eps"] = spec.hk_eps;
  }
  return j;
}

int l_for(double delta, double kappa) {
  return std::max(2, static_cast<int>(std::lround(kappa * std::log(1.0 / delta))));
}

std::int64_t M_for(double delta) {
  return static_cast<std::int64_t>(std::ceil((1.0 / delta) * std::log(1.0 / delta)));
}

Schedule build_schedule(const ScheduleSpec& spec) {
  Schedule s;
  s.spec = spec;
  s.kappa = spec.kappa > 0.0 ? spec.kappa : 2.0 / std::log(kPi);
  if (!(spec.budget > 0.0 && spec.budget < 1.0)) throw ParameterError("schedule: budget must lie in (0,1)");
  switch (spec.rule) {
    case ScheduleRule::MAIN: {
      if (!(spec.a > 2.0)) throw ParameterError("main schedule: a must exceed 2");
      if (spec.J < 1) throw ParameterError("schedule: J must be >= 1");
      double unit = main_unit_sum_upper(spec.a);
      s.c = spec.c > 0.0 ? spec.c : spec.budget / unit;
      s.infinite_upper = s.c * unit;
      for (int j = 1; j <= spec.J; ++j) s.delta.push_back(main_delta(s.c, spec.a, j));
      break;
    }
    case ScheduleRule::HK: {
      if (!(spec.hk_q > 1.0 && spec.hk_q < 2.0)) throw ParameterError("hk schedule: q must lie in (1,2)");
      if (spec.J < 1) throw ParameterError("schedule: J must be >= 1");
      double unit = hk_unit_sum_upper(spec.hk_q, spec.hk_eps);
      s.c = spec.c > 0.0 ? spec.c : spec.budget / unit;
      s.infinite_upper = s.c * unit;
      for (int j = 1; j <= spec.J; ++j) s.delta.push_back(s.c * hk_unit_term(spec.hk_q, spec.hk_eps, j));
      break;
    }
    case ScheduleRule::CUSTOM: {
      if (spec.custom.empty()) throw ParameterError("custom schedule: empty delta list");
      s.c = 1.0;
      s.delta = spec.custom;
      break;
    }
  }
  for (double d : s.delta)
    if (!(d > 0.0 && d < 1.0)) throw ParameterError("schedule: every delta_j must lie in (0,1)");
  for (double d : s.delta) s.partial_sum += d;
  if (spec.rule == ScheduleRule::CUSTOM) s.infinite_upper = s.partial_sum;
  s.budget_ok = s.partial_sum <= spec.budget && (spec.c <= 0.0 ? s.infinite_upper <= spec.budget * (1 + 1e-12) : true);
  if (s.partial_sum > spec.budget) {
    std::ostringstream os;
    os.precision(6);
    os << "schedule: sum of deltas " << s.partial_sum << " exceeds budget " << spec.budget;
    if (spec.rule != ScheduleRule::CUSTOM) os << "; try c <= " << s.c * spec.budget / s.partial_sum;
    throw ParameterError(os.str());
  }
  return s;
}

std::vector<GenerationParams> generation_params(const Schedule& s) {
  std::vector<GenerationParams> g;
  for (std::size_t i = 0; i < s.delta.size(); ++i) {
    GenerationParams p;
    p.j = static_cast<int>(i) + 1;
    p.delta = s.delta[i];
    p.l = l_for(p.delta, s.kappa);
    p.M = M_for(p.delta);
    g.push_back(p);
  }
  return g;
}

UniquenessRun assemble_uniqueness_set(const Schedule& s, std::size_t arc_cap) {
  UniquenessRun r;
  r.schedule = s;
  r.gens = generation_params(s);
  std::vector<std::int64_t> Ms;
  for (auto& g : r.gens) Ms.push_back(g.M);
  r.sep = greedy_select(Ms);
  std::vector<Generation> gl;
  for (std::size_t i = 0; i < r.gens.size(); ++i) {
    r.gens[i].N = r.sep.Ns[i];
    gl.push_back({r.gens[i].N, r.gens[i].delta});
  }
  r.E = assemble_set(gl, arc_cap);
  r.entropy = bc_entropy(r.E);
  double S = 0.0, Msum = 0.0;
  for (auto& g : r.gens) {
    double d = g.delta;
    S += (1.0 / d) * std::log(1.0 / d);
    Msum += static_cast<double>(g.M);
    double et = d * std::log(static_cast<double>(g.N) / d);
    double cap = d * (std::log(4.0) + 3.0 * std::log(Msum));
    r.entropy_terms.push_back(et);
    r.balance_terms.push_back(d * std::log(S));
    r.balance_cap_terms.push_back(cap);
    if (et > cap + 1e-15) r.balance_ok = false;
  }
  r.balance_ok = r.balance_ok && r.entropy.ok;
  return r;
}

// ---- measures

double Atom::x() const { return std::ldexp(static_cast<double>(k), -bits); }

namespace {
using u128 = unsigned __int128;

void normalize(std::vector<Atom>& atoms, double& tv) {
  double s = 0.0, a = 0.0;
  for (auto& at : atoms) {
    s += at.w;
    a += std::fabs(at.w);
  }
  if (s == 0.0) throw ParameterError("test measure: total mass is zero");
  for (auto& at : atoms) at.w /= s;
  tv = a / std::fabs(s);
}

// phase fraction of N m k / 2^bits, exact
double phase_frac(std::int64_t n, const Atom& a) {
  const std::uint64_t mask = (a.bits == 64) ? ~0ull : ((1ull << a.bits) - 1);
  std::uint64_t nn = static_cast<std::uint64_t>(n);  // two's complement wraps correctly mod 2^bits
  std::uint64_t r = static_cast<std::uint64_t>((u128)nn * a.k) & mask;
  return std::ldexp(static_cast<double>(r), -a.bits);
}
}  // namespace

TestMeasure TestMeasure::atomic(const CompactSet& E, std::vector<Atom> atoms, std::string name) {
  if (atoms.empty()) throw ParameterError("atomic measure needs atoms");
  for (auto& a : atoms)
    if (!E.contains_dyadic(a.k, a.bits)) throw SupportViolation("atom outside E");
  TestMeasure m;
  m.kind_ = MeasureKind::ATOMIC;
  m.name_ = std::move(name);
  m.atoms_ = std::move(atoms);
  normalize(m.atoms_, m.tv_);
  return m;
}

TestMeasure TestMeasure::smoothed(const CompactSet& E, std::vector<Atom> atoms, double eta, int l, std::string name) {
  if (atoms.empty()) throw ParameterError("smoothed measure needs atoms");
  if (!(eta > 0.0 && eta < 1.0) || l < 2) throw ParameterError("smoothed measure: bad eta or l");
  for (auto& a : atoms)
    if (!E.contains_interval(a.x() - 0.5 * eta, a.x() + 0.5 * eta)) throw SupportViolation("smoothed atom leaves E");
  TestMeasure m;
  m.kind_ = MeasureKind::SMOOTHED_ATOMIC;
  m.name_ = std::move(name);
  m.atoms_ = std::move(atoms);
  m.eta_ = eta;
  m.l_ = l;
  normalize(m.atoms_, m.tv_);
  return m;
}

TestMeasure TestMeasure::restricted_lebesgue(const CompactSet& E, int spread) {
  TestMeasure m;
  m.kind_ = MeasureKind::RESTRICTED_LEBESGUE;
  m.name_ = "restricted_lebesgue";
  m.spread_ = spread;
  const ArcUnion& U = E.complement();  // throws over the arc cap
  m.mE_ = 1.0 - U.measure();
  if (m.mE_ <= 0.0) throw DegenerateSetError("restricted Lebesgue measure on a null set");
  for (auto& p : U.pieces()) {
    m.ends_.push_back(p.first);
    m.signs_.push_back(1.0);
    m.ends_.push_back(p.second);
    m.signs_.push_back(-1.0);
  }
  m.tv_ = 1.0;
  return m;
}

cplx TestMeasure::coeff(std::int64_t n) const {
  if (kind_ == MeasureKind::RESTRICTED_LEBESGUE) {
    if (n == 0) return 1.0;
    cplx s = 0.0;
    for (std::size_t e = 0; e < ends_.size(); ++e) {
      long double x = static_cast<long double>(n) * ends_[e];
      double f = static_cast<double>(x - std::floor(x));
      s += signs_[e] * std::polar(1.0, -2.0 * kPi * f);
    }
    return -s / (mE_ * 2.0 * kPi * cplx(0.0, 1.0) * static_cast<double>(n));
  }
  cplx s = 0.0;
  for (auto& a : atoms_) s += a.w * std::polar(1.0, -2.0 * kPi * phase_frac(n, a));
  if (kind_ == MeasureKind::SMOOTHED_ATOMIC) s *= phi_delta_l_coeff(eta_, l_, static_cast<double>(n));
  return s;
}

VecC TestMeasure::block(std::int64_t N, std::int64_t M, double* err) const {
  VecC out(M + 1);
  if (err) *err = 0.0;
  if (kind_ == MeasureKind::RESTRICTED_LEBESGUE) {
    std::vector<double> x(ends_.size());
    for (std::size_t e = 0; e < ends_.size(); ++e) {
      long double v = static_cast<long double>(N) * ends_[e];
      x[e] = static_cast<double>(v - std::floor(v));
    }
    auto r = nufft_type1(x, signs_, M, spread_);
    out[0] = 1.0;
    for (std::int64_t m = 1; m <= M; ++m)
      out[m] = -r.F[m + M] / (mE_ * 2.0 * kPi * cplx(0.0, 1.0) * static_cast<double>(N) * static_cast<double>(m));
    // worst case over m >= 1
    if (err) *err = r.abs_err / (mE_ * 2.0 * kPi * static_cast<double>(N));
    return out;
  }
  out.setZero();
  for (auto& a : atoms_) {
    const std::uint64_t mask = (1ull << a.bits) - 1;
    const std::uint64_t step = static_cast<std::uint64_t>((u128)static_cast<std::uint64_t>(N) * a.k) & mask;
    std::uint64_t r = 0;
    for (std::int64_t m = 0; m <= M; ++m) {
      out[m] += a.w * std::polar(1.0, -2.0 * kPi * std::ldexp(static_cast<double>(r), -a.bits));
      r = (r + step) & mask;
    }
  }
  if (kind_ == MeasureKind::SMOOTHED_ATOMIC)
    for (std::int64_t m = 0; m <= M; ++m) out[m] *= phi_delta_l_coeff(eta_, l_, static_cast<double>(N * m));
  return out;
}

std::vector<Atom> sample_atoms(const CompactSet& E, int count, double eta, std::uint64_t seed, int bits) {
  std::mt19937_64 rng(seed);
  const std::uint64_t mask = (1ull << bits) - 1;
  std::vector<Atom> out;
  for (int tries = 0; tries < 1'000'000 && static_cast<int>(out.size()) < count; ++tries) {
    Atom a{rng() & mask, bits, 1.0};
    bool ok = eta > 0.0 ? E.contains_interval(a.x() - 0.5 * eta, a.x() + 0.5 * eta) : E.contains_dyadic(a.k, bits);
    if (ok) out.push_back(a);
  }
  if (static_cast<int>(out.size()) < count) throw ResourceError("sample_atoms: could not place atoms inside E");
  return out;
}

// ---- certificates

double blocktail_bound(double delta, int l) { return 2.0 * (l / delta) * std::pow(kPi, -l) / (l - 1.0); }

double phi_tail_beyond(double delta, int l, std::int64_t M, double tol) {
  if (l < 2) throw ParameterError("phi_tail_beyond: l must be >= 2");
  const double C = std::pow(l / (kPi * delta), l);
  // one-sided certificate tail past K: C K^{1-l}/(l-1)
  double Kd = std::pow(C / ((l - 1.0) * tol), 1.0 / (l - 1.0));
  std::int64_t K = static_cast<std::int64_t>(std::min(std::ceil(Kd), 2e8));
  K = std::max(K, M);
  double direct = abs_sinc_pow_sum(delta, l, M + 1, K);
  double cert = C * std::pow(static_cast<double>(K), 1.0 - l) / (l - 1.0);
  return 2.0 * (direct + cert);
}

double annihilation_residue(const GenerationParams& g, const TestMeasure& mu, double tol, double* trunc) {
  if (mu.kind() == MeasureKind::RESTRICTED_LEBESGUE)
    throw PreconditionError("annihilation residue is evaluated for atomic measures");
  const int l = g.l;
  const double C = std::pow(l / (kPi * g.delta), l);
  double Kd = std::pow(2.0 * C * mu.total_variation() / ((l - 1.0) * tol), 1.0 / (l - 1.0));
  if (Kd > 5e8) throw ResourceError("annihilation residue: truncation too large");
  const std::int64_t K = static_cast<std::int64_t>(std::ceil(Kd));
  // sum over m != 0 of phi(m) mu(-N m) = 2 Re sum_{m>=1} phi(m) mu(N m) for real mu
  double acc = 0.0;
  const std::int64_t chunk = 1 << 20;
  for (std::int64_t m0 = 1; m0 <= K; m0 += chunk) {
    std::int64_t m1 = std::min(K, m0 + chunk - 1);
    // block from m0: shift atoms by N m0
    VecC v = VecC::Zero(m1 - m0 + 1);
    for (auto& a : mu.atoms()) {
      const std::uint64_t mask = (1ull << a.bits) - 1;
      const std::uint64_t step = static_cast<std::uint64_t>((u128)static_cast<std::uint64_t>(g.N) * a.k) & mask;
      std::uint64_t r = static_cast<std::uint64_t>((u128)step * static_cast<std::uint64_t>(m0)) & mask;
      for (std::int64_t m = m0; m <= m1; ++m) {
        v[m - m0] += a.w * std::polar(1.0, -2.0 * kPi * std::ldexp(static_cast<double>(r), -a.bits));
        r = (r + step) & mask;
      }
    }
    for (std::int64_t m = m0; m <= m1; ++m) {
      double ph = phi_delta_l_coeff(g.delta, l, static_cast<double>(m));
      double sm = 1.0;
      if (mu.kind() == MeasureKind::SMOOTHED_ATOMIC)
        sm = phi_delta_l_coeff(mu.eta(), mu.smooth_l(), static_cast<double>(g.N * m));
      acc += 2.0 * ph * sm * v[m - m0].real();
    }
  }
  if (trunc) *trunc = 2.0 * C * mu.total_variation() * std::pow(static_cast<double>(K), 1.0 - l) / (l - 1.0);
  return std::fabs(1.0 + acc);
}

bool BlockMassCertificate::ok() const {
  for (auto& r : rows)
    if (!r.mass_ok || !r.holder_ok) return false;
  return true;
}

double BlockMassCertificate::max_annihilation() const {
  double m = -1.0;
  for (auto& r : rows) m = std::max(m, r.annihilation);
  return m;
}

BlockMassCertificate block_mass_certificate(const std::vector<GenerationParams>& gens, const TestMeasure& mu,
                                            const std::vector<double>& q_list, bool annihilation,
                                            double annihilation_tol) {
  BlockMassCertificate cert;
  cert.measure = mu.name();
  cert.q = q_list;
  std::vector<double> lq(q_list.size(), 0.0), ref(q_list.size(), 0.0);
  for (auto& g : gens) {
    if (g.N < 1) throw PreconditionError("block_mass_certificate: generation without N");
    BlockMassRow row;
    row.j = g.j;
    double err = 0.0;
    VecC v = mu.block(g.N, g.M, &err);
    double S = 0.0;
    std::vector<double> pq(q_list.size(), 0.0);
    for (std::int64_t m = 1; m <= g.M; ++m) {
      double a = std::abs(v[m]);
      S += 2.0 * a;  // |mu(-Nm)| = |mu(Nm)| for real measures
      for (std::size_t i = 0; i < q_list.size(); ++i) pq[i] += 2.0 * std::pow(a, q_list[i]);
    }
    row.S_err = 2.0 * err * (1.0 + std::log(static_cast<double>(g.M)));  // sum_m err/m
    row.S = std::max(0.0, S - row.S_err);
    row.tail = phi_tail_beyond(g.delta, g.l, g.M);
    row.blocktail_bound = blocktail_bound(g.delta, g.l);
    row.blocktail_measured = phi_tail_beyond(g.delta, g.l, static_cast<std::int64_t>(std::floor(g.l / g.delta)));
    row.mass_ok = row.S >= 1.0 - mu.total_variation() * row.tail;
    for (std::size_t i = 0; i < q_list.size(); ++i) {
      double q = q_list[i];
      double lhs = std::pow(S, q) / std::pow(2.0 * g.M, q - 1.0);
      row.holder_lhs.push_back(lhs);
      row.holder_rhs.push_back(pq[i]);
      if (lhs > pq[i] * (1.0 + 1e-12)) row.holder_ok = false;
      lq[i] += std::pow(row.S, q) / std::pow(2.0 * g.M, q - 1.0);
      ref[i] += std::pow(g.delta / std::log(1.0 / g.delta), q - 1.0);
    }
    row.lq_partial = lq;
    row.reference = ref;
    if (annihilation && mu.kind() != MeasureKind::RESTRICTED_LEBESGUE)
      row.annihilation = annihilation_residue(g, mu, annihilation_tol, &row.annihilation_trunc);
    cert.rows.push_back(std::move(row));
  }
  return cert;
}

namespace {
double schedule_delta(const Schedule& s, int j) {
  switch (s.spec.rule) {
    case ScheduleRule::MAIN: return main_delta(s.c, s.spec.a, j);
    case ScheduleRule::HK: return s.c * hk_unit_term(s.spec.hk_q, s.spec.hk_eps, j);
    case ScheduleRule::CUSTOM:
      if (j > static_cast<int>(s.delta.size())) throw ParameterError("custom schedule shorter than checkpoint");
      return s.delta[j - 1];
  }
  return 0.0;
}
}  // namespace

DivergenceReport divergence_report(const Schedule& s, const std::vector<double>& q_list,
                                   const std::vector<int>& checkpoints) {
  DivergenceReport rep;
  rep.q = q_list;
  std::vector<int> cps = checkpoints;
  std::sort(cps.begin(), cps.end());
  std::vector<double> acc(q_list.size(), 0.0);
  std::size_t ci = 0;
  for (int j = 1; ci < cps.size(); ++j) {
    double d = schedule_delta(s, j);
    double x = d / std::log(1.0 / d);
    for (std::size_t i = 0; i < q_list.size(); ++i) acc[i] += std::pow(x, q_list[i] - 1.0);
    while (ci < cps.size() && cps[ci] == j) {
      rep.rows.push_back({j, acc});
      ++ci;
    }
  }
  for (std::size_t i = 0; i < q_list.size(); ++i) {
    if (rep.rows.size() < 2) {
      rep.growth_exponent.push_back(std::nan(""));
      continue;
    }
    auto& a = rep.rows[rep.rows.size() - 2];
    auto& b = rep.rows.back();
    rep.growth_exponent.push_back(std::log(b.partial[i] / a.partial[i]) / std::log(double(b.J) / a.J));
  }
  return rep;
}

double balance_partial(double c, double a, int J) {
  double S = 0.0, acc = 0.0;
  for (int j = 1; j <= J; ++j) {
    double d = main_delta(c, a, j);
    S += (1.0 / d) * std::log(1.0 / d);
    acc += d * std::log(S);
  }
  return acc;
}

double balance_tail_bound(double c, double a, int J) {
  if (!(a > 2.0)) throw ParameterError("balance tail: a must exceed 2");
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("balance tail: need 0 < c < 1");
  double u = std::log(static_cast<double>(J));
  if (u < std::exp(1.0)) throw ParameterError("balance tail: J too small for the bound");
  double L = std::log(1.0 / c);
  // S_j <= j (1/delta_j) log(1/delta_j); log S_j <= 2u + a log u + L + log(u + a log u + L), u = log j,
  // and log(u + a log u + L) <= log(k u) + ... with k = (u_J + a log u_J + L)/u_J
  double k = (u + a * std::log(u) + L) / u;
  double t1 = 2.0 * std::pow(u, 2.0 - a) / (a - 2.0);
  double t2 = (a + 1.0) * std::pow(u, 1.0 - a) * ((a - 1.0) * std::log(u) + 1.0) / ((a - 1.0) * (a - 1.0));
  double t3 = (L + std::log(k)) * std::pow(u, 1.0 - a) / (a - 1.0);
  return c * (t1 + t2 + t3);
}

}  // namespace uniqset
