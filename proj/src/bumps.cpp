#include "uniqset/bumps.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "uniqset/errors.hpp"

namespace uniqset {

std::string to_string(BumpKind k) {
  switch (k) {
    case BumpKind::PHI_L: return "phi_l";
    case BumpKind::PHI_DELTA_L: return "phi_delta_l";
    case BumpKind::PHI_N_DELTA_L: return "phi_n_delta_l";
    case BumpKind::PSI_J: return "psi_j";
    case BumpKind::PSI_INDICATOR: return "psi_indicator";
  }
  return "?";
}

BumpKind bump_kind_from_string(const std::string& s) {
  for (auto k : {BumpKind::PHI_L, BumpKind::PHI_DELTA_L, BumpKind::PHI_N_DELTA_L, BumpKind::PSI_J,
                 BumpKind::PSI_INDICATOR})
    if (to_string(k) == s) return k;
  throw ParameterError("unknown bump kind: " + s);
}

void BumpSpec::validate() const {
  if (N < 1) throw ParameterError("bump: N must be >= 1");
  switch (kind) {
    case BumpKind::PHI_L:
      if (l < 2) throw ParameterError("bump: l must be >= 2");
      break;
    case BumpKind::PHI_DELTA_L:
    case BumpKind::PHI_N_DELTA_L:
      if (l < 2) throw ParameterError("bump: l must be >= 2");
      if (!(delta > 0.0 && delta <= 1.0)) throw ParameterError("bump: delta must lie in (0,1]");
      break;
    case BumpKind::PSI_J:
      if (l < 2) throw ParameterError("bump: l must be >= 2");
      if (!(eps0 > 0.0 && eps0 < 1.0)) throw ParameterError("psi_j: eps0 must lie in (0,1)");
      if (!(delta > 0.0 && (1.0 + 2.0 * eps0) * delta < 1.0))
        throw ParameterError("psi_j: support budget (1+2 eps0) delta must be < 1");
      break;
    case BumpKind::PSI_INDICATOR:
      if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("psi_indicator: delta must lie in (0,1)");
      break;
  }
  if (l > 60) throw ParameterError("bump: l above 60 is not supported");
}

nlohmann::json BumpSpec::to_json() const {
  return {{"kind", to_string(kind)}, {"l", l}, {"delta", delta}, {"N", N}, {"eps0", eps0}};
}

BumpSpec BumpSpec::from_json(const nlohmann::json& j) {
  BumpSpec s;
  s.kind = bump_kind_from_string(j.at("kind").get<std::string>());
  s.l = j.value("l", 4);
  s.delta = j.value("delta", 0.1);
  s.N = j.value("N", std::int64_t(1));
  s.eps0 = j.value("eps0", 0.25);
  s.validate();
  return s;
}

double sinc_pi(double x) {
  if (x == 0.0) return 1.0;
  double px = kPi * x;
  return std::sin(px) / px;
}

namespace {
// b[i] = M_order(x - i), triangular recursion
void bspline_table(int order, double x, std::array<double, 64>& b) {
  b.fill(0.0);
  int j = static_cast<int>(std::floor(x));
  b[j] = 1.0;
  for (int k = 2; k <= order; ++k) {
    for (int i = std::max(0, j - k + 1); i <= j; ++i) {
      double y = x - i;
      b[i] = (y * b[i] + (k - y) * b[i + 1]) / (k - 1);
    }
  }
}
}  // namespace

double bspline(int l, double x) {
  if (!(x > 0.0) || x >= l) return 0.0;
  std::array<double, 64> b;
  bspline_table(l, x, b);
  return b[0];
}

double bspline_cdf(int l, double x) {
  if (!(x > 0.0)) return 0.0;
  if (x >= l) return 1.0;
  std::array<double, 64> b;
  bspline_table(l + 1, x, b);
  int j = static_cast<int>(std::floor(x));
  double s = 0.0;
  for (int i = 0; i <= j; ++i) s += b[i];
  return std::min(1.0, s);
}

double phi_delta_l_coeff(double delta, int l, double n) {
  if (n == 0.0) return 1.0;
  return std::pow(sinc_pi(delta * n / l), l);
}

double phi_l_coeff(int l, std::int64_t n) { return phi_delta_l_coeff(1.0, l, static_cast<double>(n)); }

double psi_j_coeff(double delta, double eps0, int l, double m) {
  double w = (1.0 + eps0) * delta;
  if (m == 0.0) return w;
  return w * sinc_pi(w * m) * std::pow(sinc_pi(eps0 * delta * m / l), l);
}

double bump_coeff(const BumpSpec& s, std::int64_t n) {
  std::int64_t N = s.kind == BumpKind::PHI_N_DELTA_L || s.kind == BumpKind::PSI_J ||
                           s.kind == BumpKind::PSI_INDICATOR
                       ? s.N
                       : 1;
  if (n % N != 0) return 0.0;
  double m = static_cast<double>(n / N);
  switch (s.kind) {
    case BumpKind::PHI_L: return phi_delta_l_coeff(1.0, s.l, m);
    case BumpKind::PHI_DELTA_L:
    case BumpKind::PHI_N_DELTA_L: return phi_delta_l_coeff(s.delta, s.l, m);
    case BumpKind::PSI_J: return psi_j_coeff(s.delta, s.eps0, s.l, m);
    case BumpKind::PSI_INDICATOR: return sinc_pi(s.delta * m);
  }
  return 0.0;
}

DecayCertificate bump_certificate(const BumpSpec& s) {
  const double l = s.l;
  const double N = static_cast<double>(s.N);
  // the sharp constants are attained where |sin| = 1; keep a small margin
  constexpr double m = 1.0 + 1e-9;
  switch (s.kind) {
    case BumpKind::PHI_L: return {m * std::pow(l / kPi, l), l};
    case BumpKind::PHI_DELTA_L: return {m * std::pow(l / (kPi * s.delta), l), l};
    case BumpKind::PHI_N_DELTA_L: return {m * std::pow(l * N / (kPi * s.delta), l), l};
    case BumpKind::PSI_J: return {m * std::pow(l * N / (kPi * s.eps0 * s.delta), l) * N / kPi, l + 1.0};
    case BumpKind::PSI_INDICATOR: return {m * N / (kPi * s.delta), 1.0};
  }
  return {};
}

std::int64_t default_truncation(int l, double delta) {
  return std::max<std::int64_t>(10000, static_cast<std::int64_t>(std::ceil(10.0 * l / delta)));
}

SpectralSequence bump_spectrum(const BumpSpec& s, std::int64_t K) {
  s.validate();
  if (K < 0) K = default_truncation(s.l, s.delta) * (s.kind == BumpKind::PHI_DELTA_L ? 1 : s.N);
  SpectralSequence seq(K);
  for (std::int64_t n = 0; n <= K; ++n) {
    double v = bump_coeff(s, n);
    seq.at(n) = v;
    seq.at(-n) = v;
  }
  seq.tail = bump_certificate(s);
  seq.real_function = true;
  return seq;
}

namespace {
// value of the undilated profile at u in (-1/2, 1/2]
double profile(const BumpSpec& s, double u) {
  switch (s.kind) {
    case BumpKind::PHI_L:
    case BumpKind::PHI_DELTA_L:
    case BumpKind::PHI_N_DELTA_L: {
      double d = s.kind == BumpKind::PHI_L ? 1.0 : s.delta;
      double h = d / s.l;
      return bspline(s.l, u / h + 0.5 * s.l) / h;
    }
    case BumpKind::PSI_J: {
      if (std::fabs(u) <= 0.5 * s.delta) return 1.0;  // plateau
      double a = 0.5 * (1.0 + s.eps0) * s.delta;
      double h = s.eps0 * s.delta / s.l;
      double hi = bspline_cdf(s.l, (u + a) / h + 0.5 * s.l);
      double lo = bspline_cdf(s.l, (u - a) / h + 0.5 * s.l);
      return hi - lo;
    }
    case BumpKind::PSI_INDICATOR: {
      double au = std::fabs(u), hw = 0.5 * s.delta;
      if (au < hw) return 1.0 / s.delta;
      if (au == hw) return 0.5 / s.delta;
      return 0.0;
    }
  }
  return 0.0;
}

double wrap_half(double f) { return f > 0.5 ? f - 1.0 : f; }

std::int64_t dilation(const BumpSpec& s) {
  return (s.kind == BumpKind::PHI_L || s.kind == BumpKind::PHI_DELTA_L) ? 1 : s.N;
}
}  // namespace

double bump_value(const BumpSpec& s, double t) {
  double x = static_cast<double>(dilation(s)) * t;
  return profile(s, x - std::nearbyint(x));
}

VecR bump_samples(const BumpSpec& s, std::int64_t G) {
  s.validate();
  if (G < 1 || G > (std::int64_t(1) << 40)) throw ParameterError("bump_samples: bad grid size");
  using u128 = unsigned __int128;
  VecR out(G);
  const std::int64_t Nm = dilation(s) % G;
  const double invG = 1.0 / static_cast<double>(G);
  for (std::int64_t k = 0; k < G; ++k) {
    std::int64_t r = static_cast<std::int64_t>((u128)Nm * (u128)k % (u128)G);
    out[k] = profile(s, wrap_half(static_cast<double>(r) * invG));
  }
  return out;
}

ArcUnion bump_support(const BumpSpec& s) {
  switch (s.kind) {
    case BumpKind::PHI_L: return ArcUnion::from_pieces({{0.0, 1.0}});
    case BumpKind::PHI_DELTA_L:
      if (s.delta >= 1.0) return ArcUnion::from_pieces({{0.0, 1.0}});
      return dilate_arcs(s.delta, 1);
    case BumpKind::PHI_N_DELTA_L:
      if (s.delta >= 1.0) return ArcUnion::from_pieces({{0.0, 1.0}});
      return dilate_arcs(s.delta, s.N);
    case BumpKind::PSI_J: return dilate_arcs((1.0 + 2.0 * s.eps0) * s.delta, s.N);
    case BumpKind::PSI_INDICATOR: return dilate_arcs(s.delta, s.N);
  }
  return {};
}

ArcUnion bump_plateau(const BumpSpec& s) {
  if (s.kind == BumpKind::PSI_J) return dilate_arcs(s.delta, s.N);
  return {};
}

namespace {
std::int64_t egcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = 1;
    y = 0;
    return a;
  }
  std::int64_t x1, y1;
  std::int64_t g = egcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}
}  // namespace

AliasedValue aliased_coeff(const BumpSpec& s, std::int64_t n, std::int64_t G, double target) {
  s.validate();
  if (std::llabs(n) >= G) throw ParameterError("aliased_coeff: need |n| < G");
  AliasedValue av;
  const std::int64_t N = dilation(s);
  // k with N | n + kG: k = k0 mod P
  std::int64_t x, y;
  std::int64_t Gm = G % N;
  std::int64_t g = egcd(Gm, N, x, y);
  std::int64_t rhs = ((-n) % N + N) % N;
  if (rhs % g != 0) {
    av.value = 0.0;  // no image lands on NZ
    return av;
  }
  const std::int64_t P = N / g;
  std::int64_t k0 = static_cast<std::int64_t>(((__int128)(rhs / g) * (((x % P) + P) % P)) % P);
  const DecayCertificate cert = bump_certificate(s);
  if (cert.beta <= 1.0) throw DivergentTailError("aliased_coeff: beta must exceed 1");
  const double gap = static_cast<double>(G - std::llabs(n));
  auto remainder = [&](double Ka) {
    return 2.0 * cert.C * std::pow(gap, -cert.beta) *
           (std::pow(Ka, -cert.beta) + std::pow(Ka, 1.0 - cert.beta) / (P * (cert.beta - 1.0)));
  };
  std::int64_t Ka = 1;
  while (remainder(static_cast<double>(Ka)) > target && Ka < (std::int64_t(1) << 40)) Ka *= 2;
  double sum = 0.0;
  // smallest k >= -Ka in the class
  std::int64_t kstart = -Ka + ((k0 - (-Ka)) % P + P) % P;
  for (std::int64_t k = kstart; k <= Ka; k += P) sum += bump_coeff(s, n + k * G);
  av.value = sum;
  av.remainder = remainder(static_cast<double>(Ka));
  av.images = Ka;
  return av;
}

OracleCheck fft_oracle(const BumpSpec& s, std::int64_t G, std::int64_t window, double target) {
  OracleCheck o;
  o.G = G;
  o.window = std::min<std::int64_t>(window, G / 2 - 1);
  auto fft = dft_sample(bump_samples(s, G), o.window);
  const std::int64_t N = dilation(s);
  for (std::int64_t n = -o.window; n <= o.window; ++n) {
    auto av = aliased_coeff(s, n, G, target);
    double d = std::abs(fft[n] - cplx(av.value));
    o.max_abs_diff = std::max(o.max_abs_diff, d);
    o.max_remainder = std::max(o.max_remainder, av.remainder);
    o.excess = std::max(o.excess, d - av.remainder);
    if (N > 1 && n % N != 0) {
      o.max_off_NZ = std::max(o.max_off_NZ, d);
      o.raw_off_NZ = std::max(o.raw_off_NZ, std::abs(fft[n]));
    }
  }
  return o;
}

nlohmann::json OracleCheck::to_json() const {
  return {{"G", G},           {"window", window},         {"max_abs_diff", max_abs_diff},
          {"max_remainder", max_remainder}, {"excess", excess}, {"max_off_NZ", max_off_NZ},
          {"raw_off_NZ", raw_off_NZ}};
}

PhiDeltaL phi_delta_l(const BumpSpec& s, std::int64_t G, std::int64_t K) {
  return {bump_samples(s, G), bump_spectrum(s, K)};
}

SpectralSequence phi_N_delta_l(const BumpSpec& s, std::int64_t K) {
  BumpSpec t = s;
  t.kind = BumpKind::PHI_N_DELTA_L;
  return bump_spectrum(t, K);
}

PsiJ psi_j(double delta_j, double eps0, int l, std::int64_t K) {
  BumpSpec s{BumpKind::PSI_J, l, delta_j, 1, eps0};
  s.validate();
  return {s, bump_spectrum(s, K), bump_support(s)};
}

SpectralSequence psi_indicator(double delta, std::int64_t N, std::int64_t K) {
  BumpSpec s{BumpKind::PSI_INDICATOR, 2, delta, N, 0.25};
  return bump_spectrum(s, K);
}

double f_M_coeff(double delta, const std::vector<std::int64_t>& Ns, std::int64_t n) {
  double acc = 0.0;
  for (auto N : Ns)
    if (n % N == 0) acc += sinc_pi(delta * static_cast<double>(n / N));
  return acc / static_cast<double>(Ns.size());
}

SpectralSequence f_M(double delta, const std::vector<std::int64_t>& Ns, std::int64_t K) {
  if (Ns.empty()) throw ParameterError("f_M: need at least one N");
  for (std::size_t i = 1; i < Ns.size(); ++i)
    if (Ns[i] <= Ns[i - 1]) throw PreconditionError("f_M: Ns must be strictly increasing");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("f_M: delta must lie in (0,1)");
  SpectralSequence s(K);
  const double M = static_cast<double>(Ns.size());
  for (auto N : Ns) {
    for (std::int64_t m = 0; m * N <= K; ++m) {
      double v = sinc_pi(delta * m) / M;
      s.at(m * N) += v;
      if (m) s.at(-m * N) += v;
    }
  }
  double C = 0.0;
  for (auto N : Ns) C += static_cast<double>(N) / (kPi * delta);
  s.tail = DecayCertificate{C / M, 1.0};
  s.real_function = true;
  return s;
}

}  // namespace uniqset
