#include "uniqset/spectrum.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "uniqset/errors.hpp"

namespace uniqset {

namespace {
// sum_{n > K} n^-s for s > 1
double zeta_tail(std::int64_t K, double s) {
  if (K < 1) return 1.0 + 1.0 / (s - 1.0);
  return std::pow(static_cast<double>(K), 1.0 - s) / (s - 1.0);
}
}  // namespace

double DecayCertificate::bound(double n) const {
  n = std::fabs(n);
  if (C == 0.0) return 0.0;
  if (n == 0.0) return std::numeric_limits<double>::infinity();
  return C * std::pow(n, -beta);
}

double DecayCertificate::tail_pow_sum(std::int64_t K, double p) const {
  if (C == 0.0) return 0.0;
  double s = beta * p;
  if (s <= 1.0) throw DivergentTailError("certificate tail diverges: beta*p <= 1");
  return 2.0 * std::pow(C, p) * zeta_tail(K, s);
}

SpectralSequence::SpectralSequence(std::int64_t K_, bool exact) : K(K_), c(VecC::Zero(2 * K_ + 1)) {
  if (K_ < 0) throw ParameterError("truncation K must be >= 0");
  if (exact) tail = DecayCertificate{0.0, 0.0};
}

double SpectralSequence::abs_bound(std::int64_t n) const {
  if (n >= -K && n <= K) return std::abs(c[n + K]) + quad_err;
  if (!tail) return std::numeric_limits<double>::infinity();
  return tail->bound(static_cast<double>(n));
}

SpectralSequence constant_sequence(cplx v) {
  SpectralSequence s(0, true);
  s.c[0] = v;
  s.real_function = v.imag() == 0.0;
  return s;
}

SpectralSequence character(std::int64_t k) {
  std::int64_t K = std::llabs(k);
  SpectralSequence s(K, true);
  s.at(k) = 1.0;
  return s;
}

double conjugate_exponent(double p) {
  if (!(p >= 1.0)) throw ParameterError("exponent must be >= 1");
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

double pow_sum(const SpectralSequence& s, double p) {
  double acc = 0.0;
  if (p == 1.0) {
    for (Eigen::Index i = 0; i < s.c.size(); ++i) acc += std::abs(s.c[i]);
  } else if (p == 2.0) {
    for (Eigen::Index i = 0; i < s.c.size(); ++i) acc += std::norm(s.c[i]);
  } else {
    for (Eigen::Index i = 0; i < s.c.size(); ++i) acc += std::pow(std::abs(s.c[i]), p);
  }
  return acc;
}

NormResult ap_norm(const SpectralSequence& s, double p) {
  if (!(p >= 1.0)) throw ParameterError("ap_norm: p must be >= 1");
  NormResult r;
  double base = pow_sum(s, p);
  r.lower = std::pow(base, 1.0 / p);
  if (!s.tail) {
    r.upper = r.lower;
    r.certified = false;
    return r;
  }
  double extra = s.tail->tail_pow_sum(s.K, p);
  // sampled coefficients carry a per-coefficient error
  if (s.quad_err > 0.0) {
    double qe = s.quad_err * std::pow(static_cast<double>(s.c.size()), 1.0 / p);
    r.upper = std::pow(base, 1.0 / p) + qe;
    r.lower = std::max(0.0, r.lower - qe);
    r.upper = std::pow(std::pow(r.upper, p) + extra, 1.0 / p);
    return r;
  }
  r.upper = std::pow(base + extra, 1.0 / p);
  return r;
}

PairingResult pairing(const SpectralSequence& f, const SpectralSequence& g) {
  PairingResult out{cplx(0.0), 0.0};
  const double inf = std::numeric_limits<double>::infinity();
  const std::int64_t Kc = std::min(f.K, g.K), Km = std::max(f.K, g.K);
  for (std::int64_t n = -Kc; n <= Kc; ++n) out.value += f[n] * std::conj(g[n]);
  auto zero_beyond = [](const SpectralSequence& s) { return s.tail && s.tail->C == 0.0; };

  // (Kc, Km]: one side stored, the other bounded by its certificate
  const SpectralSequence& big = f.K >= g.K ? f : g;
  const SpectralSequence& small = f.K >= g.K ? g : f;
  if (Km > Kc && !zero_beyond(small)) {
    if (!small.tail) return {out.value, inf};
    for (std::int64_t n = Kc + 1; n <= Km; ++n)
      out.error += (std::abs(big[n]) + std::abs(big[-n])) * small.tail->bound(static_cast<double>(n));
  }
  // beyond Km: both bounded
  if (!zero_beyond(f) && !zero_beyond(g)) {
    if (!f.tail || !g.tail) return {out.value, inf};
    double s = f.tail->beta + g.tail->beta;
    if (s <= 1.0) return {out.value, inf};
    out.error += 2.0 * f.tail->C * g.tail->C * zeta_tail(Km, s);
  }
  if (f.quad_err > 0.0 || g.quad_err > 0.0) {
    double af = 0.0, ag = 0.0;
    for (std::int64_t n = -Kc; n <= Kc; ++n) {
      af += std::abs(f[n]);
      ag += std::abs(g[n]);
    }
    out.error += f.quad_err * (ag + g.quad_err * (2 * Kc + 1)) + g.quad_err * af;
  }
  return out;
}

bool is_pow2(std::int64_t G) { return G > 0 && (G & (G - 1)) == 0; }

VecC fft_forward(const VecC& x) {
  Eigen::FFT<double> fft;
  VecC X(x.size());
  fft.fwd(X, x);
  return X;
}

VecC fft_inverse_unscaled(const VecC& X) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  VecC x(X.size());
  fft.inv(x, X);
  return x;
}

SpectralSequence dft_sample(const VecC& samples, std::int64_t K, double smooth_order, double smooth_const) {
  const std::int64_t G = samples.size();
  if (!is_pow2(G)) throw ParameterError("dft_sample: grid size must be a power of two");
  if (K < 0) K = G / 2 - 1;
  if (G < 2 * K + 2) throw ParameterError("dft_sample: grid too small for requested K");
  VecC X = fft_forward(samples) / static_cast<double>(G);
  SpectralSequence s(K);
  for (std::int64_t n = -K; n <= K; ++n) s.at(n) = X[((n % G) + G) % G];
  if (smooth_order > 0.0) s.quad_err = smooth_const * std::pow(static_cast<double>(G), -smooth_order);
  return s;
}

SpectralSequence dft_sample(const VecR& samples, std::int64_t K, double smooth_order, double smooth_const) {
  auto s = dft_sample(VecC(samples.cast<cplx>()), K, smooth_order, smooth_const);
  s.real_function = true;
  return s;
}

VecC synthesize(const SpectralSequence& s, std::int64_t G) {
  VecC bins = VecC::Zero(G);
  for (std::int64_t n = -s.K; n <= s.K; ++n) bins[((n % G) + G) % G] += s[n];
  return fft_inverse_unscaled(bins);
}

CauchyTrace cauchy_transform_trace(const SpectralSequence& s, double r, std::int64_t G) {
  if (!(r >= 0.0 && r < 1.0)) throw ParameterError("cauchy_transform_trace: need 0 <= r < 1");
  if (G < 1) throw ParameterError("cauchy_transform_trace: grid must be positive");
  VecC bins = VecC::Zero(G);
  double rn = 1.0;
  for (std::int64_t n = 0; n <= s.K; ++n) {
    bins[n % G] += s[n] * rn;
    rn *= r;
  }
  CauchyTrace t;
  t.values = fft_inverse_unscaled(bins);
  if (!s.tail) {
    t.trunc_error = std::numeric_limits<double>::infinity();
  } else if (s.tail->C == 0.0) {
    t.trunc_error = 0.0;
  } else {
    double b = std::min(s.tail->bound(static_cast<double>(s.K + 1)), s.tail->C);
    t.trunc_error = b * rn / (1.0 - r);
  }
  return t;
}

SpectralSequence fejer_mean(const SpectralSequence& s, std::int64_t M) {
  if (M < 0) throw ParameterError("fejer_mean: M must be >= 0");
  std::int64_t K = std::min(s.K, M);
  SpectralSequence out(K);
  for (std::int64_t n = -K; n <= K; ++n)
    out.at(n) = s[n] * (1.0 - static_cast<double>(std::llabs(n)) / static_cast<double>(M + 1));
  out.real_function = s.real_function;
  out.quad_err = s.quad_err;
  if (M <= s.K) {
    out.tail = DecayCertificate{0.0, 0.0};
  } else {
    out.tail = s.tail;  // weights <= 1
  }
  return out;
}

}  // namespace uniqset
