// spectrum.hpp
// truncated Fourier series with certified tails, A_p norms, pairings
#ifndef UNIQSET_SPECTRUM_HPP
#define UNIQSET_SPECTRUM_HPP

#include <complex>
#include <cstdint>
#include <optional>

#include <Eigen/Dense>

namespace uniqset {

using cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

// |c(n)| <= C |n|^-beta for |n| > K. C = 0 means the sequence is exact.
struct DecayCertificate {
  double C = 0.0;
  double beta = 0.0;
  double bound(double n) const;
  // sum_{|n|>K} bound(n)^p, via 2 C^p K^{1-beta p}/(beta p - 1)
  double tail_pow_sum(std::int64_t K, double p) const;
};

// two-sided coefficients on [-K, K]
struct SpectralSequence {
  std::int64_t K = 0;
  VecC c;  // c[n + K]
  std::optional<DecayCertificate> tail;
  bool real_function = false;  // coefficients Hermitian
  double quad_err = 0.0;       // per-coefficient error from sampling, 0 if closed form

  SpectralSequence() = default;
  explicit SpectralSequence(std::int64_t K_, bool exact = false);

  cplx operator[](std::int64_t n) const { return (n < -K || n > K) ? cplx(0.0) : c[n + K]; }
  cplx& at(std::int64_t n) { return c[n + K]; }
  bool exact() const { return tail && tail->C == 0.0; }
  // bound on |c(n)| for any n (stored value if |n| <= K)
  double abs_bound(std::int64_t n) const;
};

SpectralSequence constant_sequence(cplx v);
SpectralSequence character(std::int64_t k);

struct NormResult {
  double lower = 0.0;
  double upper = 0.0;
  bool certified = true;  // false when no tail certificate is attached
  Interval interval() const { return {lower, upper}; }
};

double conjugate_exponent(double p);

// (sum_{|n|<=K} |c|^p)^{1/p} and the certified upper value
NormResult ap_norm(const SpectralSequence& s, double p);
// sum over |n| <= K of |c(n)|^p, optionally restricted to n = N m
double pow_sum(const SpectralSequence& s, double p);

struct PairingResult {
  cplx value;
  double error = 0.0;  // |true - value| <= error
};
// <f, g> = sum f(n) conj(g(n))
PairingResult pairing(const SpectralSequence& f, const SpectralSequence& g);

// samples f(k/G), k = 0..G-1 -> coefficients on [-K, K]
// smooth_order s > 0 attaches quad_err = smooth_const * G^-s
SpectralSequence dft_sample(const VecC& samples, std::int64_t K = -1, double smooth_order = 0.0,
                            double smooth_const = 1.0);
SpectralSequence dft_sample(const VecR& samples, std::int64_t K = -1, double smooth_order = 0.0,
                            double smooth_const = 1.0);

// trigonometric sum at the grid points k/G (inverse transform of folded coefficients)
VecC synthesize(const SpectralSequence& s, std::int64_t G);

struct CauchyTrace {
  VecC values;            // sum_{n>=0} c(n) r^n e^{2 pi i n k/G}
  double trunc_error = 0;  // bound from the tail certificate
};
CauchyTrace cauchy_transform_trace(const SpectralSequence& s, double r, std::int64_t G);

// Fejer mean sigma_M: c(n) (1 - |n|/(M+1))
SpectralSequence fejer_mean(const SpectralSequence& s, std::int64_t M);

// thin wrappers over Eigen's FFT; forward uses e^{-2 pi i}
VecC fft_forward(const VecC& x);
VecC fft_inverse_unscaled(const VecC& X);  // sum X_k e^{+2 pi i k m / G}
bool is_pow2(std::int64_t G);

}  // namespace uniqset

#endif
