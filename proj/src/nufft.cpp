#include "uniqset/nufft.hpp"

#include <cmath>

#include "uniqset/circle.hpp"
#include "uniqset/errors.hpp"

namespace uniqset {

double nufft_rel_tol(int spread) {
  // Gaussian gridding with R = 2: error ~ exp(-pi sp (R-1)/(R-1/2)); factor 10 slack
  return std::max(10.0 * std::exp(-kPi * spread * (2.0 / 3.0)), 1e-15);
}

NufftResult nufft_type1(const std::vector<double>& x, const std::vector<cplx>& c, std::int64_t M, int spread) {
  if (x.size() != c.size()) throw ParameterError("nufft: size mismatch");
  if (M < 0) throw ParameterError("nufft: M must be >= 0");
  if (spread < 2 || spread > 32) throw ParameterError("nufft: spread out of range");
  const std::int64_t Mf = 2 * M + 1;
  std::int64_t Mr = 1;
  while (Mr < 2 * Mf || Mr < 4 * spread) Mr <<= 1;
  const double R = static_cast<double>(Mr) / static_cast<double>(Mf);
  const double tau = kPi * spread / (static_cast<double>(Mf) * Mf * R * (R - 0.5));
  const double h = 2.0 * kPi / static_cast<double>(Mr);
  const std::int64_t mask = Mr - 1;  // Mr is a power of two

  std::vector<double> E3(2 * spread + 1);
  for (int k = -spread; k <= spread; ++k) E3[k + spread] = std::exp(-(k * h) * (k * h) / (4.0 * tau));

  VecC grid = VecC::Zero(Mr);
  double csum = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    double th = 2.0 * kPi * frac(x[e]);
    std::int64_t m0 = static_cast<std::int64_t>(std::floor(th / h));
    double d = th - m0 * h;
    double E1 = std::exp(-d * d / (4.0 * tau));
    double E2 = std::exp(d * h / (2.0 * tau));
    cplx v = c[e] * E1;
    csum += std::abs(c[e]);
    // k >= 0
    const double iE2 = 1.0 / E2;
    double pw = 1.0;
    for (int k = 0; k <= spread; ++k) {
      grid[(m0 + k) & mask] += v * (pw * E3[k + spread]);
      pw *= E2;
    }
    pw = iE2;
    for (int k = 1; k <= spread; ++k) {
      grid[(m0 - k) & mask] += v * (pw * E3[spread - k]);
      pw *= iE2;
    }
  }
  VecC G = fft_forward(grid);
  NufftResult r;
  r.F.resize(Mf);
  const double pre = std::sqrt(kPi / tau) / static_cast<double>(Mr);
  for (std::int64_t m = -M; m <= M; ++m) {
    double md = static_cast<double>(m);
    r.F[m + M] = pre * std::exp(md * md * tau) * G[((m % Mr) + Mr) % Mr];
  }
  r.abs_err = nufft_rel_tol(spread) * csum;
  return r;
}

}  // namespace uniqset
