// bumps.hpp
// the block families: B-spline bumps, their dilations, plateau bumps, indicators
#ifndef UNIQSET_BUMPS_HPP
#define UNIQSET_BUMPS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "uniqset/circle.hpp"
#include "uniqset/spectrum.hpp"

namespace uniqset {

enum class BumpKind { PHI_L, PHI_DELTA_L, PHI_N_DELTA_L, PSI_J, PSI_INDICATOR };

std::string to_string(BumpKind k);
BumpKind bump_kind_from_string(const std::string& s);

struct BumpSpec {
  BumpKind kind = BumpKind::PHI_DELTA_L;
  int l = 4;
  double delta = 0.1;
  std::int64_t N = 1;
  double eps0 = 0.25;  // PSI_J only

  void validate() const;
  nlohmann::json to_json() const;
  static BumpSpec from_json(const nlohmann::json& j);
};

// sin(pi x)/(pi x)
double sinc_pi(double x);

// cardinal B-spline of order l on [0, l], and its running integral
double bspline(int l, double x);
double bspline_cdf(int l, double x);

double phi_l_coeff(int l, std::int64_t n);
double phi_delta_l_coeff(double delta, int l, double n);
// psi_j at frequency m (undilated)
double psi_j_coeff(double delta, double eps0, int l, double m);

// exact coefficient at n, including the dilation by N
double bump_coeff(const BumpSpec& s, std::int64_t n);
DecayCertificate bump_certificate(const BumpSpec& s);
SpectralSequence bump_spectrum(const BumpSpec& s, std::int64_t K);
std::int64_t default_truncation(int l, double delta);

double bump_value(const BumpSpec& s, double t);
// exact values at k/G (dilation folded in integer arithmetic)
VecR bump_samples(const BumpSpec& s, std::int64_t G);
ArcUnion bump_support(const BumpSpec& s);
// value is identically 1 on this union (PSI_J plateau); empty otherwise
ArcUnion bump_plateau(const BumpSpec& s);

// sum_k c(n + kG): what an FFT of exact samples returns at n
struct AliasedValue {
  double value = 0.0;
  double remainder = 0.0;  // bound on the images not summed
  std::int64_t images = 0;
};
AliasedValue aliased_coeff(const BumpSpec& s, std::int64_t n, std::int64_t G, double target = 1e-9);

// FFT of exact samples at G against the aliased closed form on |n| <= window
struct OracleCheck {
  std::int64_t G = 0, window = 0;
  double max_abs_diff = 0.0;   // |fft - aliased sum|
  double max_remainder = 0.0;  // images not summed
  double excess = 0.0;         // max(diff - remainder), 0 if always inside
  double max_off_NZ = 0.0;     // diff on n outside N Z: the FFT there is alias images only
  double raw_off_NZ = 0.0;     // |fft| itself outside N Z
  nlohmann::json to_json() const;
};
OracleCheck fft_oracle(const BumpSpec& s, std::int64_t G, std::int64_t window = 4096, double target = 1e-11);

struct PhiDeltaL {
  VecR samples;
  SpectralSequence seq;
};
PhiDeltaL phi_delta_l(const BumpSpec& s, std::int64_t G, std::int64_t K = -1);
SpectralSequence phi_N_delta_l(const BumpSpec& s, std::int64_t K = -1);

struct PsiJ {
  BumpSpec spec;
  SpectralSequence seq;
  ArcUnion support;
};
PsiJ psi_j(double delta_j, double eps0, int l, std::int64_t K = -1);

SpectralSequence psi_indicator(double delta, std::int64_t N, std::int64_t K);

double f_M_coeff(double delta, const std::vector<std::int64_t>& Ns, std::int64_t n);
SpectralSequence f_M(double delta, const std::vector<std::int64_t>& Ns, std::int64_t K);

}  // namespace uniqset

#endif
