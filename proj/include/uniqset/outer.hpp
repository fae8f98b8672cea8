// outer.hpp
// outer functions F = 1 - exp(chi + i H chi), their dilations F(z^N), the
// Omega-gate on N and the real-line transfer check
#ifndef UNIQSET_OUTER_HPP
#define UNIQSET_OUTER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uniqset/builder.hpp"
#include "uniqset/circle.hpp"
#include "uniqset/expr.hpp"
#include "uniqset/spectrum.hpp"

namespace uniqset {

// ---- gauges

struct OmegaGauge {
  Expression e;
  std::optional<double> doubling;  // declared D with f(t/2) <= D f(t)

  static OmegaGauge parse(const std::string& expr);
  const std::string& expr() const { return e.source(); }
  double operator()(double n) const { return e(n); }
  // log omega(e^{log_n}); NaN when omega is not positive there
  double log_at(double log_n) const;
  // positive and nonincreasing on a log grid of [1, n_max]
  bool check_decreasing(double n_max = 1e15, int points = 2000) const;
  // sup f(t/2)/f(t) over a log grid of [t_min, t_max]
  double doubling_ratio(double t_min = 1.0, double t_max = 1e6, int points = 4000) const;
};

// ---- chi and F

// C^inf step: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x)
double smooth_step(double x);

struct ChiProfile {
  double delta = 0.2, eps = 0.1, eta = 0.25;
  std::int64_t G = 0;
  double a = 0.0;     // plateau value on I(delta (1 - eta))
  double mean = 0.0;  // grid mean after construction
  VecR samples;       // chi(k/G)
  double window(double t) const;  // w(t)
  double value(double t) const;
};

// chi = log(eps) (1 - w) + a w with mean zero on the grid
ChiProfile build_chi(double delta, double eps, double eta = 0.25, std::int64_t G = 1 << 18);

struct OuterSpec {
  ChiProfile chi;
  VecC F;                    // boundary samples F(k/G)
  SpectralSequence coeffs;   // F_hat on [-K, K], K = G/4; negative part is the aliasing residue
  double F0 = 0.0;           // |F(0)| = |1 - exp(mean chi)|
  double F0_numeric = 0.0;   // |F_hat(0)| from the samples
  double offarc_sup = 0.0;   // sup |F - 1| off I(delta (1 + eta))
  double modulus_err = 0.0;  // max | |1 - F| - e^chi | / e^chi
  double neg_energy_rel = 0.0;
  double decay_beta = 4.0;   // declared smoothness order of the tail certificate
  NormResult a1;             // ||F||_{A_1}
  bool rescale_warning = false;
  bool ok(double tol = 1e-9) const;
  nlohmann::json to_json() const;
};

// throws ResourceError if exp(chi) leaves double range
OuterSpec build_outer(const ChiProfile& chi);

// conjugate function through the multiplier -i sign(n); Nyquist bin dropped
VecR conjugate(const VecR& u);

// F(z) = 1 - exp(int (zeta + z)/(zeta - z) chi dm) at z = r e^{2 pi i theta}, by grid quadrature
cplx outer_interior(const ChiProfile& chi, double r, double theta);

// ---- the Omega gate

// exact integer N when it fits 64 bits; otherwise only log N is kept, found to
// double resolution (slow gauges such as 1/log(2+n) push N far past 10^308)
struct NSelection {
  bool fits_int64 = true;
  std::int64_t N64 = 1;
  double log_N = 0.0;
  double log_omega = 0.0;  // log omega(N)
  double N() const { return fits_int64 ? static_cast<double>(N64) : std::exp(log_N); }
  nlohmann::json to_json() const;
};

// smallest N >= N_min with omega(N) * a1_upper <= gate; ResourceError past log N = log_cap
NSelection select_N_for_omega(double a1_upper, const OmegaGauge& omega, double gate, std::int64_t N_min = 1,
                              double log_cap = 1e300);
NSelection select_N_for_omega(const OuterSpec& F, const OmegaGauge& omega, double gate, std::int64_t N_min = 1);

// sum_{m >= 1} |F_hat(m)| omega(N m): stored part and certified upper (tail via omega(N (K+1)))
Interval weighted_sum(const OuterSpec& F, const OmegaGauge& omega, const NSelection& N);

// ---- stages and the simultaneous approximation report

struct OuterStage {
  int j = 0;
  double delta = 0.0, eps = 0.0;
  NSelection N;
  OuterSpec F;
  Interval weighted;  // sum_{n >= 0} |f_hat(n)| omega(n), n = 0 term included when omega(0) is finite
  double gate = 0.0;
  bool gate_ok = false;
  bool ok() const { return gate_ok && F.ok(); }
};

struct OuterConfig {
  std::vector<double> delta;
  std::vector<double> eps;  // defaults to delta
  double eta = 0.25;
  std::int64_t G = 1 << 16;
};

// chi of stage j is built with inner width delta_j / (1 + eta), so it equals log eps_j off I(delta_j)
std::vector<OuterStage> build_outer_stages(const OuterConfig& cfg, const OmegaGauge& omega);

struct AnnihilationRow {
  int j = 0;
  std::string measure;
  std::int64_t N = 0;
  double value = 0.0;  // |sum_{k >= 0} conj(f_hat_j(k)) mu_hat(k + N)|
  double bound = 0.0;  // weighted_j * sup_n |mu_hat(n)| / omega(n)
};

struct SAReport {
  std::vector<double> weighted_upper;  // per stage
  std::vector<double> sup_offarc;      // structural sup over E of |f_j - 1|
  std::vector<double> sup_grid;        // direct synthesis on E grid points, -1 when E is not realizable
  // each value under its own gate eps_j, gates strictly decreasing
  bool weighted_trend_ok = false;
  bool sup_trend_ok = false;
  bool sup_within_eps = false;
  std::vector<AnnihilationRow> annihilation;
  bool ok() const { return weighted_trend_ok && sup_trend_ok && sup_within_eps; }
  nlohmann::json to_json() const;
};

// ratio_sup: sup_n |mu_hat(n)| / omega(n) measured over n <= ratio_n
SAReport sa_certificate(const std::vector<OuterStage>& stages, const OmegaGauge& omega,
                        const std::vector<const TestMeasure*>& measures = {},
                        const std::vector<std::int64_t>& shifts = {0, 1, 2}, std::int64_t ratio_n = 100000,
                        int grid_points = 256);

// ---- real-line transfer (cycles convention: mu_hat(xi) = int e^{-2 pi i xi x} dmu)

struct LineMeasure {
  std::vector<std::pair<double, double>> atoms;   // (x, weight), x in [0, 1]
  std::vector<std::pair<double, double>> pieces;  // Lebesgue on [a, b], closed form transform
  std::function<double(double)> density;          // on [0, 1], Gauss-Legendre panels
  int panels = 64;  // floor; 4 panels per oscillation on top
  cplx transform(double xi) const;
  double total_variation() const;  // density part by quadrature of |density|
  static LineMeasure lebesgue01();
};

struct TransferResult {
  double doubling = 0.0;        // measured sup Phi(t/2)/Phi(t)
  double C_fit = 0.0;           // max over the grid of |mu_hat| / Phi
  double C_cert = 0.0;          // continuum bound through the Lipschitz constant of mu_hat
  std::int64_t violations = 0;  // midpoints with |mu_hat| > C_fit (1 + slack) Phi
  std::int64_t grid = 0;
  double xi_max = 0.0;
  double integer_ratio = 0.0;   // max_n |mu_hat(n)| / Phi(n) over the checked integers
  std::vector<double> xi, ratio;
  nlohmann::json to_json() const;
};

// throws PreconditionError if the doubling check or the integer precondition fails
TransferResult kahane_transfer(const LineMeasure& mu, const OmegaGauge& phi, double xi_max = 100.0,
                               std::int64_t grid = 10000, std::int64_t n_check = 1000, double max_doubling = 64.0,
                               double slack = 1e-3);

}  // namespace uniqset

#endif
