// density.hpp
// nonnegative densities h_n = prod_j (1 - psi_j(N_j t)) with uniform A_r ledgers
#ifndef UNIQSET_DENSITY_HPP
#define UNIQSET_DENSITY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uniqset/circle.hpp"
#include "uniqset/spectrum.hpp"

namespace uniqset {

// ---- almost orthogonality

enum class AOStatus { CERTIFIED, CONSISTENT, VIOLATED, INCONCLUSIVE };
std::string to_string(AOStatus s);

struct AOResult {
  AOStatus status = AOStatus::INCONCLUSIVE;
  bool hypothesis_ok = false;
  double hyp_tail = 0.0;       // sum_{|n|>=N} |phi(n)|, upper
  double lhs_lower = 0.0, lhs_upper = 0.0;  // ||psi_N phi||_r
  double psi_lower = 0.0, psi_upper = 0.0;
  double phi_lower = 0.0, phi_upper = 0.0;
  double ratio = 0.0;  // lhs / (||psi|| ||phi||), midpoint values
  bool holds() const { return status == AOStatus::CERTIFIED || status == AOStatus::CONSISTENT; }
};

// ||psi(N.) phi||_r <= e^gamma ||psi||_r ||phi||_r, by exact convolution of the stored parts
AOResult check_almost_orthogonality(const SpectralSequence& psi, const SpectralSequence& phi, std::int64_t N,
                                    double gamma, double r);

// sum_{|n|>=N} |c(n)|: stored part plus certificate tail
double tail_mass(const SpectralSequence& h, std::int64_t N);
// smallest N >= N_min with tail_mass(h, N) <= gate ||h||_{r,lower}
std::int64_t select_next_N(const SpectralSequence& h, double gate, std::int64_t N_min, double r);

// ---- gauge

struct RefinementGauge {
  std::string name = "exp(-log^2 t)";
  std::function<double(double)> g = [](double t) { double L = std::log(t); return std::exp(-L * L); };
  // increasing on the grid, and g(t)/t^{r-1} increasing on (0, t_max] for each r
  bool check_monotone(int points = 1000) const;
  bool check_ratio(double r, double t_max, int points = 1000) const;
};

// ---- the tensor density

struct DensitySpec {
  std::vector<double> delta;
  double eps0 = 0.25;
  int l = 16;
  double tau = 1e-13;              // l1 truncation per factor
  std::vector<double> r_list{1.5};
  std::int64_t N1 = 1;
  double budget = 1.0;             // sum (1+2 eps0) delta_j must stay below
};

struct DensityFactor {
  int j = 0;
  double delta = 0.0;
  std::int64_t N = 0;
  std::int64_t K = 0;
  std::vector<double> a;  // coefficients of 1 - psi_j on [-K, K]
  double tau = 0.0;       // certified l1 mass of 1 - psi_j outside [-K, K]
  double norm1 = 0.0;     // l1 of the stored window
  double at(std::int64_t m) const { return (m < -K || m > K) ? 0.0 : a[m + K]; }
  double norm(double r) const;
};

class Density {
 public:
  Density() = default;
  explicit Density(const DensitySpec& spec) : spec_(spec) {}

  // append one factor; N must be >= separation_floor()
  void push(const DensityFactor& f);
  std::size_t steps() const { return f_.size(); }
  const std::vector<DensityFactor>& factors() const { return f_; }
  const DensitySpec& spec() const { return spec_; }

  // smallest N keeping digit representations unique: max(N_prev + 1, 2 E + 1)
  std::int64_t separation_floor() const;
  long double extent(std::size_t k) const;  // E_k = sum_{j<=k} N_j K_j

  // coefficient of the stored tensor after k steps (k = -1: all); true coefficient within rho(k)
  double coeff(std::int64_t n, int k = -1) const;
  double rho(int k = -1) const;
  double stored_norm1(int k = -1) const;
  double stored_norm(double r, int k = -1) const;
  NormResult norm(double r, int k = -1) const;
  Interval h0(int k = -1) const;
  // sum_{|n|>=X} |h_k(n)|, upper
  double tail_beyond(long double X, int k = -1) const;

  double value(double t, int k = -1) const;
  VecR samples(std::int64_t G, int k = -1) const;  // exact folding of the dilations
  SpectralSequence spectrum(std::int64_t K, int k = -1) const;
  // support of h: complement of the plateau arcs
  CompactSet support_set(int k = -1) const;

 private:
  std::size_t upto(int k) const { return k < 0 ? f_.size() : static_cast<std::size_t>(k); }
  double F(std::size_t k, __int128 y) const;  // one-sided tail of the stored tensor

  DensitySpec spec_;
  std::vector<DensityFactor> f_;
  std::vector<std::vector<double>> suffix_;  // suffix sums of |a| per factor
  std::vector<double> rho_{0.0}, pnorm1_{1.0};
  std::vector<__int128> E_{0};
};

DensityFactor make_factor(int j, double delta, std::int64_t N, double eps0, int l, double tau);

struct LedgerRow {
  int j = 0;
  std::int64_t N = 0;
  double norm_lower = 0.0, norm_upper = 0.0;
  double gamma = 0.0;          // tail fraction at the next N
  std::int64_t N_next = -1;    // -1 when the next floor leaves 64-bit range
  double cap = 0.0;            // exp(sum delta) exp(c sum delta^{r-1})
  double cap_alt = 0.0;        // same with exponent (r-1)/r
  double h0_lower = 0.0, h0_upper = 0.0;
  double h0_floor = 0.0;       // prod (1 - (1+eps0) delta)
  double rho = 0.0;
  AOStatus ao = AOStatus::CERTIFIED;
  double ao_ratio = 1.0;
  bool ok = true;
};

struct NormLedger {
  double r = 1.5;
  double c = 0.0;      // max_j log ||1-psi_j||_r / delta_j^{r-1}
  double c_alt = 0.0;  // exponent (r-1)/r
  std::vector<LedgerRow> rows;
  bool ok() const;
  nlohmann::json to_json() const;
};

struct DensityRun {
  Density h;
  std::vector<NormLedger> ledgers;  // one per r
  double support_budget = 0.0;      // sum (1 + 2 eps0) delta_j
  double gauge_sum = -1.0;          // sum g(delta_j) when built with a gauge
  bool ok() const;
};

DensityRun build_density(const DensitySpec& spec, int n_max);
DensityRun build_intersection_density(const DensitySpec& spec, const RefinementGauge& gauge, int n_max);

// delta_j = x0 2^{-j}, parsed from "geo:x0"; "exp" gives exp(-j); otherwise a comma list
std::vector<double> density_schedule(const std::string& s, int n);

}  // namespace uniqset

#endif
