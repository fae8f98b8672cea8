// capacity.hpp
// two-sided l^p Fourier capacity estimates: primal witnesses equal to 1 on E,
// dual densities supported in E
#ifndef UNIQSET_CAPACITY_HPP
#define UNIQSET_CAPACITY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "uniqset/circle.hpp"
#include "uniqset/spectrum.hpp"

namespace uniqset {

// g(N t) with g = delta^{-1} 1_{I(delta)} (smooth = 0), or the mollified
// profile delta'^{-1} 1_{I(delta')} * phi_{s delta, l}, delta' = (1-s) delta, still supported in I(delta)
struct DilatedTerm {
  double w = 1.0;
  std::int64_t N = 1;
  double delta = 0.1;
  double smooth = 0.0;
  int l = 4;
  double profile_coeff(double m) const;  // g_hat(m), g_hat(0) = 1
  double decay_const() const;            // |g_hat(m)| <= decay_const / |m|
};

struct DilatedIndicatorSum {
  std::vector<DilatedTerm> terms;
  double coeff(std::int64_t n) const;  // includes n = 0
  double weight_sum() const;
  DecayCertificate certificate() const;  // for n != 0, beta = 1
  SpectralSequence spectrum(std::int64_t K) const;
  double value(double t) const;  // only meaningful for smooth terms or off arc endpoints
  nlohmann::json to_json() const;
};

// (sum_{n != 0} |f_hat(n)|^p)^{1/p}: exact sum to a cut, overlaps at common
// multiples handled exactly, tail through the 1/|m| bound
NormResult nonzero_ap_norm(const DilatedIndicatorSum& f, double p, double tol = 1e-10);

// ||1_{I(delta)}||_{A_p}, certified
NormResult indicator_norm(double delta, double p);
// C with ||1_{I(delta)}||_{A_p} <= C delta^{1 - 1/p} for all delta in (0,1)
double indicator_norm_constant(double p);

struct KatResult {
  double eps = 0.5, p = 4.0;
  int M = 0;
  double delta = 0.0;
  std::vector<std::int64_t> Ns;
  std::int64_t significant_max = 0;  // blocks N_j [1, Ms] are pairwise disjoint
  DilatedIndicatorSum f;             // f_M = (1/M) sum psi_{delta, N_j}
  NormResult norm;                   // ||f_M - 1||_{A_p}
  double katz_bound = 0.0;           // 2 M^{1/p-1} delta^{-1} ||1_I||_p
  DilatedIndicatorSum witness;       // mollified version, continuous
  NormResult witness_norm;
  CompactSet E;
  double measure_lower = 0.0;
  bool ok = false;
  nlohmann::json to_json() const;
};

// smallest M (<= M_cap) with ||f_M - 1||_{A_p} <= eps; best attempt if none
KatResult kat_scheme(double eps, double p, int M_cap = 200, double smooth = 0.05, double theta_factor = 0.1);

// witness phi = 1 - f with f_hat(0) = 1; phi = 1 on E checked structurally:
// each term's arcs must lie in the removed set of E
bool witness_vanishes_on(const CompactSet& E, const DilatedIndicatorSum& f);
NormResult primal_upper(const CompactSet& E, double p, const DilatedIndicatorSum& f);
// generic witness: phi = 1 on E checked on a grid within 1e-9 (plus synthesis error)
NormResult primal_upper(const CompactSet& E, double p, const SpectralSequence& phi, std::int64_t G = 1 << 16);

// dual witnesses: nonnegative combinations of translated phi_{width, l} bumps
struct BumpPlacement {
  double x0 = 0.5;
  double width = 0.1;
  int l = 4;
  double c = 1.0;
};
struct DualWitness {
  std::vector<BumpPlacement> bumps;
  std::string id;
  bool supported_in(const CompactSet& E) const;
  double mass() const;  // g_hat(0)
};
// |g_hat(0)| / ||g||_{A_q, upper}; throws SupportViolation if supp g is not in E
double dual_lower(const CompactSet& E, double q, const DualWitness& g, std::int64_t K = 200000);
// closed components of E, longest first (full circle: one component of length 1)
std::vector<Arc> set_components(const CompactSet& E);

struct CapacityEstimate {
  double p = 4.0, q = 4.0 / 3.0;
  double lower = 0.0, upper = 1.0;
  std::string lower_witness, upper_witness;
  bool sandwich_ok() const { return lower <= upper * (1.0 + 1e-12); }
  nlohmann::json to_json() const;
};

struct NamedWitness {
  std::string id;
  DilatedIndicatorSum f;
};
// upper from phi = 1 and every admissible candidate; lower from single and multi-bump densities
CapacityEstimate estimate_capacity(const CompactSet& E, double p, const std::vector<NamedWitness>& candidates = {});

struct TrendRow {
  int J = 0;
  double upper = 1.0;
  double measure_lower = 0.0;
  std::vector<double> lambda;  // convex weights on the stage witnesses
};
// nested sets E_J = cap_{s<=J} E(stage s); witnesses are convex combinations of stage witnesses
std::vector<TrendRow> capacity_zero_trend(const std::vector<KatResult>& stages, double p, bool smoothed = true);

}  // namespace uniqset

#endif
