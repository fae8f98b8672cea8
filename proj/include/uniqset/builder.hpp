// builder.hpp
// schedules, set assembly, entropy balance, block-mass certificates
#ifndef UNIQSET_BUILDER_HPP
#define UNIQSET_BUILDER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "uniqset/circle.hpp"
#include "uniqset/separation.hpp"
#include "uniqset/spectrum.hpp"

namespace uniqset {

enum class ScheduleRule { MAIN, HK, CUSTOM };
std::string to_string(ScheduleRule r);
ScheduleRule schedule_rule_from_string(const std::string& s);

struct ScheduleSpec {
  ScheduleRule rule = ScheduleRule::MAIN;
  double c = 0.0;  // <= 0 means auto: c = budget / (certified infinite sum per unit c)
  double a = 3.0;
  double budget = 0.1;
  int J = 10;
  double hk_q = 1.5;    // HK only
  double hk_eps = 0.1;  // HK only
  std::vector<double> custom;
  double kappa = 0.0;  // <= 0 means 2/log(pi)
};

struct Schedule {
  ScheduleSpec spec;
  double c = 0.0;
  double kappa = 0.0;
  std::vector<double> delta;
  double partial_sum = 0.0;    // sum_{j<=J} delta_j
  double infinite_upper = 0.0; // certified bound on the full series (MAIN, HK)
  bool budget_ok = true;

  nlohmann::json to_json() const;
};

struct GenerationParams {
  int j = 0;
  double delta = 0.0;
  int l = 2;
  std::int64_t M = 1;
  std::int64_t N = 0;
};

// sum_{j>=1} 1/(j log^a j) with the j=1 term replaced by the j=2 term, upper bound
double main_unit_sum_upper(double a);
double main_delta(double c, double a, int j);

Schedule build_schedule(const ScheduleSpec& spec);
std::vector<GenerationParams> generation_params(const Schedule& s);
int l_for(double delta, double kappa);
std::int64_t M_for(double delta);

struct UniquenessRun {
  Schedule schedule;
  std::vector<GenerationParams> gens;
  CompactSet E;
  SeparationResult sep;
  EntropyCertificate entropy;
  std::vector<double> entropy_terms;   // delta_j log(N_j/delta_j)
  std::vector<double> balance_terms;   // delta_j log(sum_{k<=j} (1/delta_k) log(1/delta_k))
  std::vector<double> balance_cap_terms;  // delta_j (log 4 + 3 log sum_{k<=j} M_k), >= entropy term
  bool balance_ok = true;
};

UniquenessRun assemble_uniqueness_set(const Schedule& s, std::size_t arc_cap = CompactSet::kDefaultArcCap);

// ---- test measures

enum class MeasureKind { RESTRICTED_LEBESGUE, ATOMIC, SMOOTHED_ATOMIC };
std::string to_string(MeasureKind k);

struct Atom {
  std::uint64_t k = 0;  // position k / 2^bits
  int bits = 40;
  double w = 1.0;
  double x() const;
};

class TestMeasure {
 public:
  MeasureKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double total_variation() const { return tv_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  // mu_hat(N m) for m = 0..M; err = per-coefficient error bound
  VecC block(std::int64_t N, std::int64_t M, double* err = nullptr) const;
  cplx coeff(std::int64_t n) const;

  static TestMeasure atomic(const CompactSet& E, std::vector<Atom> atoms, std::string name = "atomic");
  // atoms convolved with phi_{eta, l}; every [x - eta/2, x + eta/2] must lie in E
  static TestMeasure smoothed(const CompactSet& E, std::vector<Atom> atoms, double eta, int l,
                              std::string name = "smoothed");
  static TestMeasure restricted_lebesgue(const CompactSet& E, int spread = 16);

  double eta() const { return eta_; }
  int smooth_l() const { return l_; }
  double mass_of_E() const { return mE_; }

 private:
  MeasureKind kind_ = MeasureKind::ATOMIC;
  std::string name_;
  double tv_ = 1.0;
  std::vector<Atom> atoms_;
  double eta_ = 0.0;
  int l_ = 4;
  // restricted Lebesgue
  std::vector<double> ends_;
  std::vector<cplx> signs_;
  double mE_ = 1.0;
  int spread_ = 16;
};

// dyadic atoms drawn from a seeded generator, kept only if the eta-interval lies in E
std::vector<Atom> sample_atoms(const CompactSet& E, int count, double eta, std::uint64_t seed, int bits = 40);

// ---- certificates

struct BlockMassRow {
  int j = 0;
  double S = 0.0;            // sum_{0<|n|<=M_j} |mu_hat(N_j n)|, lower end
  double S_err = 0.0;
  double tail = 0.0;         // certified sum_{|n|>M_j} |phi_hat_{delta_j,l_j}(n)|
  double blocktail_bound = 0.0;  // 2 (l/delta) pi^-l/(l-1), the bound past l/delta
  double blocktail_measured = 0.0;
  bool mass_ok = true;       // S >= 1 - ||mu|| tail
  std::vector<double> holder_lhs, holder_rhs;  // per q
  bool holder_ok = true;
  std::vector<double> lq_partial;   // per q, running
  std::vector<double> reference;    // per q, running
  double annihilation = -1.0;       // residue, atomic measures only (-1 if not computed)
  double annihilation_trunc = 0.0;
};

struct BlockMassCertificate {
  std::string measure;
  std::vector<double> q;
  std::vector<BlockMassRow> rows;
  bool ok() const;
  double max_annihilation() const;
};

// sum_{|n|>M} |phi_hat_{delta,l}(n)|, direct to a truncation plus certificate tail
double phi_tail_beyond(double delta, int l, std::int64_t M, double tol = 1e-12);
double blocktail_bound(double delta, int l);

BlockMassCertificate block_mass_certificate(const std::vector<GenerationParams>& gens, const TestMeasure& mu,
                                            const std::vector<double>& q_list, bool annihilation = true,
                                            double annihilation_tol = 1e-8);

// |1 + sum_{n != 0} phi_hat(-n) mu_hat(N n)|; trunc receives the certified truncation bound
double annihilation_residue(const GenerationParams& g, const TestMeasure& mu, double tol, double* trunc = nullptr);

struct DivergenceRow {
  int J = 0;
  std::vector<double> partial;  // per q
};
struct DivergenceReport {
  std::vector<double> q;
  std::vector<DivergenceRow> rows;
  std::vector<double> growth_exponent;  // slope of log partial vs log J over the last two checkpoints
};
// reference partial sums sum_{j<=J} (delta_j / log(1/delta_j))^{q-1} at the checkpoints
DivergenceReport divergence_report(const Schedule& s, const std::vector<double>& q_list,
                                   const std::vector<int>& checkpoints);

// integral-test bound on sum_{j>J} delta_j log(sum_{k<=j} (1/delta_k) log(1/delta_k)), MAIN rule
double balance_tail_bound(double c, double a, int J);
// partial sum of the same series up to J
double balance_partial(double c, double a, int J);

}  // namespace uniqset

#endif
