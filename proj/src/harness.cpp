#include "uniqset/harness.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uniqset/builder.hpp"
#include "uniqset/bumps.hpp"
#include "uniqset/capacity.hpp"
#include "uniqset/density.hpp"
#include "uniqset/errors.hpp"
#include "uniqset/outer.hpp"
#include "uniqset/separation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace uniqset {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw ResourceError("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string clean_cell(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}
}  // namespace

std::string sha256_file(const std::string& path) { return sha256_hex(slurp(path)); }

std::string Table::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += clean_cell(r[i]);
    }
    out += '\n';
  };
  line(header_);
  for (auto& r : rows_) line(r);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::istringstream in(slurp(path));
  std::vector<std::vector<std::string>> rows;
  std::string ln;
  while (std::getline(in, ln)) {
    if (ln.empty()) continue;
    std::vector<std::string> r;
    std::string cell;
    std::istringstream ls(ln);
    while (std::getline(ls, cell, ',')) r.push_back(cell);
    if (!ln.empty() && ln.back() == ',') r.push_back("");
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---- run directory

RunWriter::RunWriter(std::string dir, std::string command, nlohmann::json config)
    : dir_(std::move(dir)), command_(std::move(command)), config_(std::move(config)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw ResourceError("cannot create run directory " + dir_ + ": " + ec.message());
}

void RunWriter::put(const std::string& name, const std::string& data) {
  std::string path = (fs::path(dir_) / name).string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot write " + path);
  out << data;
  out.close();
  for (auto& f : files_)
    if (f.first == name) {
      f.second = sha256_hex(data);
      return;
    }
  files_.emplace_back(name, sha256_hex(data));
}

void RunWriter::csv(const std::string& name, const Table& t) { put(name, t.str()); }
void RunWriter::json(const std::string& name, const nlohmann::json& j) { put(name, j.dump(2) + "\n"); }

namespace {
json versions() {
  json v;
  v["uniqset"] = kVersion;
#ifdef __VERSION__
  v["compiler"] = __VERSION__;
#endif
  v["cxx"] = static_cast<long>(__cplusplus);
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  v["openssl"] = OPENSSL_VERSION_TEXT;
  return v;
}
}  // namespace

nlohmann::json RunWriter::finish(nlohmann::json summary, bool ok) {
  summary["ok"] = ok;
  summary["command"] = command_;
  json("summary.json", summary);
  nlohmann::json m;
  m["command"] = command_;
  m["config"] = config_;
  m["versions"] = versions();
  nlohmann::json files = nlohmann::json::object();
  for (auto& f : files_) files[f.first] = f.second;
  m["files"] = files;
  m["ok"] = ok;
  put("manifest.json", m.dump(2) + "\n");
  files_.pop_back();  // the manifest does not list itself
  return m;
}

// ---- configs

const std::vector<std::string>& pipeline_names() {
  static const std::vector<std::string> v{"build", "density",   "capacity",       "outer",
                                          "separate", "blocks", "transfer", "asymmetry-demo"};
  return v;
}

json default_config(const std::string& cmd) {
  if (cmd == "build")
    return {{"rule", "main"},
            {"a", 3.0},
            {"c", "auto"},
            {"budget", 0.1},
            {"J", 30},
            {"kappa", "auto"},
            {"hk_q", 1.5},
            {"hk_eps", 0.1},
            {"custom", json::array()},
            {"q", {1.1, 1.5, 1.9}},
            {"checkpoints", json::array()},
            {"lebesgue", true},
            {"atomic_measures", 1},
            {"smoothed_measures", 3},
            {"atoms", 3},
            {"smoothed_eta", 1e-8},
            {"smoothed_l", 4},
            {"seed", 1},
            {"annihilation", true},
            {"annihilation_tol", 1e-8}};
  if (cmd == "separate")
    return {{"rule", "main"}, {"a", 3.0},   {"c", "auto"},         {"budget", 0.1},     {"J", 50},
            {"kappa", "auto"}, {"hk_q", 1.5}, {"hk_eps", 0.1},      {"custom", json::array()},
            {"strategy", "greedy"}, {"method", "auto"}};
  if (cmd == "blocks")
    return {{"kind", "phi_delta_l"}, {"l", 4},  {"delta", 0.1}, {"N", 1},
            {"eps0", 0.25},          {"K", -1}, {"G", 1 << 18}, {"oracle_K", 4096}, {"tail_K", 1000000}};
  if (cmd == "density")
    return {{"schedule", "geo:0.4"}, {"steps", 6},   {"r", {1.5}},   {"eps0", 0.25}, {"l", 16},
            {"tau", 1e-13},          {"N1", 1},      {"budget", 1.0}, {"gauge", false}, {"G", 1 << 16}};
  if (cmd == "capacity")
    return {{"p", {4.0}}, {"set", ""}, {"kat_eps", {0.5}}, {"kat_p", 4.0}, {"M_cap", 200}, {"smooth", 0.05}};
  if (cmd == "outer")
    return {{"omega", "1/log(2+n)"}, {"stages", 6},  {"delta", "geo:0.3:0.6"}, {"eps", "delta"},
            {"eta", 0.25},           {"G", 1 << 16}, {"absolute_gate", false},  {"ratio_n", 100000},
            {"grid_points", 256},    {"measure", true}};
  if (cmd == "transfer")
    return {{"phi", "(1+xi)^(-1)"}, {"measure", "lebesgue"}, {"set", ""},          {"xi_max", 100.0},
            {"grid", 10000},        {"n_check", 1000},       {"max_doubling", 64.0}, {"slack", 1e-3}};
  if (cmd == "asymmetry-demo")
    return {{"J", 12},          {"a", 3.0},           {"q", {1.1, 1.5, 1.9}}, {"density_steps", 6},
            {"r", {1.5}},       {"outer_stages", 4}, {"omega", "n^(-0.5)"},  {"G", 1 << 14},
            {"seed", 1}};
  throw ParameterError("unknown command: " + cmd);
}

namespace {
bool same_kind(const json& def, const json& v) {
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string() || v.is_number();  // "auto" or a number
  if (def.is_array()) return v.is_array() || v.is_number();
  return def.type() == v.type();
}
}  // namespace

json merge_config(const std::string& cmd, const json& user) {
  json cfg = default_config(cmd);
  if (user.is_null()) return cfg;
  if (!user.is_object()) throw ParameterError("config must be a JSON object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (!cfg.contains(it.key())) throw ParameterError(cmd + ": unknown config key '" + it.key() + "'");
    const json& def = cfg[it.key()];
    if (!same_kind(def, it.value()))
      throw ParameterError(cmd + ": config key '" + it.key() + "' expects " + std::string(def.type_name()) +
                           ", got " + it.value().type_name());
    if (def.is_array() && it.value().is_number())
      cfg[it.key()] = json::array({it.value()});
    else if (def.is_number_integer() && it.value().is_number_float()) {
      double d = it.value().get<double>();
      if (d != std::floor(d)) throw ParameterError(cmd + ": config key '" + it.key() + "' expects an integer");
      cfg[it.key()] = static_cast<std::int64_t>(d);
    } else
      cfg[it.key()] = it.value();
  }
  return cfg;
}

namespace {

double num_or_auto(const json& v) {
  if (v.is_number()) return v.get<double>();
  std::string s = v.get<std::string>();
  if (s == "auto") return 0.0;
  try {
    return std::stod(s);
  } catch (...) {
    throw ParameterError("expected a number or \"auto\", got " + s);
  }
}

std::vector<double> dvec(const json& v) { return v.get<std::vector<double>>(); }

std::string qname(double q) {
  std::ostringstream s;
  s << q;
  return s.str();
}

ScheduleSpec schedule_spec(const json& c) {
  ScheduleSpec sp;
  sp.rule = schedule_rule_from_string(c["rule"].get<std::string>());
  sp.a = c["a"].get<double>();
  sp.c = num_or_auto(c["c"]);
  sp.budget = c["budget"].get<double>();
  sp.J = c["J"].get<int>();
  sp.kappa = num_or_auto(c["kappa"]);
  sp.hk_q = c["hk_q"].get<double>();
  sp.hk_eps = c["hk_eps"].get<double>();
  sp.custom = dvec(c["custom"]);
  return sp;
}

// "geo:a:r" -> a r^{j-1}; otherwise a comma list
std::vector<double> list_schedule(const std::string& s, int n) {
  std::vector<double> out;
  if (s.rfind("geo:", 0) == 0) {
    auto rest = s.substr(4);
    auto colon = rest.find(':');
    if (colon == std::string::npos) throw ParameterError("schedule: expected geo:a:r, got " + s);
    double a = std::stod(rest.substr(0, colon)), r = std::stod(rest.substr(colon + 1));
    for (int j = 0; j < n; ++j) out.push_back(a * std::pow(r, j));
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  if (static_cast<int>(out.size()) < n) throw ParameterError("schedule: list shorter than the stage count");
  out.resize(n);
  return out;
}

// ---- build

struct BuildOut {
  json summary;
  UniquenessRun run;
};

BuildOut run_build(const json& c, RunWriter& w, bool with_measures) {
  BuildOut out;
  json& sum = out.summary;
  bool ok = true;
  Schedule s = build_schedule(schedule_spec(c));
  out.run = assemble_uniqueness_set(s);
  UniquenessRun& run = out.run;
  auto q = dvec(c["q"]);

  Table gens({"j", "delta", "l", "M", "N", "entropy_term", "tail", "balance_term", "balance_cap_term"});
  for (std::size_t i = 0; i < run.gens.size(); ++i) {
    auto& g = run.gens[i];
    gens.row(g.j, g.delta, g.l, g.M, g.N, run.entropy_terms[i], phi_tail_beyond(g.delta, g.l, g.M),
             run.balance_terms[i], run.balance_cap_terms[i]);
  }
  w.csv("generations.csv", gens);
  w.json("set.json", run.E.to_json());
  json ent = run.entropy.to_json();
  ent["terms"] = run.entropy_terms;
  ent["balance_terms"] = run.balance_terms;
  ent["balance_cap_terms"] = run.balance_cap_terms;
  ent["balance_ok"] = run.balance_ok;
  if (s.spec.rule == ScheduleRule::MAIN) {
    ent["balance_partial"] = balance_partial(s.c, s.spec.a, s.spec.J);
    // the integral test needs log J >= e; below that, add the terms up to J = 16 exactly
    const int J0 = std::max(s.spec.J, 16);
    ent["balance_tail_bound"] = balance_tail_bound(s.c, s.spec.a, J0) + balance_partial(s.c, s.spec.a, J0) -
                                balance_partial(s.c, s.spec.a, s.spec.J);
  }
  w.json("entropy.json", ent);

  std::vector<int> cps = c.contains("checkpoints") ? c["checkpoints"].get<std::vector<int>>() : std::vector<int>{};
  if (cps.empty())
    for (int j = 1; j <= s.spec.J; ++j) cps.push_back(j);
  auto div = divergence_report(s, q, cps);
  std::vector<std::string> dh{"J"};
  for (double x : q) dh.push_back("partial_q" + qname(x));
  Table dt(dh);
  for (auto& r : div.rows) {
    std::vector<std::string> row{std::to_string(r.J)};
    for (double v : r.partial) row.push_back(fmt(v));
    dt.row_vec(row);
  }
  w.csv("divergence.csv", dt);

  DisjointReport dis = check_disjoint(run.sep);
  bool sep_ok = dis.ok && run.sep.all_bounds_ok();
  sum["schedule"] = s.to_json();
  sum["entropy"] = run.entropy.to_json();
  sum["balance_ok"] = run.balance_ok;
  sum["separation_ok"] = sep_ok;
  sum["disjoint_method"] = dis.method;
  sum["divergence_growth"] = div.growth_exponent;
  sum["measure_lower"] = run.E.measure_lower();
  ok = sep_ok && run.entropy.ok && run.balance_ok && s.budget_ok;

  if (with_measures) {
    std::vector<TestMeasure> mus;
    json skipped = json::array();
    if (c["lebesgue"].get<bool>()) {
      if (run.E.realizable())
        mus.push_back(TestMeasure::restricted_lebesgue(run.E));
      else
        skipped.push_back("restricted_lebesgue: E not realizable under the arc cap");
    }
    std::uint64_t seed = c["seed"].get<std::uint64_t>();
    int natoms = c["atoms"].get<int>();
    for (int i = 0; i < c["atomic_measures"].get<int>(); ++i)
      mus.push_back(TestMeasure::atomic(run.E, sample_atoms(run.E, natoms, 0.0, seed + 100 + i),
                                        "atomic" + std::to_string(i + 1)));
    double eta = c["smoothed_eta"].get<double>();
    int sl = c["smoothed_l"].get<int>();
    for (int i = 0; i < c["smoothed_measures"].get<int>(); ++i)
      mus.push_back(TestMeasure::smoothed(run.E, sample_atoms(run.E, natoms, eta, seed + 200 + i), eta, sl,
                                          "smoothed" + std::to_string(i + 1)));

    std::vector<std::string> ch{"measure", "kind", "j", "S", "S_err", "tail", "mass_ok", "holder_ok", "annihilation"};
    for (double x : q) ch.push_back("holder_lhs_q" + qname(x));
    for (double x : q) ch.push_back("holder_rhs_q" + qname(x));
    for (double x : q) ch.push_back("lq_partial_q" + qname(x));
    Table ct(ch);
    json certs = json::array();
    bool ann = c["annihilation"].get<bool>();
    double ann_tol = c["annihilation_tol"].get<double>();
    for (auto& mu : mus) {
      bool do_ann = ann && mu.kind() == MeasureKind::ATOMIC;
      auto cert = block_mass_certificate(run.gens, mu, q, do_ann, ann_tol);
      for (auto& r : cert.rows) {
        std::vector<std::string> row{mu.name(), to_string(mu.kind()), std::to_string(r.j), fmt(r.S), fmt(r.S_err),
                                     fmt(r.tail), Table::cell(r.mass_ok), Table::cell(r.holder_ok),
                                     fmt(r.annihilation)};
        for (double v : r.holder_lhs) row.push_back(fmt(v));
        for (double v : r.holder_rhs) row.push_back(fmt(v));
        for (double v : r.lq_partial) row.push_back(fmt(v));
        ct.row_vec(row);
      }
      bool ann_ok = !do_ann || cert.max_annihilation() < 1e-6;
      certs.push_back({{"measure", mu.name()},
                       {"kind", to_string(mu.kind())},
                       {"ok", cert.ok()},
                       {"max_annihilation", cert.max_annihilation()},
                       {"annihilation_ok", ann_ok}});
      ok = ok && cert.ok() && ann_ok;
    }
    w.csv("certificate.csv", ct);
    sum["certificates"] = certs;
    sum["skipped"] = skipped;
  }
  sum["ok"] = ok;
  return out;
}

// ---- separate

json run_separate(const json& c, RunWriter& w) {
  Schedule s = build_schedule(schedule_spec(c));
  auto gens = generation_params(s);
  std::vector<std::int64_t> Ms;
  for (auto& g : gens) Ms.push_back(g.M);
  std::string strat = c["strategy"].get<std::string>();
  SeparationResult r;
  if (strat == "greedy")
    r = greedy_select(Ms);
  else if (strat == "prime")
    r = prime_select(Ms);
  else
    throw ParameterError("separate: strategy must be greedy or prime");
  std::string m = c["method"].get<std::string>();
  DisjointMethod meth = m == "exhaustive" ? DisjointMethod::EXHAUSTIVE
                        : m == "pairwise" ? DisjointMethod::PAIRWISE
                        : m == "auto"     ? DisjointMethod::AUTO
                                          : throw ParameterError("separate: method must be auto/exhaustive/pairwise");
  auto d = check_disjoint(r, meth);
  Table t({"j", "M", "N", "bound", "bound_ok", "growth", "strategy"});
  for (std::size_t i = 0; i < r.Ns.size(); ++i)
    t.row(static_cast<int>(i + 1), r.Ms[i], r.Ns[i], i < r.bounds.size() ? r.bounds[i] : std::nan(""),
          i < r.bound_ok.size() ? static_cast<bool>(r.bound_ok[i]) : true,
          i < r.growth.size() ? r.growth[i] : std::nan(""), to_string(r.strategy));
  w.csv("separation.csv", t);
  bool ok = d.ok && r.all_bounds_ok();
  json sum{{"strategy", to_string(r.strategy)},
           {"J", r.Ns.size()},
           {"disjoint", d.ok},
           {"disjoint_method", d.method},
           {"bounds_ok", r.all_bounds_ok()}};
  if (!d.ok) sum["collision"] = {{"i", d.i + 1}, {"j", d.j + 1}, {"value", d.value}};
  sum["ok"] = ok;
  return sum;
}


// ---- blocks

bool smooth_kind(BumpKind k) { return k != BumpKind::PSI_INDICATOR; }

json run_blocks(const json& c, RunWriter& w) {
  json bj{{"kind", c["kind"]}, {"l", c["l"]}, {"delta", c["delta"]}, {"N", c["N"]}, {"eps0", c["eps0"]}};
  BumpSpec spec = BumpSpec::from_json(bj);
  std::int64_t K = c["K"].get<std::int64_t>();
  if (K < 0) K = default_truncation(spec.l, spec.delta) * std::max<std::int64_t>(1, spec.N);
  if (K > 4'000'000) throw ResourceError("blocks: truncation above 4e6, pass K explicitly");
  auto seq = bump_spectrum(spec, K);
  Table t({"n", "re", "im"});
  for (std::int64_t n = -K; n <= K; ++n) t.row(n, seq[n].real(), seq[n].imag());
  w.csv("spectrum.csv", t);

  json sum{{"spec", spec.to_json()}, {"K", K}};
  if (seq.tail) sum["tail"] = {{"C", seq.tail->C}, {"beta", seq.tail->beta}};
  bool ok = true;

  // oracle: FFT of exact grid samples against the aliased closed form
  const std::int64_t G = c["G"].get<std::int64_t>();
  if (smooth_kind(spec.kind)) {
    auto o = fft_oracle(spec, G, c["oracle_K"].get<std::int64_t>());
    sum["oracle"] = o.to_json();
    ok = ok && o.max_abs_diff < 1e-8 && o.excess < 1e-12 && o.max_off_NZ < 1e-10;
  } else {
    sum["oracle"] = "skipped: indicator spectra have no summable alias tail";
  }
  if (spec.kind == BumpKind::PHI_DELTA_L) {
    const std::int64_t TK = c["tail_K"].get<std::int64_t>();
    std::int64_t n0 = static_cast<std::int64_t>(std::floor(spec.l / spec.delta + 1e-9));
    double meas = 0.0;
    for (std::int64_t n = n0 + 1; n <= TK; ++n) meas += std::fabs(phi_delta_l_coeff(spec.delta, spec.l, n));
    meas *= 2.0;
    double b = blocktail_bound(spec.delta, spec.l);
    sum["blocktail"] = {{"measured", meas}, {"bound", b}, {"ratio", meas / b}, {"K", TK}};
    ok = ok && meas <= b;
  }
  w.json("spectrum.json", sum);
  sum["ok"] = ok;
  return sum;
}

// ---- density

struct DensityOut {
  json summary;
  DensityRun run;
};

DensityOut run_density(const json& c, RunWriter& w) {
  DensitySpec s;
  const int steps = c["steps"].get<int>();
  s.delta = density_schedule(c["schedule"].get<std::string>(), steps);
  s.eps0 = c["eps0"].get<double>();
  s.l = c["l"].get<int>();
  s.tau = c["tau"].get<double>();
  s.r_list = dvec(c["r"]);
  s.N1 = c["N1"].get<std::int64_t>();
  s.budget = c["budget"].get<double>();
  DensityOut out;
  out.run = c["gauge"].get<bool>() ? build_intersection_density(s, RefinementGauge{}, steps) : build_density(s, steps);
  auto& run = out.run;

  Table t({"r", "j", "N", "norm_lower", "norm_upper", "gamma", "N_next", "cap", "cap_alt", "h0_lower", "h0_upper",
           "h0_floor", "rho", "ao", "ao_ratio", "ok"});
  json led = json::array();
  for (auto& L : run.ledgers) {
    for (auto& r : L.rows)
      t.row(L.r, r.j, r.N, r.norm_lower, r.norm_upper, r.gamma, r.N_next, r.cap, r.cap_alt, r.h0_lower, r.h0_upper,
            r.h0_floor, r.rho, to_string(r.ao), r.ao_ratio, r.ok);
    led.push_back(L.to_json());
  }
  w.csv("ledger.csv", t);
  w.json("density.json", {{"ledgers", led}, {"support_budget", run.support_budget}, {"gauge_sum", run.gauge_sum}});

  // grid check of h: range and vanishing on the removed arcs
  const std::int64_t G = c["G"].get<std::int64_t>();
  VecR v = run.h.samples(G);
  CompactSet supp = run.h.support_set();
  double off = 0.0;
  std::int64_t outside = 0;
  for (std::int64_t k = 0; k < G; ++k)
    if (!supp.contains_grid(k, G)) {
      ++outside;
      off = std::max(off, std::fabs(v[k]));
    }
  bool grid_ok = v.minCoeff() >= -1e-12 && v.maxCoeff() <= 1.0 + 1e-12 && off < 1e-12;
  json& sum = out.summary;
  sum["steps"] = run.h.steps();
  sum["support_budget"] = run.support_budget;
  sum["grid"] = {{"G", G}, {"min", v.minCoeff()}, {"max", v.maxCoeff()}, {"max_on_removed", off}, {"removed_points", outside}};
  json per = json::array();
  for (auto& L : run.ledgers) per.push_back({{"r", L.r}, {"c", L.c}, {"c_alt", L.c_alt}, {"ok", L.ok()}});
  sum["ledgers"] = per;
  auto h0 = run.h.h0();
  sum["h0"] = {h0.lo, h0.hi};
  sum["ok"] = run.ok() && grid_ok;
  return out;
}

// ---- capacity

json run_capacity(const json& c, RunWriter& w) {
  auto ps = dvec(c["p"]);
  std::string set_path = c["set"].get<std::string>();
  json sum;
  bool ok = true;
  std::vector<NamedWitness> cands;
  CompactSet E;
  if (!set_path.empty()) {
    E = CompactSet::from_json(json::parse(slurp(set_path)));
    sum["set"] = set_path;
  } else {
    double kp = c["kat_p"].get<double>();
    std::vector<KatResult> stages;
    json kj = json::array();
    for (double e : dvec(c["kat_eps"])) {
      stages.push_back(kat_scheme(e, kp, c["M_cap"].get<int>(), c["smooth"].get<double>()));
      kj.push_back(stages.back().to_json());
      ok = ok && stages.back().ok;
    }
    w.json("kat.json", kj);
    std::vector<Generation> g;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      for (auto x : stages[i].E.generations()) g.push_back(x);
      cands.push_back({"kat" + std::to_string(i + 1), stages[i].witness});
    }
    E = CompactSet(g);
    auto trend = capacity_zero_trend(stages, kp);
    Table tt({"J", "p", "upper", "measure_lower"});
    bool mono = true;
    for (std::size_t i = 0; i < trend.size(); ++i) {
      tt.row(trend[i].J, kp, trend[i].upper, trend[i].measure_lower);
      if (i > 0 && !(trend[i].upper < trend[i - 1].upper)) mono = false;
    }
    w.csv("trend.csv", tt);
    sum["trend_decreasing"] = mono;
    sum["kat"] = json::array();
    for (auto& s : stages)
      sum["kat"].push_back({{"eps", s.eps}, {"M", s.M}, {"norm_upper", s.norm.upper}, {"measure_lower", s.measure_lower},
                            {"ok", s.ok}});
    ok = ok && mono;
  }
  Table t({"p", "q", "lower", "upper", "lower_witness", "upper_witness", "sandwich_ok"});
  for (double p : ps) {
    auto est = estimate_capacity(E, p, cands);
    t.row(est.p, est.q, est.lower, est.upper, est.lower_witness, est.upper_witness, est.sandwich_ok());
    ok = ok && est.sandwich_ok();
  }
  w.csv("capacity.csv", t);
  sum["ok"] = ok;
  return sum;
}

// ---- outer

json run_outer(const json& c, RunWriter& w) {
  const int n = c["stages"].get<int>();
  OuterConfig oc;
  oc.delta = list_schedule(c["delta"].get<std::string>(), n);
  std::string es = c["eps"].is_number() ? fmt(c["eps"].get<double>()) : c["eps"].get<std::string>();
  if (es != "delta") {
    char* end = nullptr;
    double v = std::strtod(es.c_str(), &end);
    oc.eps = (end && *end == '\0') ? std::vector<double>(n, v) : list_schedule(es, n);
  }
  oc.eta = c["eta"].get<double>();
  oc.G = c["G"].get<std::int64_t>();
  auto om = OmegaGauge::parse(c["omega"].get<std::string>());
  if (!om.check_decreasing()) throw PreconditionError("outer: omega must be positive and nonincreasing");
  auto st = build_outer_stages(oc, om);
  const bool absolute = c["absolute_gate"].get<bool>();

  Table t({"j", "delta", "eps", "N", "log_N", "a1_lower", "a1_upper", "offarc_sup", "weighted_lower",
           "weighted_upper", "F0", "gate", "gate_ok", "ok"});
  bool ok = true;
  json stj = json::array();
  for (auto& s : st) {
    bool gate_ok = absolute ? s.weighted.hi <= s.gate : s.gate_ok;
    bool sok = gate_ok && s.F.ok();
    ok = ok && sok;
    t.row(s.j, s.delta, s.eps, s.N.fits_int64 ? std::to_string(s.N.N64) : std::string(""), s.N.log_N, s.F.a1.lower,
          s.F.a1.upper, s.F.offarc_sup, s.weighted.lo, s.weighted.hi, s.F.F0, s.gate, gate_ok, sok);
    json sj = s.F.to_json();
    sj["j"] = s.j;
    sj["N"] = s.N.to_json();
    sj["weighted"] = {s.weighted.lo, s.weighted.hi};
    sj["gate_ok"] = gate_ok;
    stj.push_back(sj);
  }
  w.csv("stages.csv", t);
  w.json("outer.json", stj);

  std::vector<TestMeasure> mus;
  if (c["measure"].get<bool>()) {
    CompactSet full;
    std::vector<Atom> atoms{{1ull << 38, 40, 0.6}, {3ull << 37, 40, -0.4}};
    mus.push_back(TestMeasure::smoothed(full, atoms, 0.05, 4, "smoothed2"));
  }
  std::vector<const TestMeasure*> mp;
  for (auto& m : mus) mp.push_back(&m);
  auto rep = sa_certificate(st, om, mp, {0, 1, 2}, c["ratio_n"].get<std::int64_t>(), c["grid_points"].get<int>());
  w.json("sa.json", rep.to_json());
  Table at({"j", "measure", "N", "value", "bound"});
  for (auto& r : rep.annihilation) at.row(r.j, r.measure, r.N, r.value, r.bound);
  w.csv("annihilation.csv", at);
  for (auto& r : rep.annihilation) ok = ok && r.value <= r.bound * (1.0 + 1e-9) + 1e-12;
  ok = ok && rep.ok();
  json sum{{"omega", om.expr()},
           {"stages", st.size()},
           {"gate_mode", absolute ? "absolute" : "relative"},
           {"sa_ok", rep.ok()},
           {"weighted_upper", rep.weighted_upper},
           {"sup_offarc", rep.sup_offarc}};
  sum["ok"] = ok;
  return sum;
}

// ---- transfer

json run_transfer(const json& c, RunWriter& w) {
  auto phi = OmegaGauge::parse(c["phi"].get<std::string>());
  std::string m = c["measure"].get<std::string>();
  LineMeasure mu;
  if (m == "lebesgue") {
    mu = LineMeasure::lebesgue01();
  } else if (m == "set") {
    std::string path = c["set"].get<std::string>();
    if (path.empty()) throw ParameterError("transfer: measure=set needs a set path");
    CompactSet E = CompactSet::from_json(json::parse(slurp(path)));
    for (auto& pc : E.complement().complement().pieces()) mu.pieces.push_back(pc);
  } else if (m.rfind("atom:", 0) == 0) {
    mu.atoms.push_back({std::stod(m.substr(5)), 1.0});
  } else {
    throw ParameterError("transfer: measure must be lebesgue, set or atom:x");
  }
  json sum{{"phi", phi.expr()}, {"measure", m}};
  try {
    auto r = kahane_transfer(mu, phi, c["xi_max"].get<double>(), c["grid"].get<std::int64_t>(),
                             c["n_check"].get<std::int64_t>(), c["max_doubling"].get<double>(),
                             c["slack"].get<double>());
    Table t({"xi", "ratio"});
    for (std::size_t i = 0; i < r.xi.size(); ++i) t.row(r.xi[i], r.ratio[i]);
    w.csv("transfer.csv", t);
    json rj = r.to_json();
    rj.erase("xi");
    rj.erase("ratio");
    sum["result"] = rj;
    sum["ok"] = r.violations == 0;
  } catch (const PreconditionError& e) {
    sum["refused"] = e.what();
    sum["ok"] = false;
  }
  return sum;
}

// ---- demo

json run_demo(const json& c, RunWriter& w) {
  json bc = default_config("build");
  bc["J"] = c["J"];
  bc["a"] = c["a"];
  bc["q"] = c["q"];
  bc["seed"] = c["seed"];
  bc["smoothed_measures"] = 1;
  auto b = run_build(bc, w, true);

  json dc = default_config("density");
  dc["steps"] = c["density_steps"];
  dc["r"] = c["r"];
  auto d = run_density(dc, w);

  json oc = default_config("outer");
  oc["stages"] = c["outer_stages"];
  oc["omega"] = c["omega"];
  oc["G"] = c["G"];
  auto o = run_outer(oc, w);

  // side by side: forced block mass on the one hand, bounded densities and vanishing pairings on the other
  json uniq{{"set_measure_lower", b.run.E.measure_lower()},
             {"entropy", b.summary["entropy"]},
             {"divergence_growth", b.summary["divergence_growth"]},
             {"certificates", b.summary["certificates"]},
             {"ok", b.summary["ok"]}};
  json nonuniq{{"density", d.summary}, {"outer", o}, {"ok", d.summary["ok"].get<bool>() && o["ok"].get<bool>()}};
  json demo{{"uniqueness", uniq}, {"non_uniqueness", nonuniq}};
  w.json("demo.json", demo);
  demo["ok"] = b.summary["ok"].get<bool>() && nonuniq["ok"].get<bool>();
  return demo;
}

}  // namespace

RunResult run_pipeline(const std::string& command, const json& user_config, const std::string& out_dir) {
  json cfg = merge_config(command, user_config);
  RunWriter w(out_dir, command, cfg);
  json sum;
  try {
    if (command == "build")
      sum = run_build(cfg, w, true).summary;
    else if (command == "separate")
      sum = run_separate(cfg, w);
    else if (command == "blocks")
      sum = run_blocks(cfg, w);
    else if (command == "density")
      sum = run_density(cfg, w).summary;
    else if (command == "capacity")
      sum = run_capacity(cfg, w);
    else if (command == "outer")
      sum = run_outer(cfg, w);
    else if (command == "transfer")
      sum = run_transfer(cfg, w);
    else if (command == "asymmetry-demo")
      sum = run_demo(cfg, w);
    else
      throw ParameterError("unknown command: " + command);
  } catch (const Error& e) {
    sum = {{"error", command + ": " + e.what()}, {"ok", false}};
  }
  bool ok = sum.value("ok", false);
  RunResult r;
  r.ok = ok;
  r.dir = out_dir;
  r.manifest = w.finish(sum, ok);
  r.summary = sum;
  r.summary["ok"] = ok;
  return r;
}

// ---- plot data

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> v{"lq_partial", "entropy_terms", "ledger", "capacity_trend", "outer_decay"};
  return v;
}

namespace {
struct Csv {
  std::vector<std::string> head;
  std::vector<std::vector<std::string>> rows;
  int col(const std::string& name) const {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return static_cast<int>(i);
    throw PreconditionError("plotdata: column " + name + " missing");
  }
};

Csv load(const std::string& dir, const std::string& name) {
  std::string path = (fs::path(dir) / name).string();
  if (!fs::exists(path)) throw PreconditionError("plotdata: run directory has no " + name);
  auto all = read_csv(path);
  Csv c;
  if (all.empty()) throw PreconditionError("plotdata: empty " + name);
  c.head = all[0];
  c.rows.assign(all.begin() + 1, all.end());
  return c;
}
}  // namespace

std::string plotdata(const std::string& run_dir, const std::string& kind) {
  Table out({"x", "y", "series"});
  if (kind == "lq_partial") {
    // reference partial sums per q over the recorded J
    Csv c = load(run_dir, "divergence.csv");
    for (std::size_t i = 1; i < c.head.size(); ++i) {
      std::string q = c.head[i].substr(c.head[i].find("_q") + 2);
      for (auto& r : c.rows) out.row_vec({r[0], r[i], "q=" + q});
    }
  } else if (kind == "entropy_terms") {
    Csv c = load(run_dir, "generations.csv");
    int j = c.col("j");
    for (const char* s : {"entropy_term", "balance_cap_term"}) {
      int k = c.col(s);
      for (auto& r : c.rows) out.row_vec({r[j], r[k], s});
    }
  } else if (kind == "ledger") {
    Csv c = load(run_dir, "ledger.csv");
    int j = c.col("j"), y = c.col("norm_upper"), r = c.col("r");
    for (auto& row : c.rows) out.row_vec({row[j], row[y], "r=" + row[r]});
  } else if (kind == "capacity_trend") {
    Csv c = load(run_dir, "trend.csv");
    int J = c.col("J"), y = c.col("upper"), p = c.col("p");
    for (auto& row : c.rows) out.row_vec({row[J], row[y], "p=" + row[p]});
  } else if (kind == "outer_decay") {
    Csv c = load(run_dir, "stages.csv");
    int j = c.col("j");
    for (const char* s : {"weighted_upper", "offarc_sup", "gate"}) {
      int k = c.col(s);
      for (auto& r : c.rows) out.row_vec({r[j], r[k], s});
    }
  } else {
    throw ParameterError("plotdata: unknown kind " + kind);
  }
  return out.str();
}

}  // namespace uniqset
