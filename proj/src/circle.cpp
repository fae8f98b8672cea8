#include "uniqset/circle.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "uniqset/errors.hpp"

namespace uniqset {

double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;
}

double dist_to_int(double x) {
  double f = frac(x);
  return std::min(f, 1.0 - f);
}

bool Arc::contains(double t) const {
  if (length >= 1.0) return true;
  return dist_to_int(t - center) < 0.5 * length;
}

ArcUnion ArcUnion::from_pieces(std::vector<Piece> pieces, double tol) {
  std::sort(pieces.begin(), pieces.end());
  ArcUnion u;
  for (auto& p : pieces) {
    if (p.second <= p.first) continue;
    if (!u.pieces_.empty() && p.first <= u.pieces_.back().second + tol) {
      u.pieces_.back().second = std::max(u.pieces_.back().second, p.second);
    } else {
      u.pieces_.push_back(p);
    }
  }
  return u;
}

ArcUnion ArcUnion::from_arcs(const std::vector<Arc>& arcs, double tol) {
  std::vector<Piece> ps;
  ps.reserve(arcs.size() + 2);
  for (const Arc& a : arcs) {
    if (!(a.length > 0.0)) throw ParameterError("arc length must be positive");
    if (a.length >= 1.0) {
      ps.emplace_back(0.0, 1.0);
      continue;
    }
    double l = frac(a.left());
    double r = l + a.length;
    if (r <= 1.0) {
      ps.emplace_back(l, r);
    } else {
      ps.emplace_back(l, 1.0);
      ps.emplace_back(0.0, r - 1.0);
    }
  }
  return from_pieces(std::move(ps), tol);
}

double ArcUnion::measure() const {
  double s = 0.0;
  for (auto& p : pieces_) s += p.second - p.first;
  return std::min(s, 1.0);
}

bool ArcUnion::contains(double t) const {
  t = frac(t);
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const Piece& p) { return v < p.first; });
  if (it != pieces_.begin()) {
    --it;
    if (t > it->first && t < it->second) return true;
    // a piece starting at 0 may be the tail of a wrapping arc
    if (t == 0.0 && it->first == 0.0 && !pieces_.empty() && pieces_.back().second >= 1.0) return true;
  }
  return false;
}

std::vector<Arc> ArcUnion::components() const {
  std::vector<Arc> out;
  if (pieces_.empty()) return out;
  if (pieces_.size() == 1 && pieces_[0].first <= 0.0 && pieces_[0].second >= 1.0) {
    out.push_back({0.5, 1.0});
    return out;
  }
  std::size_t b = 0, e = pieces_.size();
  bool wrap = pieces_.size() > 1 && pieces_.front().first <= kMergeTol &&
              pieces_.back().second >= 1.0 - kMergeTol;
  if (wrap) {
    double l = pieces_.back().first - 1.0, r = pieces_.front().second;
    out.push_back({frac(0.5 * (l + r)), r - l});
    b = 1;
    e -= 1;
  }
  for (std::size_t i = b; i < e; ++i) {
    const auto& p = pieces_[i];
    out.push_back({0.5 * (p.first + p.second), p.second - p.first});
  }
  return out;
}

ArcUnion ArcUnion::complement() const {
  std::vector<Piece> ps;
  double cur = 0.0;
  for (auto& p : pieces_) {
    if (p.first > cur) ps.emplace_back(cur, p.first);
    cur = std::max(cur, p.second);
  }
  if (cur < 1.0) ps.emplace_back(cur, 1.0);
  return from_pieces(std::move(ps), 0.0);
}

ArcUnion ArcUnion::unite(const ArcUnion& o) const {
  std::vector<Piece> ps = pieces_;
  ps.insert(ps.end(), o.pieces_.begin(), o.pieces_.end());
  return from_pieces(std::move(ps));
}

bool ArcUnion::covers(const ArcUnion& o, double tol) const {
  std::size_t i = 0;
  for (auto& p : o.pieces_) {
    while (i < pieces_.size() && pieces_[i].second < p.second - tol) ++i;
    if (i == pieces_.size()) return false;
    if (pieces_[i].first > p.first + tol) return false;
  }
  return true;
}

ArcUnion dilate_arcs(double delta, std::int64_t N) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("dilate_arcs: delta must lie in (0,1)");
  if (N < 1) throw ParameterError("dilate_arcs: N must be >= 1");
  std::vector<ArcUnion::Piece> ps;
  ps.reserve(static_cast<std::size_t>(N) + 1);
  const double h = 0.5 * delta / static_cast<double>(N);
  ps.emplace_back(0.0, h);
  for (std::int64_t k = 1; k < N; ++k) {
    double c = static_cast<double>(k) / static_cast<double>(N);
    ps.emplace_back(c - h, c + h);
  }
  ps.emplace_back(1.0 - h, 1.0);
  return ArcUnion::from_pieces(std::move(ps));
}

nlohmann::json EntropyCertificate::to_json() const {
  nlohmann::json j;
  j["exact"] = exact_available ? nlohmann::json(exact) : nlohmann::json(nullptr);
  j["entropy_bound"] = entropy_bound;
  j["component_count"] = exact_available ? nlohmann::json(component_count) : nlohmann::json(nullptr);
  j["ok"] = ok;
  return j;
}

CompactSet::CompactSet(std::vector<Generation> gens, std::size_t arc_cap)
    : gens_(std::move(gens)), arc_cap_(arc_cap), cache_(std::make_shared<Cache>()) {
  for (auto& g : gens_) {
    if (g.N < 1) throw ParameterError("generation N must be >= 1");
    if (!(g.delta > 0.0 && g.delta < 1.0)) throw ParameterError("generation delta must lie in (0,1)");
  }
}

std::size_t CompactSet::arc_count() const {
  std::size_t s = 0;
  for (auto& g : gens_) s += static_cast<std::size_t>(g.N);
  return s;
}

double CompactSet::delta_sum() const {
  double s = 0.0;
  for (auto& g : gens_) s += g.delta;
  return s;
}

const ArcUnion& CompactSet::complement() const {
  if (!realizable()) throw ResourceError("set has too many arcs to realize exactly");
  std::call_once(cache_->once, [this] {
    std::vector<ArcUnion::Piece> ps;
    ps.reserve(arc_count() + gens_.size());
    for (auto& g : gens_) {
      auto u = dilate_arcs(g.delta, g.N);
      ps.insert(ps.end(), u.pieces().begin(), u.pieces().end());
    }
    cache_->comp = ArcUnion::from_pieces(std::move(ps));
  });
  return cache_->comp;
}

double CompactSet::measure() const { return 1.0 - complement().measure(); }

bool CompactSet::contains(double t) const {
  for (auto& g : gens_) {
    if (dist_to_int(static_cast<double>(g.N) * t) < 0.5 * g.delta) return false;
  }
  return true;
}

bool CompactSet::contains_grid(std::int64_t k, std::int64_t G) const {
  using u128 = unsigned __int128;
  if (G <= 0) throw ParameterError("grid size must be positive");
  std::int64_t kk = ((k % G) + G) % G;
  for (auto& g : gens_) {
    std::int64_t r = static_cast<std::int64_t>((u128)(g.N % G) * (u128)kk % (u128)G);
    std::int64_t d = std::min(r, G - r);
    // d/G < delta/2
    if (static_cast<long double>(d) < 0.5L * g.delta * static_cast<long double>(G)) return false;
  }
  return true;
}

bool CompactSet::contains_dyadic(std::uint64_t k, int bits) const {
  if (bits < 0 || bits > 62) throw ParameterError("dyadic depth must lie in [0,62]");
  return contains_grid(static_cast<std::int64_t>(k), std::int64_t(1) << bits);
}

bool CompactSet::contains_interval(double a, double b) const {
  if (b < a) return false;
  for (auto& g : gens_) {
    long double len = static_cast<long double>(g.N) * (b - a);
    long double h = 0.5L * g.delta;
    if (len + 2 * h >= 1.0L) return false;
    long double s = static_cast<long double>(g.N) * a;
    s -= std::floor(s);
    if (s < h || s + len > 1.0L - h) return false;
  }
  return true;
}

CompactSet CompactSet::prefix(std::size_t j) const {
  j = std::min(j, gens_.size());
  return CompactSet(std::vector<Generation>(gens_.begin(), gens_.begin() + j), arc_cap_);
}

nlohmann::json CompactSet::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& g : gens_) arr.push_back({{"N", g.N}, {"delta", g.delta}});
  return {{"generations", arr}};
}

CompactSet CompactSet::from_json(const nlohmann::json& j) {
  std::vector<Generation> gens;
  for (auto& g : j.at("generations")) gens.push_back({g.at("N").get<std::int64_t>(), g.at("delta").get<double>()});
  return CompactSet(std::move(gens));
}

CompactSet assemble_set(const std::vector<Generation>& gens, std::size_t arc_cap) {
  CompactSet E(gens, arc_cap);
  if (E.delta_sum() >= 1.0) std::clog << "warning: sum of deltas >= 1, m(E) may vanish\n";
  return E;
}

double entropy_sum(const std::vector<Arc>& comps) {
  double s = 0.0;
  for (auto& c : comps)
    if (c.length > 0.0 && c.length < 1.0) s += c.length * std::log(1.0 / c.length);
  return s;
}

EntropyCertificate bc_entropy(const CompactSet& E) {
  EntropyCertificate c;
  for (auto& g : E.generations()) c.entropy_bound += g.delta * std::log(static_cast<double>(g.N) / g.delta);
  if (E.measure_lower() <= 0.0 && !E.realizable())
    throw DegenerateSetError("cannot certify m(E) > 0");
  if (!E.realizable()) {
    c.exact_available = false;
    c.exact = std::nan("");
    c.component_count = 0;
    c.ok = true;  // bound still valid, exact side not computed
    return c;
  }
  if (E.measure() <= 0.0) throw DegenerateSetError("m(E) = 0");
  auto comps = E.complement().components();
  c.exact = entropy_sum(comps);
  c.component_count = comps.size();
  c.ok = c.exact <= c.entropy_bound + 1e-12;
  return c;
}

}  // namespace uniqset
