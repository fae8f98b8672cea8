// circle.hpp
// arcs, arc unions and the sets E on the normalized circle [0,1)
#ifndef UNIQSET_CIRCLE_HPP
#define UNIQSET_CIRCLE_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <json.hpp>

namespace uniqset {

// fractional part in [0,1)
double frac(double x);
// distance from x to the nearest integer
double dist_to_int(double x);

struct Arc {
  double center = 0.0;
  double length = 1.0;

  double left() const { return center - 0.5 * length; }
  double right() const { return center + 0.5 * length; }
  // open arc; length 1 is the whole circle
  bool contains(double t) const;
};

// Canonical union of open arcs, stored as sorted disjoint [a,b) pieces of
// [0,1). Wrapping arcs are split at 0.
class ArcUnion {
 public:
  using Piece = std::pair<double, double>;
  static constexpr double kMergeTol = 1e-15;

  ArcUnion() = default;
  static ArcUnion from_arcs(const std::vector<Arc>& arcs, double tol = kMergeTol);
  // pieces must lie inside [0,1]; they are sorted and merged here
  static ArcUnion from_pieces(std::vector<Piece> pieces, double tol = kMergeTol);

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t piece_count() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }
  double measure() const;
  bool contains(double t) const;
  // maximal components on the circle (piece touching 0 and 1 joined)
  std::vector<Arc> components() const;
  ArcUnion complement() const;
  ArcUnion unite(const ArcUnion& o) const;
  // o is a subset of *this (up to the merge tolerance)
  bool covers(const ArcUnion& o, double tol = 1e-12) const;
  bool operator==(const ArcUnion& o) const { return pieces_ == o.pieces_; }

 private:
  std::vector<Piece> pieces_;
};

// U_{N,delta} = {t : N t mod 1 in I(delta)}
ArcUnion dilate_arcs(double delta, std::int64_t N);

struct Generation {
  std::int64_t N = 1;
  double delta = 0.0;
};

struct EntropyCertificate {
  bool exact_available = true;
  double exact = 0.0;             // sum |J| log(1/|J|) over complement components
  double entropy_bound = 0.0;    // sum_j delta_j log(N_j / delta_j)
  std::size_t component_count = 0;
  bool ok = true;                 // exact <= bound

  nlohmann::json to_json() const;
};

// E = circle minus the union of U_{N_j, delta_j}. The complement is realized
// lazily and only when the total arc count stays below arc_cap.
class CompactSet {
 public:
  static constexpr std::size_t kDefaultArcCap = 20'000'000;

  explicit CompactSet(std::vector<Generation> gens = {},
                      std::size_t arc_cap = kDefaultArcCap);

  const std::vector<Generation>& generations() const { return gens_; }
  std::size_t arc_count() const;
  double delta_sum() const;
  double measure_lower() const { return 1.0 - delta_sum(); }
  bool realizable() const { return arc_count() <= arc_cap_; }

  const ArcUnion& complement() const;  // throws ResourceError over the cap
  double measure() const;              // exact m(E)

  bool contains(double t) const;
  // t = k / 2^bits, evaluated with integer arithmetic
  bool contains_dyadic(std::uint64_t k, int bits) const;
  // t = k / G, G arbitrary
  bool contains_grid(std::int64_t k, std::int64_t G) const;
  // closed interval [a, b] inside E
  bool contains_interval(double a, double b) const;
  // E restricted to the first j generations
  CompactSet prefix(std::size_t j) const;

  nlohmann::json to_json() const;
  static CompactSet from_json(const nlohmann::json& j);

 private:
  struct Cache {
    std::once_flag once;
    ArcUnion comp;
  };
  std::vector<Generation> gens_;
  std::size_t arc_cap_;
  std::shared_ptr<Cache> cache_;
};

CompactSet assemble_set(const std::vector<Generation>& gens,
                        std::size_t arc_cap = CompactSet::kDefaultArcCap);

EntropyCertificate bc_entropy(const CompactSet& E);

// sum_J |J| log(1/|J|) over the given arcs
double entropy_sum(const std::vector<Arc>& comps);

}  // namespace uniqset

#endif
