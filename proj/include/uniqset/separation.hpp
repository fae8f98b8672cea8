// separation.hpp
// dilation integers N_j with pairwise disjoint blocks {n N_j : 0 < |n| <= M_j}
#ifndef UNIQSET_SEPARATION_HPP
#define UNIQSET_SEPARATION_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace uniqset {

enum class SepStrategy { GREEDY_PIGEONHOLE, PRIME };
std::string to_string(SepStrategy s);

struct FrequencyBlock {
  std::int64_t N = 1;
  std::int64_t M = 1;
  std::int64_t size() const { return 2 * M; }
  bool contains(std::int64_t v) const;
};

struct SeparationResult {
  std::vector<std::int64_t> Ns;
  std::vector<std::int64_t> Ms;
  SepStrategy strategy = SepStrategy::GREEDY_PIGEONHOLE;
  std::vector<double> bounds;   // counting bound (greedy) or prime-counting bound (prime)
  std::vector<bool> bound_ok;
  std::vector<double> growth;   // prime: N_k / ((M_{k-1}+k) log(M_{k-1}+k))

  bool all_bounds_ok() const;
  FrequencyBlock block(std::size_t j) const { return {Ns[j], Ms[j]}; }
};

// do {n N : 0<|n|<=M} and {m Nj : 0<|m|<=Mj} meet? smallest common element or 0
std::int64_t first_collision(std::int64_t N, std::int64_t M, std::int64_t Nj, std::int64_t Mj);

SeparationResult greedy_select(const std::vector<std::int64_t>& Ms);
SeparationResult prime_select(const std::vector<std::int64_t>& Ms);

enum class DisjointMethod { AUTO, EXHAUSTIVE, PAIRWISE };

struct DisjointReport {
  bool ok = true;
  std::size_t i = 0, j = 0;  // colliding blocks (0-based)
  std::int64_t value = 0;     // smallest common positive element
  std::string method;
};

// EXHAUSTIVE sorts every positive element; PAIRWISE decides each pair by gcd
DisjointReport check_disjoint(const std::vector<std::int64_t>& Ns, const std::vector<std::int64_t>& Ms,
                              DisjointMethod method = DisjointMethod::AUTO);
DisjointReport check_disjoint(const SeparationResult& r, DisjointMethod method = DisjointMethod::AUTO);

bool is_prime(std::uint64_t n);

}  // namespace uniqset

#endif
