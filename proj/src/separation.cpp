#include "uniqset/separation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uniqset/errors.hpp"

namespace uniqset {

std::string to_string(SepStrategy s) { return s == SepStrategy::PRIME ? "prime" : "greedy"; }

bool FrequencyBlock::contains(std::int64_t v) const {
  if (v == 0 || v % N != 0) return false;
  std::int64_t n = v / N;
  return n >= -M && n <= M;
}

bool SeparationResult::all_bounds_ok() const {
  return std::all_of(bound_ok.begin(), bound_ok.end(), [](bool b) { return b; });
}

std::int64_t first_collision(std::int64_t N, std::int64_t M, std::int64_t Nj, std::int64_t Mj) {
  // n N = m Nj has smallest positive solution n = Nj/g, m = N/g
  std::int64_t g = std::gcd(N, Nj);
  std::int64_t n = Nj / g, m = N / g;
  if (n <= M && m <= Mj) return n * N;
  return 0;
}

namespace {
void check_ms(const std::vector<std::int64_t>& Ms) {
  if (Ms.empty()) throw ParameterError("separation: Ms must be nonempty");
  for (auto m : Ms)
    if (m < 1) throw ParameterError("separation: every M_j must be >= 1");
}

void guard(std::int64_t N, std::int64_t M) {
  if ((__int128)N * M > (__int128(1) << 62)) throw ResourceError("separation: block elements overflow int64");
}
}  // namespace

SeparationResult greedy_select(const std::vector<std::int64_t>& Ms) {
  check_ms(Ms);
  SeparationResult r;
  r.strategy = SepStrategy::GREEDY_PIGEONHOLE;
  r.Ms = Ms;
  __int128 prev = 0;  // sum of |Lambda_j| over chosen blocks
  for (std::size_t k = 0; k < Ms.size(); ++k) {
    const std::int64_t M = Ms[k];
    std::int64_t N = 1;
    for (;; ++N) {
      bool hit = false;
      for (std::size_t j = k; j-- > 0;) {
        if (first_collision(N, M, r.Ns[j], Ms[j])) {
          hit = true;
          break;
        }
      }
      if (!hit) break;
    }
    guard(N, M);
    __int128 b = 1 + (__int128)(2 * M) * prev;
    r.Ns.push_back(N);
    r.bounds.push_back(static_cast<double>(b));
    r.bound_ok.push_back((__int128)N <= b);
    r.growth.push_back(0.0);
    prev += 2 * M;
    if (prev > (__int128(1) << 62)) throw ResourceError("separation: block sizes overflow");
  }
  return r;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  using u128 = unsigned __int128;
  auto mulmod = [](std::uint64_t a, std::uint64_t b, std::uint64_t m) { return (std::uint64_t)((u128)a * b % m); };
  auto powmod = [&](std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    while (e) {
      if (e & 1) r = mulmod(r, a, m);
      a = mulmod(a, a, m);
      e >>= 1;
    }
    return r;
  };
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // deterministic base set for 64-bit
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool comp = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        comp = false;
        break;
      }
    }
    if (comp) return false;
  }
  return true;
}

namespace {
// count primes <= x by sieve (x moderate)
std::int64_t prime_pi(std::int64_t x) {
  if (x < 2) return 0;
  std::vector<bool> comp(static_cast<std::size_t>(x) + 1, false);
  std::int64_t c = 0;
  for (std::int64_t i = 2; i <= x; ++i) {
    if (comp[i]) continue;
    ++c;
    for (std::int64_t k = i * i; k <= x; k += i) comp[k] = true;
  }
  return c;
}

// upper bound for the n-th prime
double nth_prime_bound(std::int64_t n) {
  static const int small[] = {0, 2, 3, 5, 7, 11, 13};
  if (n <= 6) return small[n];
  double dn = static_cast<double>(n);
  return dn * (std::log(dn) + std::log(std::log(dn)));
}
}  // namespace

SeparationResult prime_select(const std::vector<std::int64_t>& Ms) {
  check_ms(Ms);
  for (std::size_t i = 1; i < Ms.size(); ++i)
    if (Ms[i] < Ms[i - 1]) throw PreconditionError("prime_select: Ms must be non-decreasing");
  SeparationResult r;
  r.strategy = SepStrategy::PRIME;
  r.Ms = Ms;
  for (std::size_t k = 1; k <= Ms.size(); ++k) {
    std::int64_t Mprev = k == 1 ? 0 : Ms[k - 2];
    std::int64_t p = Mprev, found = 0;
    while (found < static_cast<std::int64_t>(k)) {
      ++p;
      if (is_prime(static_cast<std::uint64_t>(p))) ++found;
    }
    guard(p, Ms[k - 1]);
    std::int64_t idx = (Mprev < 50'000'000 ? prime_pi(Mprev) : 0) + static_cast<std::int64_t>(k);
    double b = Mprev < 50'000'000 ? nth_prime_bound(idx) : INFINITY;
    r.Ns.push_back(p);
    r.bounds.push_back(b);
    r.bound_ok.push_back(static_cast<double>(p) <= b);
    double x = static_cast<double>(Mprev + static_cast<std::int64_t>(k));
    r.growth.push_back(x > 1.0 ? static_cast<double>(p) / (x * std::log(x)) : static_cast<double>(p));
  }
  return r;
}

DisjointReport check_disjoint(const std::vector<std::int64_t>& Ns, const std::vector<std::int64_t>& Ms,
                              DisjointMethod method) {
  if (Ns.size() != Ms.size()) throw ParameterError("check_disjoint: size mismatch");
  __int128 total = 0;
  for (auto m : Ms) total += m;
  if (method == DisjointMethod::AUTO)
    method = total <= 50'000'000 ? DisjointMethod::EXHAUSTIVE : DisjointMethod::PAIRWISE;
  DisjointReport rep;
  if (method == DisjointMethod::PAIRWISE) {
    rep.method = "pairwise";
    for (std::size_t i = 0; i < Ns.size(); ++i)
      for (std::size_t j = i + 1; j < Ns.size(); ++j) {
        std::int64_t v = first_collision(Ns[i], Ms[i], Ns[j], Ms[j]);
        if (v && (rep.ok || v < rep.value)) {
          rep = {false, i, j, v, "pairwise"};
        }
      }
    return rep;
  }
  rep.method = "exhaustive";
  // blocks are symmetric, so positive elements suffice
  std::vector<std::int64_t> all;
  all.reserve(static_cast<std::size_t>(total));
  for (std::size_t j = 0; j < Ns.size(); ++j) {
    guard(Ns[j], Ms[j]);
    for (std::int64_t n = 1; n <= Ms[j]; ++n) all.push_back(n * Ns[j]);
  }
  std::sort(all.begin(), all.end());
  auto it = std::adjacent_find(all.begin(), all.end());
  if (it == all.end()) return rep;
  std::int64_t v = *it;
  rep.ok = false;
  rep.value = v;
  std::vector<std::size_t> owners;
  for (std::size_t j = 0; j < Ns.size(); ++j)
    if (FrequencyBlock{Ns[j], Ms[j]}.contains(v)) owners.push_back(j);
  if (owners.size() >= 2) {
    rep.i = owners[0];
    rep.j = owners[1];
  } else {
    // a block never repeats an element; this would be a logic error
    rep.i = rep.j = owners.empty() ? 0 : owners[0];
  }
  return rep;
}

DisjointReport check_disjoint(const SeparationResult& r, DisjointMethod method) {
  return check_disjoint(r.Ns, r.Ms, method);
}

}  // namespace uniqset
