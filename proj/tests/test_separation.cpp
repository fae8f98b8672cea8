#include <doctest.h>

#include <set>

#include "uniqset/errors.hpp"
#include "uniqset/separation.hpp"

using namespace uniqset;

namespace {
// brute-force oracle: explicit element sets
bool disjoint_brute(const std::vector<std::int64_t>& Ns, const std::vector<std::int64_t>& Ms) {
  std::set<std::int64_t> seen;
  for (std::size_t j = 0; j < Ns.size(); ++j) {
    std::set<std::int64_t> mine;
    for (std::int64_t n = -Ms[j]; n <= Ms[j]; ++n)
      if (n) mine.insert(n * Ns[j]);
    for (auto v : mine)
      if (seen.count(v)) return false;
    seen.insert(mine.begin(), mine.end());
  }
  return true;
}
}  // namespace

TEST_CASE("greedy_select examples") {
  CHECK(greedy_select({1}).Ns == std::vector<std::int64_t>{1});
  // exhaustive scan oracle over N = 1..10 for Ms = [1,2]
  std::int64_t want = 0;
  for (std::int64_t N = 1; N <= 10 && !want; ++N)
    if (disjoint_brute({1, N}, {1, 2})) want = N;
  auto r = greedy_select({1, 2});
  CHECK(r.Ns[1] == want);
  CHECK(r.Ns[1] == 2);
  auto t = greedy_select({3, 3, 3});
  CHECK(disjoint_brute(t.Ns, t.Ms));
  CHECK(t.all_bounds_ok());
  CHECK(t.Ns[1] <= 1 + 6 * 6);
  CHECK(t.Ns[2] <= 1 + 6 * 12);
  CHECK(check_disjoint(greedy_select({1, 2, 3})).ok);
}

TEST_CASE("greedy minimality and bound on random Ms") {
  std::vector<std::vector<std::int64_t>> cases = {{5, 3, 8, 2}, {10, 10, 10, 10, 10}, {1, 7, 2, 9, 4, 4}, {20, 1, 30}};
  for (auto& Ms : cases) {
    auto r = greedy_select(Ms);
    CHECK(r.all_bounds_ok());
    CHECK(check_disjoint(r, DisjointMethod::EXHAUSTIVE).ok);
    CHECK(disjoint_brute(r.Ns, r.Ms));
    for (std::size_t k = 0; k < Ms.size(); ++k) {
      std::vector<std::int64_t> Np(r.Ns.begin(), r.Ns.begin() + k), Mp(Ms.begin(), Ms.begin() + k + 1);
      for (std::int64_t N = 1; N < r.Ns[k]; ++N) {
        auto cand = Np;
        cand.push_back(N);
        CHECK_FALSE(disjoint_brute(cand, Mp));
      }
    }
  }
}

TEST_CASE("prime_select examples") {
  CHECK(prime_select({1, 1}).Ns == std::vector<std::int64_t>{2, 3});
  CHECK(prime_select({4, 4}).Ns == std::vector<std::int64_t>{2, 7});
  auto r = prime_select({2, 3, 5, 8, 13, 21, 34});
  std::set<std::int64_t> u(r.Ns.begin(), r.Ns.end());
  CHECK(u.size() == r.Ns.size());
  for (auto p : r.Ns) CHECK(is_prime(p));
  CHECK(check_disjoint(r).ok);
  CHECK(r.all_bounds_ok());
  // divisibility argument: no |m| <= M_j is divisible by N_k, j < k
  for (std::size_t k = 1; k < r.Ns.size(); ++k)
    for (std::size_t j = 0; j < k; ++j)
      for (std::int64_t m = 1; m <= r.Ms[j]; ++m) CHECK(m % r.Ns[k] != 0);
  CHECK_THROWS_AS(prime_select({4, 2}), PreconditionError);
}

TEST_CASE("check_disjoint witness") {
  auto rep = check_disjoint({2, 4}, {2, 1});
  CHECK_FALSE(rep.ok);
  CHECK(rep.value == 4);
  CHECK(rep.i == 0);
  CHECK(rep.j == 1);
  auto rp = check_disjoint({2, 4}, {2, 1}, DisjointMethod::PAIRWISE);
  CHECK_FALSE(rp.ok);
  CHECK(rp.value == 4);
}

TEST_CASE("pairwise and exhaustive checks agree") {
  std::vector<std::int64_t> Ms{6, 9, 4, 12, 3};
  for (std::int64_t a = 1; a < 12; ++a)
    for (std::int64_t b = a + 1; b < 25; b += 3) {
      std::vector<std::int64_t> Ns{a, b, a + b, 2 * b + 1, 3 * a + 7};
      auto e = check_disjoint(Ns, Ms, DisjointMethod::EXHAUSTIVE);
      auto p = check_disjoint(Ns, Ms, DisjointMethod::PAIRWISE);
      CHECK(e.ok == p.ok);
      CHECK(e.ok == disjoint_brute(Ns, Ms));
      if (!e.ok) CHECK(e.value == p.value);
    }
}

TEST_CASE("primality") {
  CHECK(is_prime(2));
  CHECK(is_prime(1000003));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(561));
  CHECK(is_prime(2305843009213693951ull));
}
