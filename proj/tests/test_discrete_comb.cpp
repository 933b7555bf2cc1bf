#include <cmath>
#include <functional>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "sievelab/errors.hpp"
#include "sievelab/numeric.hpp"
#include "sievelab/discrete_comb.hpp"

using namespace sievelab;

namespace {

using V = std::vector<std::uint64_t>;

// Ordered k-tuple counts and 1/prod weights by enumeration.
void brute_reps(const V& A, unsigned k, std::map<std::uint64_t, mpz_class>& counts,
                std::map<std::uint64_t, mpq_class>& weights) {
  oracle::for_each_tuple(A.size(), k, [&](const std::vector<std::size_t>& idx) {
    std::uint64_t s = 0;
    mpz_class prod = 1;
    for (auto i : idx) {
      s += A[i];
      prod *= static_cast<unsigned long>(A[i]);
    }
    counts[s] += 1;
    weights[s] += mpq_class(1, prod);
  });
}

// Sum of 1/(q_1...q_k) over ordered k-tuples from P with product in (lo, hi), exact.
mpq_class brute_product_mass(const V& P, unsigned k, const mpq_class& lo, const mpq_class& hi, bool hi_open) {
  mpq_class total = 0;
  std::function<void(unsigned, mpz_class)> rec = [&](unsigned depth, mpz_class prod) {
    if (prod > hi) return;
    if (depth == k) {
      if (prod > lo && (hi_open ? prod < hi : prod <= hi)) total += mpq_class(1, prod);
      return;
    }
    for (auto q : P) rec(depth + 1, prod * static_cast<unsigned long>(q));
  };
  rec(0, 1);
  return total;
}

}  // namespace

TEST_CASE("weighted integer sets validate their range") {
  auto A = WeightedIntegerSet::full_interval(100, 1, 1);
  CHECK(A.elements.front() == 37);
  CHECK(A.elements.back() == 100);
  CHECK(A.elements.size() == 64);
  CHECK(admissible(37, 100, 1, 1));
  CHECK_FALSE(admissible(36, 100, 1, 1));
  CHECK_FALSE(admissible(101, 100, 1, 1));
  CHECK_THROWS_AS(WeightedIntegerSet::make(100, 1, 1, {30}), PreconditionFail);
  CHECK_THROWS_AS(WeightedIntegerSet::make(100, 2, 1, {40}), PreconditionFail);
  CHECK(WeightedIntegerSet::make(12, 1, 2, {3, 4, 5}).reciprocal_sum() == mpq_class(47, 60));
}

TEST_CASE("representation tables, small examples") {
  auto t = rep_table({2, 3}, 2, 10);
  CHECK(t.count(4) == 1);
  CHECK(t.count(5) == 2);
  CHECK(t.count(6) == 1);
  CHECK(t.count(7) == 0);
  REQUIRE(t.weighted_exact);
  CHECK((*t.weighted_exact)[5] == mpq_class(1, 3));
  CHECK(t.weight(5) == doctest::Approx(1.0 / 3));
  for (unsigned k = 1; k <= 4; ++k) {
    auto s = rep_table({7}, k, 40);
    for (std::uint64_t n = 0; n <= 40; ++n) CHECK(s.count(n) == (n == 7 * k ? 1 : 0));
  }
  CHECK(rep_table({1, 2}, 2, 5).count(3) == 2);
}

TEST_CASE("representation tables against enumeration") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    V A;
    const auto m = 1 + rng.below(6);
    while (A.size() < m) {
      auto a = 1 + rng.below(30);
      if (std::find(A.begin(), A.end(), a) == A.end()) A.push_back(a);
    }
    std::sort(A.begin(), A.end());
    const unsigned kmax = 1 + static_cast<unsigned>(rng.below(4));
    const std::uint64_t cap = 120;
    auto tables = rep_tables(A, kmax, cap);
    for (unsigned k = 1; k <= kmax; ++k) {
      std::map<std::uint64_t, mpz_class> c;
      std::map<std::uint64_t, mpq_class> w;
      brute_reps(A, k, c, w);
      const auto& t = tables[k - 1];
      for (std::uint64_t n = 0; n <= cap; ++n) {
        REQUIRE(t.count(n) == (c.count(n) ? c[n] : mpz_class(0)));
        const mpq_class want = w.count(n) ? w[n] : mpq_class(0);
        REQUIRE(t.weighted_exact);
        REQUIRE((*t.weighted_exact)[n] == want);
        CHECK(abs(mpq_class(t.weight(n)) - want) <= mpq_class(t.weighted_rel_error) * want);
      }
    }
  }
}

TEST_CASE("64-bit overflow escalates to big integers") {
  V A;
  for (std::uint64_t a = 1; a <= 64; ++a) A.push_back(a);
  const unsigned k = 12;
  const std::uint64_t cap = 64 * k;
  auto t = rep_table(A, k, cap);
  CHECK(t.escalated);
  // reference DP in mpz
  std::vector<mpz_class> dp(cap + 1, 0);
  dp[0] = 1;
  for (unsigned j = 0; j < k; ++j) {
    std::vector<mpz_class> nx(cap + 1, 0);
    for (std::uint64_t s = 0; s <= cap; ++s)
      if (dp[s] != 0)
        for (auto a : A)
          if (s + a <= cap) nx[s + a] += dp[s];
    dp = std::move(nx);
  }
  for (std::uint64_t n : {12ull, 13ull, 200ull, 390ull, 768ull}) CHECK(t.count(n) == dp[n]);
  CHECK(t.count(390) > mpz_class("18446744073709551615"));
}

TEST_CASE("window pigeonhole on the small examples") {
  auto r = window_best_k({1.0, 1.5}, {1.0, 1.0}, 0.9, 1.6, 3.0);
  CHECK(r.k == 2);
  // the sum 3 sits on the window edge, so only the exhaustive pass reaches 1
  CHECK(r.beta_lower <= 1.0);
  REQUIRE(r.beta_verified);
  CHECK(*r.beta_verified == doctest::Approx(1.0));
  auto s = window_best_k({2.5}, {1.0}, 2.0, 2.5, 2.5);
  CHECK(s.k == 1);
  REQUIRE(s.beta_verified);
  CHECK(*s.beta_verified == doctest::Approx(1.0));
  CHECK_THROWS_AS(window_best_k({3.0}, {1.0}, 0.9, 1.6, 3.0), PreconditionFail);
}

TEST_CASE("window pigeonhole against enumeration") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const double y = 1 + rng.uniform(), z = y * (1.2 + rng.uniform());
    const double x = z * (1 + 3 * rng.uniform());
    std::vector<double> B, w;
    const auto m = 1 + rng.below(5);
    for (std::size_t i = 0; i < m; ++i) {
      B.push_back(y + (z - y) * (0.01 + 0.99 * rng.uniform()));
      w.push_back(0.1 + rng.uniform());
    }
    auto r = window_best_k(B, w, y, z, x);
    CHECK(r.beta_lower >= r.guarantee);
    double W = 0;
    for (double wi : w) W += wi;
    // exact beta_k by enumeration for every k; the reported interval must contain it
    for (unsigned k = 1; k <= r.per_k.size(); ++k) {
      double beta = 0;
      oracle::for_each_tuple(B.size(), k, [&](const std::vector<std::size_t>& idx) {
        double s = 0, p = 1;
        for (auto i : idx) {
          s += B[i];
          p *= w[i] / W;
        }
        if (s > x - z && s <= x) beta += p;
      });
      CHECK(r.per_k[k - 1].first <= beta + 1e-12);
      CHECK(beta <= r.per_k[k - 1].second + 1e-12);
    }
  }
}

TEST_CASE("prime product window") {
  auto one = prime_product_window(PrimeSet::explicit_list(49, {7}), 49, 2, 2, 7);
  CHECK(one.ell == 1);
  CHECK(one.mass == mpq_class(1, 7));
  // u = 2 puts x^{1/u} = X = 6, so the window is (1, 6]
  auto two = prime_product_window(PrimeSet::explicit_list(36, {2, 3}), 36, 2, 2, 6);
  CHECK(two.ell == 1);
  CHECK(two.mass == mpq_class(5, 6));
  REQUIRE(two.per_ell.size() == 2);
  // ell = 2: products 4, 6, 6 land in (1, 6]
  CHECK(two.per_ell[1] == doctest::Approx(mpq_class(mpq_class(7, 12) / mpq_class(25, 36)).get_d()));
  CHECK(two.guarantee_holds);
  CHECK_THROWS_AS(prime_product_window(PrimeSet::explicit_list(36, {37}), 36, 1, 2, 36), PreconditionFail);
  CHECK_THROWS_AS(prime_product_window(PrimeSet::explicit_list(36, {2, 3}), 36, 1, 2, 6), PreconditionFail);
}

TEST_CASE("prime product window against enumeration") {
  const double x = 1e6, u = 1.5, v = 2.0, X = 5e5;
  auto P = primes_up_to(10'000).restrict_to(30, 9'000);  // inside (x^{1/ev}, x^{1/u}]
  V ps;
  SplitMix64 rng(3);
  for (auto p : P)
    if (rng.uniform() < 0.05) ps.push_back(p);
  auto set = PrimeSet::explicit_list(1'000'000, ps);
  auto r = prime_product_window(set, x, u, v, X);
  // X x^{-1/u} = X / 10^4
  const mpq_class lo_exact(static_cast<long>(X), 10'000), hi(static_cast<long>(X));
  mpq_class rs = 0;
  for (auto p : ps) rs += mpq_class(1, p);
  for (unsigned ell = 1; ell <= r.per_ell.size(); ++ell) {
    mpq_class m = brute_product_mass(ps, ell, lo_exact, hi, false);
    mpq_class norm = m;
    for (unsigned i = 0; i < ell; ++i) norm /= rs;
    CHECK(r.per_ell[ell - 1] == doctest::Approx(norm.get_d()).epsilon(1e-12));
  }
  CHECK(r.normalized >= 1.0 / r.K);
  CHECK(r.guarantee_holds);
}

TEST_CASE("integer hypothesis checker") {
  SUBCASE("full interval, u = v = 1") {
    auto A = WeightedIntegerSet::full_interval(100, 1, 1);
    auto h = hypA_check(A, 0.0);
    REQUIRE(h.rows.size() == 2);
    CHECK(h.rows[0].k == 1);
    // n ranges over [99, 100]; the single hit 99 weighs 1/99
    CHECK(h.rows[0].n == 99);
    CHECK(h.rows[0].lhs == doctest::Approx(1.0 / 99));
    CHECK(h.rows[0].alpha == doctest::Approx(100.0 / 99 / A.reciprocal_sum_approx()));
    // the pair sums carry more normalized weight than the single hit at 100
    CHECK(h.rows[1].alpha > h.rows[0].alpha);
    CHECK(h.k == 2);
  }
  SUBCASE("no sums in the window") {
    const std::uint64_t N = 20;
    auto A = WeightedIntegerSet::make(N, 1, 2, {11});
    auto h = hypA_check(A, 0.5);
    for (auto& row : h.rows) CHECK(row.lhs == 0.0);
    CHECK(h.implied_alpha == 0.0);
    CHECK_FALSE(h.precondition_met);
  }
  SUBCASE("interval obstruction between N/(k+1) and N/k - 1") {
    // N = 60, u = v = 1: A inside (60/3, 60/2 - 1) and above 60/e blocks k = 1 and k = 2
    auto A = WeightedIntegerSet::make(60, 1, 1, {23, 24, 25, 26, 27, 28});
    auto h = hypA_check(A, 0.0);
    for (auto& row : h.rows) CHECK(row.lhs == 0.0);
  }
  SUBCASE("lhs matches enumeration") {
    auto A = WeightedIntegerSet::make(40, 1, 2, {8, 9, 13, 17, 20, 31});
    auto h = hypA_check(A, 0.1);
    for (auto& row : h.rows) {
      std::map<std::uint64_t, mpz_class> c;
      std::map<std::uint64_t, mpq_class> w;
      brute_reps(A.elements, row.k, c, w);
      double best = 0;
      for (std::uint64_t n = 40 - row.k; n <= 40; ++n) best = std::max(best, w.count(n) ? w[n].get_d() : 0.0);
      CHECK(row.lhs == doctest::Approx(best).epsilon(1e-13));
    }
  }
}

TEST_CASE("window tuple count") {
  auto B = WeightedIntegerSet::make(12, 1, 2, {3, 4, 5});
  CHECK(thm71_count(B, 3) == 17);
  CHECK(thm71_count(WeightedIntegerSet::make(12, 1, 2, {12}), 1) == 1);
  auto t = rep_table(B.elements, 3, 12);
  mpz_class sum = 0;
  for (std::uint64_t n = 9; n <= 12; ++n) sum += t.count(n);
  CHECK(thm71_count(B, 3) == sum);
  CHECK_THROWS_AS(thm71_count(B, 9), PreconditionFail);
}

TEST_CASE("sumsets") {
  CHECK(sumset({1, 2}, {1, 2}) == std::set<std::int64_t>{2, 3, 4});
  CHECK(restricted_sumset({{1, 1}, {5, 5}, {7, 7}}) == std::set<std::int64_t>{2, 10, 14});
  SplitMix64 rng(4);
  for (int i = 0; i < 20; ++i) {
    std::set<std::int64_t> A;
    for (int j = 0; j < 8; ++j) A.insert(static_cast<std::int64_t>(rng.below(50)));
    CHECK(sumset(A, A).size() <= A.size() * (A.size() + 1) / 2);
  }
}

TEST_CASE("popular pairs") {
  std::vector<std::int64_t> ap;
  for (int i = 0; i < 10; ++i) ap.push_back(3 + 4 * i);
  auto pp = popular_pairs(ap, 0.5);
  CHECK(pp.doubling_size == 19);
  CHECK(pp.bound_holds);
  CHECK(pp.pairs.size() >= static_cast<std::size_t>((1 - 0.25) * 100));
  // the middle sum of the AP is always popular
  CHECK(pp.pairs.count({ap[0], ap[9]}) == 1);
  auto loose = popular_pairs(ap, 0.99);
  CHECK(loose.bound_holds);
}

TEST_CASE("generalized arithmetic progressions") {
  GAParithmetic P{0, {1}, {2}};
  CHECK(P.elements() == std::vector<std::int64_t>{-2, -1, 0, 1, 2});
  CHECK(P.proper());
  GAParithmetic improper{0, {1, 2}, {2, 2}};
  CHECK_FALSE(improper.proper());
  auto g = gap_rep_check(P, 2, 0.1);
  CHECK(g.holds);
  CHECK(g.min_ratio >= 1.0);
  CHECK(gap_rep_check(P, 1, 0.1).holds);
  CHECK_THROWS_AS(gap_rep_check(P, 2, 0.5), PreconditionFail);
}

TEST_CASE("prime hypothesis checker") {
  SUBCASE("single prime") {
    auto h = hypP_check(PrimeSet::explicit_list(101, {97}), 101, 1, 1, 0.5, 0.0);
    CHECK(h.k == 1);
    CHECK(h.lhs == mpq_class(1, 97));
  }
  SUBCASE("mass matches tuple enumeration") {
    const std::uint64_t x = 200'000;
    auto all = primes_up_to(x);
    std::vector<std::uint64_t> ps;
    SplitMix64 rng(8);
    for (auto p : all.restrict_to(static_cast<std::uint64_t>(std::pow(x, 1 / (kE * 2))) + 1, 447))
      if (rng.uniform() < 0.3) ps.push_back(p);
    auto P = PrimeSet::explicit_list(x, ps);
    auto h = hypP_check(P, x, 2, 2, 0.5, 0.1);
    for (auto& row : h.rows) {
      mpq_class want = brute_product_mass(ps, row.k, mpq_class(static_cast<long>(x), 2), mpq_class(static_cast<long>(x)), true);
      CHECK(row.lhs == doctest::Approx(want.get_d()).epsilon(1e-13));
    }
  }
  SUBCASE("power-interval family is nearly empty in the window") {
    const std::uint64_t x = 1'000'000;
    auto P = from_power_intervals(x, 3, false).restrict_to(static_cast<std::uint64_t>(std::pow(x, 1 / (kE * 2))), x);
    auto h = hypP_check(P, x, 1, 2, 0.5, 0.5);
    REQUIRE(h.rows.size() >= 3);
    CHECK(h.rows[0].lhs == 0.0);
    CHECK(h.rows[1].lhs < 0.02);
    CHECK(h.rows[2].lhs < h.rows[1].lhs);
  }
}

TEST_CASE("integers to primes") {
  auto r = a_to_primes(WeightedIntegerSet::make(4, 1, 1, {2}));
  CHECK(r.primes.to_vector() == V{11, 13, 17, 19});
  auto A = WeightedIntegerSet::full_interval(12, 2, 2);
  auto s = a_to_primes(A);
  CHECK(s.relative_gap <= s.bound);
  CHECK(a_to_primes(WeightedIntegerSet{10, 1, 1, {}}).primes.empty());
  CHECK_THROWS_AS(a_to_primes(WeightedIntegerSet::full_interval(30, 2, 2)), BudgetExceeded);
}

TEST_CASE("primes to integers") {
  const std::uint64_t x = 10'000'000;
  auto P = primes_up_to(x).restrict_to(static_cast<std::uint64_t>(std::pow(x, 1 / (kE * 2))), 3163);
  auto r = p_to_a(P, x, 1, 2, 0.5, 0.5);
  CHECK(r.A.N == static_cast<std::uint64_t>(std::floor(r.N_real)));
  CHECK_FALSE(r.A.elements.empty());
  for (auto a : r.A.elements) CHECK(admissible(a, r.A.N, 1, 2));
  CHECK_THROWS_AS(p_to_a(P, x, 1, 2, 0.9, 0.5), PreconditionFail);
}
