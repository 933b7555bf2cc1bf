#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sievelab/errors.hpp"
#include "sievelab/numeric.hpp"
#include "sievelab/sieve_counts.hpp"

using namespace sievelab;

namespace {

PrimeSet random_subset(std::uint64_t x, double keep, SplitMix64& rng) {
  std::vector<std::uint64_t> m;
  for (auto p : primes_up_to(x))
    if (rng.uniform() < keep) m.push_back(p);
  return PrimeSet::explicit_list(x, std::move(m));
}

}  // namespace

TEST_CASE("psi on the small examples") {
  auto P = PrimeSet::explicit_list(30, {2, 3, 5});
  CHECK(psi_sieve(30, P).value == 18);
  CHECK(psi_dfs(30, P).value == 18);
  CHECK(psi_sieve(100, primes_up_to(100)).value == 100);
  CHECK(psi_sieve(100, PrimeSet::explicit_list(100, {})).value == 1);
  CHECK(psi_dfs(1'000'000, PrimeSet::explicit_list(1'000'000, {2})).value == 20);
  CHECK(psi_dfs(1, P).value == 1);
  CHECK(psi_sieve(1, P).value == 1);
}

TEST_CASE("sieve, DFS and factorization agree on random sets") {
  const std::uint32_t X = 3000;
  auto spf = oracle::spf_table(X);
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    auto P = random_subset(X, rng.uniform(), rng);
    auto in_P = [&](std::uint64_t p) { return P.contains(p); };
    std::vector<std::uint64_t> want;
    for (std::uint64_t n = 1; n <= X; ++n)
      if (oracle::all_factors_in(n, spf, in_P)) want.push_back(n);
    REQUIRE(survivors(X, P) == want);
    const std::uint64_t x = 1 + rng.below(X);
    const auto brute = static_cast<std::uint64_t>(std::upper_bound(want.begin(), want.end(), x) - want.begin());
    auto Px = P.restrict_to(0, x);
    CHECK(psi_sieve(x, Px).value == brute);
    CHECK(psi_dfs(x, Px).value == brute);
  }
}

TEST_CASE("interval counts") {
  auto E = PrimeSet::explicit_list(20, {2, 3, 5, 7});
  CHECK(interval_count(10, 10, E).value == 4);
  CHECK(interval_count(10, 0, E).value == 0);
  // T0 = 0 reduces to psi with the complementary set
  auto P = from_congruence(500, 3, 2);
  CHECK(interval_count(0, 500, complement_within(P, 500)).value == psi_sieve(500, P).value);
  // shifted windows against direct division
  SplitMix64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const std::uint64_t T0 = rng.below(1'000'000), len = 1 + rng.below(2000);
    auto Es = random_subset(200, 0.5, rng);
    auto ev = Es.to_vector();
    std::uint64_t want = 0;
    for (std::uint64_t n = T0 + 1; n <= T0 + len; ++n)
      want += std::none_of(ev.begin(), ev.end(), [&](std::uint64_t p) { return n % p == 0; });
    CHECK(interval_count(T0, len, Es).value == want);
  }
}

TEST_CASE("psi_k counts squarefree k-factor products") {
  auto P = PrimeSet::explicit_list(30, {2, 3, 5});
  CHECK(psi_k(30, P, 2).value == 3);
  CHECK(psi_k(30, P, 3).value == 1);
  CHECK(psi_k(30, P, 1).value == 3);
  auto Q = from_congruence(5000, 4, 1);
  CHECK(psi_k(5000, Q, 1).value == Q.size());
  for (unsigned k = 2; k <= 3; ++k) {
    std::uint64_t want = 0;
    for (std::uint64_t n = 2; n <= 5000; ++n) {
      bool sf = false;
      if (oracle::distinct_factor_count(n, sf) != k || !sf) continue;
      bool ok = true;
      std::uint64_t m = n;
      for (std::uint64_t d = 2; d * d <= m; ++d)
        if (m % d == 0) {
          ok = ok && Q.contains(d);
          while (m % d == 0) m /= d;
        }
      if (m > 1) ok = ok && Q.contains(m);
      want += ok;
    }
    CHECK(psi_k(5000, Q, k).value == want);
  }
}

TEST_CASE("psi_profile matches point counts") {
  auto P = from_congruence(100'000, 5, 1);
  std::vector<std::uint64_t> ts{1, 10, 999, 5000, 77'777, 100'000};
  auto prof = psi_profile(100'000, P, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(prof[i] == psi_sieve(ts[i], P.restrict_to(0, ts[i])).value);
}

TEST_CASE("logarithmic weights") {
  auto r = log_weight_sum(10, PrimeSet::explicit_list(10, {2, 3}));
  REQUIRE(r.exact);
  CHECK(*r.exact == mpq_class(179, 72));
  CHECK(*log_weight_sum(5, PrimeSet::explicit_list(5, {})).exact == 1);
  CHECK(*log_weight_sum(1, PrimeSet::explicit_list(1, {})).exact == 1);
  // the float path carries a valid bound once the exact limit is passed
  auto all = primes_up_to(200'000);
  auto big = log_weight_sum(200'000, all);
  CHECK_FALSE(big.exact);
  long double h = 0;
  for (std::uint64_t n = 200'000; n >= 1; --n) h += 1.0L / n;
  CHECK(std::fabs(big.approx - static_cast<double>(h)) <= big.error_bound + 1e-14);
}

TEST_CASE("partial summation identity holds") {
  CHECK(mean_identity_residual(30, PrimeSet::explicit_list(30, {2, 3, 5}), 10) <= 1e-12);
  CHECK(mean_identity_residual(1, PrimeSet::explicit_list(1, {}), 10) == 0.0);
  SplitMix64 rng(9);
  for (int i = 0; i < 5; ++i) CHECK(mean_identity_residual(10'000, random_subset(10'000, 0.4, rng), 20) <= 1e-9);
}

TEST_CASE("budgets") {
  CountConfig cfg;
  cfg.ceiling = 1000;
  CHECK_THROWS_AS(psi_sieve(1001, primes_up_to(1001), cfg), BudgetExceeded);
  CountConfig tight;
  tight.dfs_node_budget = 100;
  CHECK_THROWS_AS(psi_dfs(100'000, primes_up_to(100), tight), ExplosionGuard);
}

TEST_CASE("count rows omit timing") {
  auto j = psi_sieve(30, PrimeSet::explicit_list(30, {2, 3, 5})).to_json();
  CHECK(j.at("value") == 18);
  CHECK_FALSE(j.contains("elapsed"));
}
