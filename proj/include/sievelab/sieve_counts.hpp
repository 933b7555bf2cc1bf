#pragma once

// Exact counts of unsieved integers: Psi(x;P), interval counts S(T,T+x;E),
// Psi_k, and logarithmic-weight sums.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"
#include "sievelab/prime_sets.hpp"

namespace sievelab {

struct CountConfig {
  std::uint64_t ceiling = 1'000'000'000ULL;
  std::size_t segment = std::size_t{1} << 20;
  std::uint64_t dfs_node_budget = 100'000'000ULL;
  SieveConfig primes{};
};

enum class CountMethod { IntervalSieve, SmoothDFS };
const char* method_name(CountMethod m);

struct CountResult {
  std::uint64_t value = 0;
  CountMethod method = CountMethod::IntervalSieve;
  std::uint64_t x = 0;
  std::uint64_t set_checksum = 0;
  std::chrono::duration<double> elapsed{};

  /// {x, set_checksum, method, value}. Timing is excluded so rows reproduce byte-for-byte.
  nlohmann::json to_json() const;
};

struct LogWeightResult {
  std::optional<mpq_class> exact;
  double approx = 0.0;
  double error_bound = 0.0;
  std::size_t term_count = 0;
  std::uint64_t x = 0;
  std::uint64_t set_checksum = 0;
  static constexpr std::size_t kExactLimit = 100'000;

  nlohmann::json to_json() const;
};

/// Psi(x;P): n <= x with no prime factor in E = {p <= x} \ P, by crossing out
/// multiples of each p in E over a segmented array. n = 1 always counts.
CountResult psi_sieve(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg = {});

/// Same count by depth-first enumeration of P-smooth products. Throws
/// ExplosionGuard past cfg.dfs_node_budget.
CountResult psi_dfs(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg = {});

/// Integers n in (T0, T0+x] divisible by no member of E.
CountResult interval_count(std::uint64_t T0, std::uint64_t x, const PrimeSet& E, const CountConfig& cfg = {});

/// Squarefree n <= x with exactly k prime factors, all in P.
CountResult psi_k(std::uint64_t x, const PrimeSet& P, unsigned k, const CountConfig& cfg = {});

/// The sorted list of n <= x all of whose prime factors lie in P.
std::vector<std::uint64_t> survivors(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg = {});

/// Psi(t;P) at each checkpoint t (ascending, all <= x) from one sieve pass.
std::vector<std::uint64_t> psi_profile(std::uint64_t x, const PrimeSet& P, std::span<const std::uint64_t> checkpoints,
                                       const CountConfig& cfg = {});

/// Sum of 1/n over n <= x with all prime factors in P.
LogWeightResult log_weight_sum(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg = {});

/// max over `grid` log-spaced checkpoints t <= x of
/// | sum_{n<=t} 1/n  -  Psi(t)/t - int_1^t Psi(s)/s^2 ds |,
/// with the integral taken exactly over the step function Psi.
double mean_identity_residual(std::uint64_t x, const PrimeSet& P, unsigned grid, const CountConfig& cfg = {});

}  // namespace sievelab
