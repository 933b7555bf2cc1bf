#pragma once

// Exact additive combinatorics on integer and prime sets: representation
// counts, log-weighted representation sums, the window pigeonhole, the
// checkers for the integer and prime hypotheses, sumsets and GAPs.
//
// Tuples are ordered throughout: r_{kA}(n) counts (a_1,...,a_k) and
// (a_2,a_1,...) separately.

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"
#include "sievelab/prime_sets.hpp"

namespace sievelab {

/// A subset of the integers in (N/(ev), N/u].
struct WeightedIntegerSet {
  std::uint64_t N = 0;
  double u = 1.0;
  double v = 1.0;
  std::vector<std::uint64_t> elements;

  /// Validates 1 <= u <= v and every element against both bounds; the lower
  /// bound N/(ev) is compared at 256 bits and a tie is refused.
  static WeightedIntegerSet make(std::uint64_t N, double u, double v, std::vector<std::uint64_t> elements);
  /// Every integer in (N/(ev), N/u].
  static WeightedIntegerSet full_interval(std::uint64_t N, double u, double v);

  mpq_class reciprocal_sum() const;
  double reciprocal_sum_approx() const;
  nlohmann::json to_json() const;
};

/// Whether N/(ev) < a <= N/u. Throws PreconditionFail on an unresolvable tie.
bool admissible(std::uint64_t a, std::uint64_t N, double u, double v);

struct RepConfig {
  std::uint64_t cell_budget = 2'000'000'000ULL;   // cap * k
  std::uint64_t exact_weight_budget = 4'000'000;  // |A| * cap * k rational updates
};

/// r_{kA}(n) and sum over representations of 1/(a_1...a_k), for n <= cap.
struct RepTable {
  unsigned k = 0;
  std::uint64_t cap = 0;
  std::vector<std::uint64_t> counts;  // valid unless `escalated`
  std::vector<mpz_class> big_counts;  // filled when a 64-bit count overflowed
  bool escalated = false;
  std::vector<double> weighted;
  double weighted_rel_error = 0.0;  // |approx - exact| <= rel * exact
  std::optional<std::vector<mpq_class>> weighted_exact;

  mpz_class count(std::uint64_t n) const;
  double weight(std::uint64_t n) const { return n <= cap ? weighted[n] : 0.0; }
};

/// Tables for k = 1..k_max built by successive truncated convolutions.
std::vector<RepTable> rep_tables(const std::vector<std::uint64_t>& A, unsigned k_max, std::uint64_t cap,
                                 const RepConfig& cfg = {});
RepTable rep_table(const std::vector<std::uint64_t>& A, unsigned k, std::uint64_t cap, const RepConfig& cfg = {});

struct WindowConfig {
  unsigned min_bins_log2 = 12;
  unsigned max_bins_log2 = 20;
  std::uint64_t verify_tuple_limit = 1'000'000;
};

struct WindowResult {
  unsigned k = 0;
  double beta_lower = 0.0;  // certified
  double beta_upper = 0.0;
  std::optional<double> beta_verified;  // exhaustive check at k when feasible
  double guarantee = 0.0;               // y / x
  unsigned bins_log2 = 0;
  std::vector<std::pair<double, double>> per_k;  // [lower, upper] for k = 1..K
  nlohmann::json to_json() const;
};

/// Best k <= x/y for the normalized weighted mass of k-tuples from B (all in
/// (y, z]) whose sum lies in (x - z, x]. Discretized with exact dyadic bins;
/// throws DiscretizationInconclusive if the guarantee cannot be certified.
WindowResult window_best_k(const std::vector<double>& B, const std::vector<double>& w, double y, double z, double x,
                           const WindowConfig& cfg = {});

struct ProductWindowResult {
  unsigned ell = 0;
  double K = 0.0;
  mpq_class mass;  // sum over ordered ell-tuples of 1/(q_1...q_ell)
  mpq_class recip_sum;
  double normalized = 0.0;  // mass / recip_sum^ell
  bool guarantee_holds = false;
  std::vector<double> per_ell;
  nlohmann::json to_json() const;
};

/// Over ell <= K = ev log X / log x, the ell maximizing the normalized mass of
/// ordered prime tuples with X x^{-1/u} < q_1...q_ell <= X.
ProductWindowResult prime_product_window(const PrimeSet& P, double x, double u, double v, double X,
                                         std::uint64_t node_budget = 50'000'000);

struct HypAReport {
  bool precondition_met = false;
  double lambda2 = 0.0;
  double recip_sum = 0.0;
  unsigned k = 0;
  std::uint64_t n = 0;
  double lhs = 0.0;
  std::optional<mpq_class> lhs_exact;
  double implied_alpha = 0.0;
  struct Row {
    unsigned k;
    std::uint64_t n;
    double lhs;
    double alpha;
  };
  std::vector<Row> rows;  // best n for each admissible k
  nlohmann::json to_json() const;
};

/// Searches integer k in [u, ev] and n in [N-k, N] for the largest
/// log-weighted representation sum. An unmet antecedent is flagged.
HypAReport hypA_check(const WeightedIntegerSet& A, double lambda2, const RepConfig& cfg = {});

/// |{(b_1..b_k) in B^k : N-k <= sum <= N}|.
mpz_class thm71_count(const WeightedIntegerSet& B, unsigned k, const RepConfig& cfg = {});

std::set<std::int64_t> sumset(const std::set<std::int64_t>& A, const std::set<std::int64_t>& B);
std::set<std::int64_t> restricted_sumset(const std::set<std::pair<std::int64_t, std::int64_t>>& E);

struct PopularPairSet {
  std::vector<std::int64_t> base;
  double delta = 0.0;
  double threshold = 0.0;
  std::set<std::pair<std::int64_t, std::int64_t>> pairs;
  std::size_t doubling_size = 0;    // |2B|
  std::size_t restricted_size = 0;  // |B +_E B|
  bool bound_holds = false;         // |E| >= (1 - delta^2)|B|^2
};

PopularPairSet popular_pairs(const std::vector<std::int64_t>& B, double delta);

/// {x0 + sum l_j x_j : |l_j| <= L_j}.
struct GAParithmetic {
  std::int64_t x0 = 0;
  std::vector<std::int64_t> steps;
  std::vector<std::uint64_t> bounds;

  std::vector<std::int64_t> elements() const;  // sorted, distinct
  bool proper() const;
};

struct GapReport {
  std::size_t p_size = 0;
  std::size_t q_size = 0;
  double rho = 0.0;
  double required = 0.0;  // (delta |P|)^{k-1}
  double min_ratio = 0.0;
  bool holds = false;
  nlohmann::json to_json() const;
};

GapReport gap_rep_check(const GAParithmetic& P, unsigned k, double delta);

struct HypPReport {
  bool precondition_met = false;
  bool delta_in_range = false;
  double recip_sum = 0.0;
  unsigned k = 0;
  mpq_class lhs;
  double implied_pi = 0.0;
  struct Row {
    unsigned k;
    double lhs;
    double pi;
  };
  std::vector<Row> rows;
  nlohmann::json to_json() const;
};

/// Searches k in [u, ev] for the mass of ordered prime k-tuples with product in
/// ((1 - delta) x, x).
HypPReport hypP_check(const PrimeSet& P, std::uint64_t x, double u, double v, double delta, double lambda1,
                      std::uint64_t node_budget = 50'000'000);

struct PrimesFromA {
  PrimeSet primes;
  double x_log = 0.0;  // x = e^{N+1}
  double recip_primes = 0.0;
  double recip_a = 0.0;
  double relative_gap = 0.0;
  double bound = 0.0;  // 5 v^2 / N
};

/// Primes in the union of (e^a, e^{a+1}) over a in A.
PrimesFromA a_to_primes(const WeightedIntegerSet& A);

struct AFromPrimes {
  WeightedIntegerSet A;
  double rho = 0.0;
  double N_real = 0.0;
  double eta = 0.0;
  std::vector<std::pair<std::uint64_t, double>> S;  // (a, S_a)
  double recip_primes = 0.0;
  double recip_a = 0.0;
};

/// The integer set {a : S_a >= eta/(4 a log(ev)) sum 1/p} with S_a the prime
/// reciprocal mass in [rho^a, rho^{a+1}), rho = 1 + delta/(2ev).
AFromPrimes p_to_a(const PrimeSet& P, std::uint64_t x, double u, double v, double delta, double lambda2);

}  // namespace sievelab
