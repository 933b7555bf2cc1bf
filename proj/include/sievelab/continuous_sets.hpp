#pragma once

// Open subsets of (0,1] built from finitely many rational intervals, carrying
// the measure dt/t: masses, exact reachability of 1 by finite sums, simplex
// integrals by grid convolution and by Monte Carlo, and the continuous window
// pigeonhole.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"
#include "sievelab/discrete_comb.hpp"

namespace sievelab {

struct OpenInterval {
  mpq_class a;  // excluded
  mpq_class b;  // excluded
};

/// Sorted disjoint open intervals with 0 < a < b <= 1. Overlapping intervals
/// merge; intervals that only touch stay separate because the shared point is
/// not in the set.
class OpenIntervalSet {
 public:
  OpenIntervalSet() = default;
  explicit OpenIntervalSet(std::vector<OpenInterval> parts);

  static OpenIntervalSet from_doubles(const std::vector<std::pair<double, double>>& parts, long max_den = 1'000'000);
  /// T_N = union over j = 1..N of (j/(N+1), j/N).
  static OpenIntervalSet t_family(unsigned N);

  const std::vector<OpenInterval>& intervals() const noexcept { return parts_; }
  std::size_t size() const noexcept { return parts_.size(); }
  bool empty() const noexcept { return parts_.empty(); }
  bool contains(const mpq_class& t) const;
  bool contains(double t) const;
  mpq_class inf() const;
  mpq_class sup() const;
  /// Intersection with the open interval (lo, hi).
  OpenIntervalSet clip(const mpq_class& lo, const mpq_class& hi) const;

  nlohmann::json to_json() const;
  static OpenIntervalSet from_json(const nlohmann::json& j);

 private:
  std::vector<OpenInterval> parts_;
};

/// Sum of log(b/a) over the components (256-bit evaluation).
double mass(const OpenIntervalSet& T);

struct Reachability {
  bool reachable = false;
  unsigned k = 0;
  std::vector<mpq_class> witness;       // t_1..t_k in T summing to exactly 1
  unsigned checked_up_to = 0;           // all k <= this were examined
  std::vector<std::size_t> components;  // size of the k-fold sum set per k
  nlohmann::json to_json() const;
};

/// Exact decision whether 1 = t_1 + ... + t_k for some k <= k_max, t_i in T.
Reachability reachable_one(const OpenIntervalSet& T, unsigned k_max, std::size_t component_limit = 1'000'000);

struct SimplexResult {
  unsigned k = 0;
  std::uint64_t M = 0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double error_bound = 0.0;  // |value - true| <= error_bound
  nlohmann::json to_json() const;
};

/// Integral over t_1+...+t_k = 1, t_i in T, of dt_1...dt_{k-1}/(t_1...t_k),
/// from the (k-1)-fold convolution of exact per-bin dt/t masses on an
/// M-bin grid of [0,1]. Throws ResolutionTooCoarse when error_bound > tol.
SimplexResult simplex_integral_conv(const OpenIntervalSet& T, unsigned k, std::uint64_t M,
                                   double tol = std::numeric_limits<double>::infinity());

struct MonteCarloResult {
  unsigned k = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double std_error = 0.0;
  nlohmann::json to_json() const;
};

/// Importance sampling of t_1..t_{k-1} from dt/t on T; seeded and
/// independent of the thread count.
MonteCarloResult simplex_integral_mc(const OpenIntervalSet& T, unsigned k, std::uint64_t samples,
                                     std::uint64_t seed);

/// k-fold convolution of the per-bin masses of dt/t on T over [0, s_max].
struct MassDensityGrid {
  std::uint64_t M = 0;
  double s_max = 0.0;
  std::vector<double> values;
  double total_mass = 0.0;
  double error_bound = 0.0;

  /// Header {M, s_max, total_mass, error_bound} then M little-endian doubles.
  void write_binary(std::ostream& out) const;
};

MassDensityGrid convolution_grid(const OpenIntervalSet& T, unsigned k, std::uint64_t M, double s_max);

struct HypTReport {
  bool precondition_met = false;
  double lambda3 = 0.0;
  double mass = 0.0;
  unsigned k = 0;
  double integral = 0.0;
  double error_bound = 0.0;
  double implied_tau = 0.0;
  struct Row {
    unsigned k;
    double integral;
    double error_bound;
    double tau;
  };
  std::vector<Row> rows;
  nlohmann::json to_json() const;
};

/// Scans integer k in [u, ev]; T must lie inside (1/(ev), 1/u).
HypTReport hypT_check(const OpenIntervalSet& T, double u, double v, double lambda3, std::uint64_t M = 100'000);

struct WindowSearchResult {
  unsigned ell = 0;
  double mass_lower = 0.0;  // certified lower bound of the windowed mass
  double mass_upper = 0.0;
  double required = 0.0;    // mass(T)^ell / (evw)
  bool guarantee_certified = false;
  bool guarantee_refuted = false;
  std::uint64_t M = 0;
  nlohmann::json to_json() const;
};

/// Over ell <= evw, the ell-fold dt/t mass of sums in (w - 1/v, w].
WindowSearchResult window_search(const OpenIntervalSet& T, double v, double w, std::uint64_t M = 1 << 14,
                                 std::uint64_t M_max = 1 << 20);

struct TToA {
  WeightedIntegerSet A;
  double mass_T = 0.0;
  double recip_A = 0.0;
  double discrepancy = 0.0;
  std::size_t empty_intervals = 0;  // shrunken intervals with no integers
};

/// {a : alpha_i N + 2ev < a < beta_i N - 2ev} over the components of T.
TToA t_to_a(const OpenIntervalSet& T, std::uint64_t N, double u, double v);

struct AToT {
  OpenIntervalSet T;
  double mass_T = 0.0;
  double recip_A = 0.0;
  double discrepancy = 0.0;
};

/// Union of (a/N, (a+1)/N) over a in A.
AToT a_to_t(const WeightedIntegerSet& A);

}  // namespace sievelab
