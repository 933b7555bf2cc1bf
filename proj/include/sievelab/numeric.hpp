#pragma once

// Shared numeric plumbing: compensated summation, exact rational sums,
// high-precision constants and boundary comparisons, the splitmix64 stream,
// and a deterministic chunked parallel-for.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace sievelab {

/// Neumaier-compensated accumulator. `error_bound()` is a conservative bound
/// on the absolute rounding error of `value()`.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + comp_; }
  double error_bound() const noexcept;
  std::size_t terms() const noexcept { return n_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  double abs_ = 0.0;
  std::size_t n_ = 0;
};

/// One term num/den of a rational sum.
struct RationalTerm {
  mpz_class num;
  mpz_class den;
};

/// Exact sum of rational terms by binary splitting; canonicalized once at the end.
mpq_class sum_rationals(std::span<const RationalTerm> terms);

/// Exact value of a double as a rational (every finite double is dyadic).
mpq_class exact_rational(double v);

/// Rational approximation p/q with q <= max_den (continued fractions), used to
/// turn user-facing real parameters into exact endpoints.
mpq_class rational_from_double(double v, long max_den = 1'000'000'000L);

std::string to_string(const mpq_class& q);
std::string to_string(const mpz_class& z);

/// Three-way comparison outcome of an integer against an irrational-or-real
/// bound evaluated at high precision.
enum class Cmp { Less, Greater, Tie };

/// High-precision helpers (MPFR, 256 bits). "Tie" means the two sides agree to
/// within a relative 1e-30, in which case the caller must not guess.
namespace hp {

/// n versus base^(exponent) with real exponent.
Cmp compare_to_power(const mpz_class& n, double base, double exponent);
/// n versus num / (e * v), e Euler's number.
Cmp compare_to_over_ev(const mpz_class& n, const mpz_class& num, double v);
/// floor(q + s * e * v) for rational q, sign s in {-1, +1}. Never a tie for
/// rational v because e is transcendental.
mpz_class floor_shift_by_ev(const mpq_class& q, int sign, double v);
/// n versus scale * base^exponent.
Cmp compare_to_scaled_power(const mpz_class& n, double scale, double base, double exponent);
/// floor(e^a).
mpz_class floor_exp(double a);
/// x^(1/ev) and friends as a long double, for display and coarse filters.
long double power(double base, double exponent);
/// Euler's number to 50 significant digits, as a string.
const char* euler_e_digits();

}  // namespace hp

inline constexpr double kEulerGamma = 0.5772156649015329;
inline constexpr double kExpGamma = 1.7810724179901979;
inline constexpr double kE = 2.718281828459045;

/// splitmix64: deterministic 64-bit stream per seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Uniform double in [0,1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::uint64_t state_;
};

/// Derived sub-stream seed, independent of the thread count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Runs body(chunk) for chunk in [0, chunks) over the available hardware
/// threads. Callers reduce per-chunk results in chunk order, so results do
/// not depend on scheduling.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

/// 64-bit FNV-1a over the little-endian bytes of each value.
std::uint64_t fnv1a64(std::span<const std::uint64_t> values) noexcept;

class Fnv1a64 {
 public:
  void add(std::uint64_t v) noexcept;
  std::uint64_t digest() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace sievelab
