#pragma once

// Prime generation at scale and the structured prime sets the experiments are
// built from. A PrimeSet is immutable once constructed.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"

namespace sievelab {

struct SieveConfig {
  std::uint64_t ceiling = 2'000'000'000ULL;  // largest x primes_up_to accepts
  std::size_t segment_bytes = std::size_t{1} << 20;
};

/// Construction recipe carried alongside the members, for reports.
struct Descriptor {
  enum class Kind {
    ExplicitList,
    AllPrimes,
    Range,               // (lo, hi]
    PowerIntervalUnion,  // (x, N, augmented)
    Congruence,          // p = a mod q, p <= x
    Complement,          // primes <= x not in child
    Union,
    Intersection,
    Derived,             // built by a transform (label says which)
  };
  Kind kind = Kind::ExplicitList;
  std::uint64_t x = 0;
  std::uint64_t lo = 0, hi = 0;
  std::uint64_t n = 0;
  bool augmented = false;
  std::uint64_t q = 0, a = 0;
  std::string label;
  std::vector<std::shared_ptr<const Descriptor>> children;

  nlohmann::json to_json() const;
};

class PrimeSet {
 public:
  /// Members above this count are stored as a bitset over odd integers.
  static constexpr std::size_t kBitsetThreshold = 10'000'000;

  PrimeSet() = default;

  /// Takes a sorted, duplicate-free list of primes <= bound_x. Order and bound
  /// are validated; primality is the caller's contract (tests verify it).
  static PrimeSet from_sorted(std::uint64_t bound_x, std::vector<std::uint64_t> members, Descriptor d);
  static PrimeSet explicit_list(std::uint64_t bound_x, std::vector<std::uint64_t> members);

  std::uint64_t bound_x() const noexcept { return bound_x_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  bool contains(std::uint64_t p) const noexcept;
  bool is_bitset() const noexcept { return std::holds_alternative<Bits>(store_); }
  const Descriptor& descriptor() const noexcept { return *desc_; }
  std::shared_ptr<const Descriptor> descriptor_ptr() const noexcept { return desc_; }
  std::uint64_t checksum() const noexcept { return checksum_; }
  std::optional<std::uint64_t> largest() const;

  class const_iterator {
   public:
    using value_type = std::uint64_t;
    using difference_type = std::ptrdiff_t;
    const_iterator() = default;
    std::uint64_t operator*() const noexcept { return cur_; }
    const_iterator& operator++();
    const_iterator operator++(int) { auto t = *this; ++*this; return t; }
    bool operator==(const const_iterator& o) const noexcept { return pos_ == o.pos_; }

   private:
    friend class PrimeSet;
    const PrimeSet* set_ = nullptr;
    std::uint64_t pos_ = 0;  // index (vector) or bit position + 1 sentinel (bits)
    std::uint64_t cur_ = 0;
    void settle();
  };
  const_iterator begin() const;
  const_iterator end() const;

  /// Materialized members; cheap for vector storage.
  std::vector<std::uint64_t> to_vector() const;

  /// Members in (lo, hi] as a new set bounded by bound_x.
  PrimeSet restrict_to(std::uint64_t lo, std::uint64_t hi, std::string label = "restrict") const;

  nlohmann::json to_json() const;
  /// Binary member dump: little-endian 64-bit deltas (first delta is from 0).
  void write_member_dump(std::ostream& out) const;
  static std::vector<std::uint64_t> read_member_dump(std::istream& in);

 private:
  struct Bits {
    bool has_two = false;
    std::vector<std::uint64_t> words;  // bit i <-> odd number 2i+1
  };
  std::uint64_t bound_x_ = 0;
  std::size_t count_ = 0;
  std::uint64_t checksum_ = 0xcbf29ce484222325ULL;
  std::variant<std::vector<std::uint32_t>, Bits> store_;
  std::shared_ptr<const Descriptor> desc_ = std::make_shared<Descriptor>();

  friend PrimeSet primes_up_to(std::uint64_t x, const SieveConfig& cfg);
  static PrimeSet from_bits(std::uint64_t bound_x, Bits bits, std::size_t count, Descriptor d);
  void finalize_checksum();
};

/// All primes <= x, segmented sieve. Throws BudgetExceeded above cfg.ceiling.
PrimeSet primes_up_to(std::uint64_t x, const SieveConfig& cfg = {});

/// Primes in (lo, hi] without materializing primes below lo.
std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi, const SieveConfig& cfg = {});

/// Union over 1 <= m <= N-1 of primes in (x^{m/(N+1)}, x^{m/N}); with
/// `augmented`, also every prime <= x^{1/N^2}. Boundaries decided exactly.
PrimeSet from_power_intervals(std::uint64_t x, unsigned N, bool augmented, const SieveConfig& cfg = {});

/// Primes p <= x with p = a (mod q). Throws InvalidResidue unless gcd(a,q)=1.
PrimeSet from_congruence(std::uint64_t x, std::uint64_t q, std::uint64_t a, const SieveConfig& cfg = {});

/// Primes in (lo, hi] tagged with bound x >= hi.
PrimeSet prime_range(std::uint64_t x, std::uint64_t lo, std::uint64_t hi, const SieveConfig& cfg = {});

/// {primes <= x} \ P. Requires P.bound_x() <= x.
PrimeSet complement_within(const PrimeSet& P, std::uint64_t x, const SieveConfig& cfg = {});

PrimeSet set_union(const PrimeSet& a, const PrimeSet& b);
PrimeSet set_intersection(const PrimeSet& a, const PrimeSet& b);

struct ReciprocalSum {
  std::optional<mpq_class> exact;  // present when at most kExactLimit terms
  double approx = 0.0;
  double error_bound = 0.0;
  std::size_t terms = 0;
  static constexpr std::size_t kExactLimit = 10'000;
};

/// Sum of 1/p over members p in (lo, hi].
ReciprocalSum reciprocal_sum(const PrimeSet& P, double lo, double hi);
ReciprocalSum reciprocal_sum(const PrimeSet& P);

/// prod_{p in E} (1 - 1/p) via compensated summed logarithms.
double euler_product(const PrimeSet& E);

/// Deterministic Miller-Rabin, valid for all n < 3.3e24 (so all 64-bit n).
bool is_prime_mr(std::uint64_t n);

}  // namespace sievelab
