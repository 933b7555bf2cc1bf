#include "sievelab/prime_sets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "sievelab/errors.hpp"
#include "sievelab/numeric.hpp"

namespace sievelab {

namespace {

const char* kind_name(Descriptor::Kind k) {
  switch (k) {
    case Descriptor::Kind::ExplicitList: return "explicit";
    case Descriptor::Kind::AllPrimes: return "all_primes";
    case Descriptor::Kind::Range: return "range";
    case Descriptor::Kind::PowerIntervalUnion: return "power_interval_union";
    case Descriptor::Kind::Congruence: return "congruence";
    case Descriptor::Kind::Complement: return "complement";
    case Descriptor::Kind::Union: return "union";
    case Descriptor::Kind::Intersection: return "intersection";
    case Descriptor::Kind::Derived: return "derived";
  }
  return "?";
}

std::vector<std::uint32_t> small_primes(std::uint64_t limit) {
  std::vector<char> is(limit + 1, 1);
  std::vector<std::uint32_t> out;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (!is[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= limit; j += i) is[j] = 0;
  }
  return out;
}

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

nlohmann::json Descriptor::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name(kind);
  switch (kind) {
    case Kind::AllPrimes: j["x"] = x; break;
    case Kind::Range: j["x"] = x; j["lo"] = lo; j["hi"] = hi; break;
    case Kind::PowerIntervalUnion: j["x"] = x; j["N"] = n; j["augmented"] = augmented; break;
    case Kind::Congruence: j["x"] = x; j["q"] = q; j["a"] = a; break;
    case Kind::Complement: j["x"] = x; break;
    default: break;
  }
  if (!label.empty()) j["label"] = label;
  if (!children.empty()) {
    j["of"] = nlohmann::json::array();
    for (const auto& c : children) j["of"].push_back(c->to_json());
  }
  return j;
}

// ---------------------------------------------------------------------------
// PrimeSet

PrimeSet PrimeSet::from_sorted(std::uint64_t bound_x, std::vector<std::uint64_t> members, Descriptor d) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] < 2 || members[i] > bound_x)
      throw PreconditionFail("prime set member " + std::to_string(members[i]) + " outside [2, bound_x]");
    if (i && members[i] <= members[i - 1]) throw PreconditionFail("prime set members must be strictly increasing");
  }
  if (bound_x > 0xffffffffULL && !members.empty() && members.back() > 0xffffffffULL)
    throw BudgetExceeded("prime set members above 2^32 are not supported");
  PrimeSet s;
  s.bound_x_ = bound_x;
  s.count_ = members.size();
  s.desc_ = std::make_shared<Descriptor>(std::move(d));
  if (members.size() > kBitsetThreshold) {
    Bits b;
    b.words.assign(((bound_x + 1) / 2 + 63) / 64, 0);
    for (auto p : members) {
      if (p == 2) { b.has_two = true; continue; }
      std::uint64_t i = (p - 1) / 2;
      b.words[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    s.store_ = std::move(b);
  } else {
    std::vector<std::uint32_t> v(members.begin(), members.end());
    s.store_ = std::move(v);
  }
  s.finalize_checksum();
  return s;
}

PrimeSet PrimeSet::explicit_list(std::uint64_t bound_x, std::vector<std::uint64_t> members) {
  return from_sorted(bound_x, std::move(members), Descriptor{});
}

PrimeSet PrimeSet::from_bits(std::uint64_t bound_x, Bits bits, std::size_t count, Descriptor d) {
  PrimeSet s;
  s.bound_x_ = bound_x;
  s.count_ = count;
  s.desc_ = std::make_shared<Descriptor>(std::move(d));
  if (count <= kBitsetThreshold) {
    std::vector<std::uint32_t> v;
    v.reserve(count);
    if (bits.has_two) v.push_back(2);
    for (std::size_t w = 0; w < bits.words.size(); ++w) {
      std::uint64_t word = bits.words[w];
      while (word) {
        int b = std::countr_zero(word);
        word &= word - 1;
        v.push_back(static_cast<std::uint32_t>(2 * (w * 64 + b) + 1));
      }
    }
    s.store_ = std::move(v);
  } else {
    s.store_ = std::move(bits);
  }
  s.finalize_checksum();
  return s;
}

void PrimeSet::finalize_checksum() {
  Fnv1a64 h;
  for (auto p : *this) h.add(p);
  checksum_ = h.digest();
}

bool PrimeSet::contains(std::uint64_t p) const noexcept {
  if (auto* v = std::get_if<std::vector<std::uint32_t>>(&store_)) {
    if (p > 0xffffffffULL) return false;
    return std::binary_search(v->begin(), v->end(), static_cast<std::uint32_t>(p));
  }
  const auto& b = std::get<Bits>(store_);
  if (p == 2) return b.has_two;
  if (p % 2 == 0 || p > bound_x_) return false;
  std::uint64_t i = (p - 1) / 2;
  return (b.words[i / 64] >> (i % 64)) & 1u;
}

std::optional<std::uint64_t> PrimeSet::largest() const {
  if (count_ == 0) return std::nullopt;
  if (auto* v = std::get_if<std::vector<std::uint32_t>>(&store_)) return v->back();
  const auto& b = std::get<Bits>(store_);
  for (std::size_t w = b.words.size(); w-- > 0;) {
    if (b.words[w]) return 2 * (w * 64 + (63 - std::countl_zero(b.words[w]))) + 1;
  }
  return 2;
}

void PrimeSet::const_iterator::settle() {
  if (auto* v = std::get_if<std::vector<std::uint32_t>>(&set_->store_)) {
    if (pos_ < v->size()) cur_ = (*v)[pos_];
    return;
  }
  const auto& b = std::get<Bits>(set_->store_);
  std::uint64_t endpos = 1 + b.words.size() * 64;
  if (pos_ == 0) {
    if (b.has_two) { cur_ = 2; return; }
    pos_ = 1;
  }
  while (pos_ < endpos) {
    std::uint64_t bit = pos_ - 1;
    std::uint64_t w = bit / 64;
    std::uint64_t word = b.words[w] >> (bit % 64);
    if (word) {
      pos_ += std::countr_zero(word);
      cur_ = 2 * (pos_ - 1) + 1;
      return;
    }
    pos_ = 1 + (w + 1) * 64;
  }
  pos_ = endpos;
}

PrimeSet::const_iterator& PrimeSet::const_iterator::operator++() {
  ++pos_;
  settle();
  return *this;
}

PrimeSet::const_iterator PrimeSet::begin() const {
  const_iterator it;
  it.set_ = this;
  it.pos_ = 0;
  it.settle();
  return it;
}

PrimeSet::const_iterator PrimeSet::end() const {
  const_iterator it;
  it.set_ = this;
  if (auto* v = std::get_if<std::vector<std::uint32_t>>(&store_))
    it.pos_ = v->size();
  else
    it.pos_ = 1 + std::get<Bits>(store_).words.size() * 64;
  return it;
}

std::vector<std::uint64_t> PrimeSet::to_vector() const {
  std::vector<std::uint64_t> out;
  out.reserve(count_);
  for (auto p : *this) out.push_back(p);
  return out;
}

PrimeSet PrimeSet::restrict_to(std::uint64_t lo, std::uint64_t hi, std::string label) const {
  std::vector<std::uint64_t> v;
  for (auto p : *this) {
    if (p > hi) break;
    if (p > lo) v.push_back(p);
  }
  Descriptor d;
  d.kind = Descriptor::Kind::Derived;
  d.label = std::move(label);
  d.lo = lo;
  d.hi = hi;
  d.children.push_back(desc_);
  return from_sorted(bound_x_, std::move(v), std::move(d));
}

nlohmann::json PrimeSet::to_json() const {
  return {{"bound_x", bound_x_}, {"descriptor", desc_->to_json()}, {"count", count_}, {"checksum", checksum_}};
}

void PrimeSet::write_member_dump(std::ostream& out) const {
  std::uint64_t prev = 0;
  for (auto p : *this) {
    std::uint64_t d = p - prev;
    prev = p;
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(d >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

std::vector<std::uint64_t> PrimeSet::read_member_dump(std::istream& in) {
  std::vector<std::uint64_t> out;
  std::uint64_t prev = 0;
  unsigned char bytes[8];
  while (in.read(reinterpret_cast<char*>(bytes), 8)) {
    std::uint64_t d = 0;
    for (int i = 0; i < 8; ++i) d |= std::uint64_t{bytes[i]} << (8 * i);
    prev += d;
    out.push_back(prev);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sieving

PrimeSet primes_up_to(std::uint64_t x, const SieveConfig& cfg) {
  if (x > cfg.ceiling)
    throw BudgetExceeded("primes_up_to(" + std::to_string(x) + ") above ceiling " + std::to_string(cfg.ceiling));
  Descriptor d;
  d.kind = Descriptor::Kind::AllPrimes;
  d.x = x;
  if (x < 2) return PrimeSet::from_sorted(x, {}, d);

  const std::uint64_t nbits = (x + 1) / 2;  // odd numbers 1,3,...,<=x
  PrimeSet::Bits bits;
  bits.has_two = true;
  bits.words.assign((nbits + 63) / 64, 0);

  const auto base = small_primes(isqrt(x));
  const std::uint64_t seg = std::max<std::uint64_t>(64, (cfg.segment_bytes / 64) * 64);
  const std::uint64_t nseg = (nbits + seg - 1) / seg;
  std::vector<std::uint64_t> seg_counts(nseg, 0);

  parallel_chunks(nseg, [&](std::size_t s) {
    const std::uint64_t first = s * seg;  // odd index range [first, last)
    const std::uint64_t last = std::min(nbits, first + seg);
    std::vector<unsigned char> buf(last - first, 1);
    if (first == 0) buf[0] = 0;  // the number 1
    for (std::size_t k = 1; k < base.size(); ++k) {
      const std::uint64_t p = base[k];
      const std::uint64_t lo_num = 2 * first + 1;
      std::uint64_t m = std::max(p * p, (lo_num + p - 1) / p * p);
      if (m % 2 == 0) m += p;
      for (std::uint64_t i = (m - 1) / 2; i < last; i += p) buf[i - first] = 0;
    }
    std::uint64_t c = 0;
    for (std::uint64_t i = first; i < last; ++i) {
      if (buf[i - first]) {
        bits.words[i / 64] |= std::uint64_t{1} << (i % 64);
        ++c;
      }
    }
    seg_counts[s] = c;
  });
  std::size_t count = 1 + std::accumulate(seg_counts.begin(), seg_counts.end(), std::uint64_t{0});
  return PrimeSet::from_bits(x, std::move(bits), count, std::move(d));
}

std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi, const SieveConfig& cfg) {
  std::vector<std::uint64_t> out;
  if (hi <= lo || hi < 2) return out;
  if (hi > cfg.ceiling)
    throw BudgetExceeded("primes_in_range upper end " + std::to_string(hi) + " above ceiling");
  const auto base = small_primes(isqrt(hi));
  const std::uint64_t seg = std::max<std::size_t>(1024, cfg.segment_bytes);
  std::vector<unsigned char> buf;
  for (std::uint64_t a = lo + 1; a <= hi; a += seg) {  // segment [a, b]
    std::uint64_t b = std::min(hi, a + seg - 1);
    buf.assign(b - a + 1, 1);
    for (auto p : base) {
      std::uint64_t m = std::max<std::uint64_t>(std::uint64_t{p} * p, (a + p - 1) / p * p);
      for (; m <= b; m += p) buf[m - a] = 0;
    }
    for (std::uint64_t n = a; n <= b; ++n)
      if (n >= 2 && buf[n - a]) out.push_back(n);
  }
  return out;
}

PrimeSet from_power_intervals(std::uint64_t x, unsigned N, bool augmented, const SieveConfig& cfg) {
  if (N < 2) throw PreconditionFail("from_power_intervals needs N >= 2");
  if (x < 16) throw PreconditionFail("from_power_intervals needs x >= 16");
  // Exact integer bounds: p > x^{m/(N+1)}  <=>  p >= floor(root_{N+1}(x^m)) + 1,
  // p < x^{m/N}  <=>  p <= floor(root_N(x^m)) - [exact root].
  struct Window { std::uint64_t lo, hi; };  // inclusive
  std::vector<Window> windows;
  std::uint64_t top = 0;
  const mpz_class X(std::to_string(x));
  for (unsigned m = 1; m + 1 <= N; ++m) {
    mpz_class xm;
    mpz_pow_ui(xm.get_mpz_t(), X.get_mpz_t(), m);
    mpz_class r1, r2;
    mpz_root(r1.get_mpz_t(), xm.get_mpz_t(), N + 1);
    int exact = mpz_root(r2.get_mpz_t(), xm.get_mpz_t(), N);
    mpz_class lo = r1 + 1;
    mpz_class hi = exact ? mpz_class(r2 - 1) : r2;
    if (hi >= lo) {
      windows.push_back({lo.get_ui(), hi.get_ui()});
      top = std::max(top, hi.get_ui());
    }
  }
  std::uint64_t small_cut = 0;
  if (augmented) {
    mpz_class r;
    mpz_root(r.get_mpz_t(), X.get_mpz_t(), static_cast<unsigned long>(N) * N);  // p^{N^2} <= x
    small_cut = r.get_ui();
    top = std::max(top, small_cut);
  }
  Descriptor d;
  d.kind = Descriptor::Kind::PowerIntervalUnion;
  d.x = x;
  d.n = N;
  d.augmented = augmented;
  std::vector<std::uint64_t> members;
  if (top >= 2) {
    auto all = primes_up_to(top, cfg);
    for (auto p : all) {
      bool in = p <= small_cut;
      for (const auto& w : windows) in = in || (p >= w.lo && p <= w.hi);
      if (in) members.push_back(p);
    }
  }
  return PrimeSet::from_sorted(x, std::move(members), std::move(d));
}

PrimeSet from_congruence(std::uint64_t x, std::uint64_t q, std::uint64_t a, const SieveConfig& cfg) {
  if (q < 2) throw PreconditionFail("from_congruence needs q >= 2");
  if (std::gcd(a % q, q) != 1) throw InvalidResidue("gcd(" + std::to_string(a) + "," + std::to_string(q) + ") != 1");
  Descriptor d;
  d.kind = Descriptor::Kind::Congruence;
  d.x = x;
  d.q = q;
  d.a = a % q;
  std::vector<std::uint64_t> members;
  if (x >= 2) {
    auto all = primes_up_to(x, cfg);
    for (auto p : all)
      if (p % q == a % q) members.push_back(p);
  }
  return PrimeSet::from_sorted(x, std::move(members), std::move(d));
}

PrimeSet prime_range(std::uint64_t x, std::uint64_t lo, std::uint64_t hi, const SieveConfig& cfg) {
  hi = std::min(hi, x);
  Descriptor d;
  d.kind = Descriptor::Kind::Range;
  d.x = x;
  d.lo = lo;
  d.hi = hi;
  return PrimeSet::from_sorted(x, primes_in_range(lo, hi, cfg), std::move(d));
}

PrimeSet complement_within(const PrimeSet& P, std::uint64_t x, const SieveConfig& cfg) {
  if (P.bound_x() > x) throw PreconditionFail("complement_within needs P.bound_x <= x");
  auto all = primes_up_to(x, cfg);
  Descriptor d;
  d.kind = Descriptor::Kind::Complement;
  d.x = x;
  d.children.push_back(P.descriptor_ptr());
  std::vector<std::uint64_t> out;
  out.reserve(all.size() >= P.size() ? all.size() - P.size() : 0);
  auto it = P.begin();
  const auto end = P.end();
  for (auto p : all) {
    while (it != end && *it < p) ++it;
    if (it != end && *it == p) continue;
    out.push_back(p);
  }
  return PrimeSet::from_sorted(x, std::move(out), std::move(d));
}

PrimeSet set_union(const PrimeSet& a, const PrimeSet& b) {
  std::vector<std::uint64_t> out;
  auto va = a.to_vector(), vb = b.to_vector();
  std::set_union(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(out));
  Descriptor d;
  d.kind = Descriptor::Kind::Union;
  d.children = {a.descriptor_ptr(), b.descriptor_ptr()};
  return PrimeSet::from_sorted(std::max(a.bound_x(), b.bound_x()), std::move(out), std::move(d));
}

PrimeSet set_intersection(const PrimeSet& a, const PrimeSet& b) {
  std::vector<std::uint64_t> out;
  auto va = a.to_vector(), vb = b.to_vector();
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(out));
  Descriptor d;
  d.kind = Descriptor::Kind::Intersection;
  d.children = {a.descriptor_ptr(), b.descriptor_ptr()};
  return PrimeSet::from_sorted(std::min(a.bound_x(), b.bound_x()), std::move(out), std::move(d));
}

ReciprocalSum reciprocal_sum(const PrimeSet& P, double lo, double hi) {
  if (!(lo < hi)) throw PreconditionFail("reciprocal_sum needs lo < hi");
  ReciprocalSum r;
  CompensatedSum acc;
  std::vector<RationalTerm> terms;
  for (auto p : P) {
    auto pd = static_cast<double>(p);
    if (pd <= lo) continue;
    if (pd > hi) break;
    acc.add(1.0 / pd);
    if (terms.size() <= ReciprocalSum::kExactLimit) terms.push_back({1, mpz_class(std::to_string(p))});
  }
  r.terms = acc.terms();
  if (r.terms <= ReciprocalSum::kExactLimit) {
    r.exact = sum_rationals(terms);
    r.approx = r.exact->get_d();
    r.error_bound = 0.0;
  } else {
    r.approx = acc.value();
    // each 1/p carries a half-ulp rounding on top of the summation error
    r.error_bound = acc.error_bound() + 0x1.0p-53 * r.approx;
  }
  return r;
}

ReciprocalSum reciprocal_sum(const PrimeSet& P) { return reciprocal_sum(P, 0.0, HUGE_VAL); }

double euler_product(const PrimeSet& E) {
  CompensatedSum acc;
  for (auto p : E) acc.add(std::log1p(-1.0 / static_cast<double>(p)));
  return std::exp(acc.value());
}

bool is_prime_mr(std::uint64_t n) {
  if (n < 2) return false;
  static constexpr std::uint64_t bases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
  for (auto b : bases) {
    if (n == b) return true;
    if (n % b == 0) return false;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while (d % 2 == 0) { d /= 2; ++s; }
  for (auto a : bases) {
    std::uint64_t y = powmod(a, d, n);
    if (y == 1 || y == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      y = mulmod(y, y, n);
      if (y == n - 1) { composite = false; break; }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace sievelab
