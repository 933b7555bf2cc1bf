#include "sievelab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <mpfr.h>

namespace sievelab {

void CompensatedSum::add(double v) noexcept {
  double t = sum_ + v;
  if (std::fabs(sum_) >= std::fabs(v))
    comp_ += (sum_ - t) + v;
  else
    comp_ += (v - t) + sum_;
  sum_ = t;
  abs_ += std::fabs(v);
  ++n_;
}

double CompensatedSum::error_bound() const noexcept {
  // Neumaier: |err| <= 2u|S| + O(n u^2) sum|x_i|; keep a generous constant.
  constexpr double u = 0x1.0p-53;
  return 2.0 * u * std::fabs(value()) + 4.0 * static_cast<double>(n_) * u * u * abs_ + u * abs_ * 1e-3;
}

namespace {

RationalTerm split_sum(std::span<const RationalTerm> t) {
  if (t.size() == 1) return t[0];
  auto mid = t.size() / 2;
  RationalTerm a = split_sum(t.subspan(0, mid));
  RationalTerm b = split_sum(t.subspan(mid));
  RationalTerm r;
  if (a.den == b.den) {
    r.num = a.num + b.num;
    r.den = a.den;
  } else {
    r.num = a.num * b.den + b.num * a.den;
    r.den = a.den * b.den;
  }
  return r;
}

}  // namespace

mpq_class sum_rationals(std::span<const RationalTerm> terms) {
  if (terms.empty()) return mpq_class(0);
  RationalTerm s = split_sum(terms);
  mpq_class q(s.num, s.den);
  q.canonicalize();
  return q;
}

mpq_class exact_rational(double v) {
  mpq_class q;
  mpq_set_d(q.get_mpq_t(), v);
  return q;
}

mpq_class rational_from_double(double v, long max_den) {
  // Best rational approximation via the continued fraction of the exact double.
  mpq_class x = exact_rational(v);
  bool neg = x < 0;
  if (neg) x = -x;
  mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  mpq_class r = x;
  for (int iter = 0; iter < 128; ++iter) {
    mpz_class a = r.get_num() / r.get_den();
    mpz_class h2 = a * h1 + h0, k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    mpq_class frac = r - mpq_class(a);
    if (frac == 0) break;
    r = 1 / frac;
  }
  mpq_class out(h1, k1);
  out.canonicalize();
  return neg ? mpq_class(-out) : out;
}

std::string to_string(const mpq_class& q) { return q.get_str(); }
std::string to_string(const mpz_class& z) { return z.get_str(); }

namespace hp {
namespace {

constexpr mpfr_prec_t kPrec = 256;

struct Real {
  mpfr_t v;
  Real() { mpfr_init2(v, kPrec); }
  ~Real() { mpfr_clear(v); }
  Real(const Real&) = delete;
  Real& operator=(const Real&) = delete;
};

void set_e(Real& r) {
  mpfr_set_ui(r.v, 1, MPFR_RNDN);
  mpfr_exp(r.v, r.v, MPFR_RNDN);
}

Cmp compare_with_tie(const mpz_class& n, const Real& val) {
  Real nn, diff, tol;
  mpfr_set_z(nn.v, n.get_mpz_t(), MPFR_RNDN);
  mpfr_sub(diff.v, nn.v, val.v, MPFR_RNDN);
  mpfr_abs(tol.v, val.v, MPFR_RNDN);
  mpfr_mul_d(tol.v, tol.v, 1e-30, MPFR_RNDN);
  Real ad;
  mpfr_abs(ad.v, diff.v, MPFR_RNDN);
  if (mpfr_cmp(ad.v, tol.v) <= 0) return Cmp::Tie;
  return mpfr_sgn(diff.v) < 0 ? Cmp::Less : Cmp::Greater;
}

}  // namespace

Cmp compare_to_power(const mpz_class& n, double base, double exponent) {
  Real b, e, val;
  mpfr_set_d(b.v, base, MPFR_RNDN);
  mpfr_set_d(e.v, exponent, MPFR_RNDN);
  mpfr_pow(val.v, b.v, e.v, MPFR_RNDN);
  return compare_with_tie(n, val);
}

Cmp compare_to_over_ev(const mpz_class& n, const mpz_class& num, double v) {
  Real e, val;
  set_e(e);
  mpfr_mul_d(e.v, e.v, v, MPFR_RNDN);
  mpfr_set_z(val.v, num.get_mpz_t(), MPFR_RNDN);
  mpfr_div(val.v, val.v, e.v, MPFR_RNDN);
  return compare_with_tie(n, val);
}

mpz_class floor_shift_by_ev(const mpq_class& q, int sign, double v) {
  Real e, val;
  set_e(e);
  mpfr_mul_d(e.v, e.v, v, MPFR_RNDN);
  mpfr_set_q(val.v, q.get_mpq_t(), MPFR_RNDN);
  if (sign >= 0)
    mpfr_add(val.v, val.v, e.v, MPFR_RNDN);
  else
    mpfr_sub(val.v, val.v, e.v, MPFR_RNDN);
  mpz_class out;
  mpfr_get_z(out.get_mpz_t(), val.v, MPFR_RNDD);
  return out;
}

Cmp compare_to_scaled_power(const mpz_class& n, double scale, double base, double exponent) {
  Real b, e, val;
  mpfr_set_d(b.v, base, MPFR_RNDN);
  mpfr_set_d(e.v, exponent, MPFR_RNDN);
  mpfr_pow(val.v, b.v, e.v, MPFR_RNDN);
  mpfr_mul_d(val.v, val.v, scale, MPFR_RNDN);
  return compare_with_tie(n, val);
}

mpz_class floor_exp(double a) {
  Real val;
  mpfr_set_d(val.v, a, MPFR_RNDN);
  mpfr_exp(val.v, val.v, MPFR_RNDN);
  mpz_class out;
  mpfr_get_z(out.get_mpz_t(), val.v, MPFR_RNDD);
  return out;
}

long double power(double base, double exponent) {
  return std::pow(static_cast<long double>(base), static_cast<long double>(exponent));
}

const char* euler_e_digits() { return "2.7182818284590452353602874713526624977572470937000"; }

}  // namespace hp

std::uint64_t SplitMix64::next() noexcept {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  while (true) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  SplitMix64 g(master ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
  g.next();
  return g.next();
}

void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body) {
  if (chunks == 0) return;
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  std::size_t workers = std::min(hw, chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) body(c);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void Fnv1a64::add(std::uint64_t v) noexcept {
  for (int i = 0; i < 8; ++i) {
    h_ ^= (v >> (8 * i)) & 0xffu;
    h_ *= 0x100000001b3ULL;
  }
}

std::uint64_t fnv1a64(std::span<const std::uint64_t> values) noexcept {
  Fnv1a64 h;
  for (auto v : values) h.add(v);
  return h.digest();
}

}  // namespace sievelab
