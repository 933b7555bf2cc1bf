#include "sievelab/discrete_comb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "sievelab/errors.hpp"
#include "sievelab/numeric.hpp"

namespace sievelab {

using u128 = unsigned __int128;

namespace {

double ev_of(double v) { return kE * v; }

unsigned k_low(double u) { return static_cast<unsigned>(std::ceil(u)); }
// e*v is irrational for rational v, so floor() of the double is safe away from
// the (unreachable) exact-integer case.
unsigned k_high(double v) { return static_cast<unsigned>(std::floor(ev_of(v))); }

std::string u128_str(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

mpz_class to_mpz(u128 v) { return mpz_class(u128_str(v)); }

mpq_class qpow(const mpq_class& b, unsigned e) {
  mpq_class r(1);
  for (unsigned i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightedIntegerSet

bool admissible(std::uint64_t a, std::uint64_t N, double u, double v) {
  mpq_class lhs = mpq_class(mpz_class(std::to_string(a))) * exact_rational(u);
  if (lhs > mpq_class(mpz_class(std::to_string(N)))) return false;
  switch (hp::compare_to_over_ev(mpz_class(std::to_string(a)), mpz_class(std::to_string(N)), v)) {
    case Cmp::Greater:
      return true;
    case Cmp::Less:
      return false;
    case Cmp::Tie:
      break;
  }
  throw PreconditionFail("element " + std::to_string(a) + " is within rounding of N/(ev)");
}

WeightedIntegerSet WeightedIntegerSet::make(std::uint64_t N, double u, double v, std::vector<std::uint64_t> elements) {
  if (!(u >= 1.0 && v >= u)) throw PreconditionFail("need 1 <= u <= v");
  std::sort(elements.begin(), elements.end());
  if (std::adjacent_find(elements.begin(), elements.end()) != elements.end())
    throw PreconditionFail("duplicate elements");
  for (auto a : elements)
    if (!admissible(a, N, u, v))
      throw PreconditionFail("element " + std::to_string(a) + " outside (N/(ev), N/u]");
  return WeightedIntegerSet{N, u, v, std::move(elements)};
}

WeightedIntegerSet WeightedIntegerSet::full_interval(std::uint64_t N, double u, double v) {
  if (!(u >= 1.0 && v >= u)) throw PreconditionFail("need 1 <= u <= v");
  const double lo = static_cast<double>(N) / ev_of(v);
  auto start = static_cast<std::uint64_t>(std::max(1.0, std::floor(lo) - 1));
  auto stop = static_cast<std::uint64_t>(std::floor(static_cast<double>(N) / u)) + 1;
  std::vector<std::uint64_t> el;
  for (std::uint64_t a = start; a <= stop; ++a) {
    // interior points need no high-precision check
    if (static_cast<double>(a) > lo + 2 && static_cast<double>(a) * u < static_cast<double>(N) - 2 * u)
      el.push_back(a);
    else if (admissible(a, N, u, v))
      el.push_back(a);
  }
  return WeightedIntegerSet{N, u, v, std::move(el)};
}

mpq_class WeightedIntegerSet::reciprocal_sum() const {
  std::vector<RationalTerm> t;
  t.reserve(elements.size());
  for (auto a : elements) t.push_back({mpz_class(1), mpz_class(std::to_string(a))});
  return sum_rationals(t);
}

double WeightedIntegerSet::reciprocal_sum_approx() const {
  CompensatedSum s;
  for (auto a : elements) s.add(1.0 / static_cast<double>(a));
  return s.value();
}

nlohmann::json WeightedIntegerSet::to_json() const {
  return {{"N", N}, {"u", u}, {"v", v}, {"size", elements.size()}, {"checksum", fnv1a64(elements)}};
}

// ---------------------------------------------------------------------------
// Representation tables

mpz_class RepTable::count(std::uint64_t n) const {
  if (n > cap) return 0;
  if (escalated) return big_counts[n];
  return mpz_class(std::to_string(counts[n]));
}

std::vector<RepTable> rep_tables(const std::vector<std::uint64_t>& A_in, unsigned k_max, std::uint64_t cap,
                                 const RepConfig& cfg) {
  if (k_max < 1) throw PreconditionFail("rep_table needs k >= 1");
  if (static_cast<long double>(cap + 1) * k_max > static_cast<long double>(cfg.cell_budget))
    throw BudgetExceeded("cap * k exceeds the table budget");
  std::vector<std::uint64_t> A(A_in);
  std::sort(A.begin(), A.end());
  A.erase(std::unique(A.begin(), A.end()), A.end());
  std::vector<std::uint64_t> Ac;  // elements that can appear below cap
  for (auto a : A)
    if (a <= cap) Ac.push_back(a);

  const bool exact = static_cast<long double>(Ac.size()) * (cap + 1) * k_max <=
                     static_cast<long double>(cfg.exact_weight_budget);
  const std::size_t len = cap + 1;
  const std::size_t chunk = std::max<std::size_t>(4096, len / 64 + 1);
  const std::size_t chunks = (len + chunk - 1) / chunk;

  std::vector<RepTable> out;
  out.reserve(k_max);
  RepTable first;
  first.k = 1;
  first.cap = cap;
  first.counts.assign(len, 0);
  first.weighted.assign(len, 0.0);
  for (auto a : Ac) {
    first.counts[a] = 1;
    first.weighted[a] = 1.0 / static_cast<double>(a);
  }
  if (exact) {
    first.weighted_exact.emplace(len);
    for (auto a : Ac) (*first.weighted_exact)[a] = mpq_class(1, a);
  }
  first.weighted_rel_error = 0x1.0p-53;
  out.push_back(std::move(first));

  bool overflow = false;
  for (unsigned k = 2; k <= k_max; ++k) {
    const RepTable& prev = out.back();
    RepTable cur;
    cur.k = k;
    cur.cap = cap;
    cur.counts.assign(len, 0);
    cur.weighted.assign(len, 0.0);
    if (exact) cur.weighted_exact.emplace(len);
    std::atomic<bool> ovf{false};
    parallel_chunks(chunks, [&](std::size_t c) {
      const std::size_t lo = c * chunk, hi = std::min(len, lo + chunk);
      for (std::size_t n = lo; n < hi; ++n) {
        std::uint64_t cnt = 0;
        double wsum = 0.0;
        for (auto a : Ac) {
          if (a > n) break;
          std::uint64_t pc = prev.counts[n - a];
          if (pc == 0) continue;
          if (__builtin_add_overflow(cnt, pc, &cnt)) ovf = true;
          wsum += prev.weighted[n - a] / static_cast<double>(a);
        }
        cur.counts[n] = cnt;
        cur.weighted[n] = wsum;
        if (exact) {
          mpq_class q(0);
          for (auto a : Ac) {
            if (a > n) break;
            const mpq_class& pq = (*prev.weighted_exact)[n - a];
            if (pq != 0) q += pq / mpq_class(a);
          }
          (*cur.weighted_exact)[n] = q;
        }
      }
    });
    if (ovf || prev.escalated) overflow = true;
    // positive terms only: each layer adds at most |A| + 1 roundings
    cur.weighted_rel_error = prev.weighted_rel_error + static_cast<double>(Ac.size() + 2) * 0x1.0p-53;
    out.push_back(std::move(cur));
  }

  if (overflow) {
    std::vector<mpz_class> prev(len);
    for (auto a : Ac) prev[a] = 1;
    out[0].escalated = true;
    out[0].big_counts = prev;
    for (unsigned k = 2; k <= k_max; ++k) {
      std::vector<mpz_class> cur(len);
      parallel_chunks(chunks, [&](std::size_t c) {
        const std::size_t lo = c * chunk, hi = std::min(len, lo + chunk);
        for (std::size_t n = lo; n < hi; ++n)
          for (auto a : Ac) {
            if (a > n) break;
            cur[n] += prev[n - a];
          }
      });
      out[k - 1].escalated = true;
      out[k - 1].big_counts = cur;
      out[k - 1].counts.clear();
      prev = std::move(cur);
    }
  }
  return out;
}

RepTable rep_table(const std::vector<std::uint64_t>& A, unsigned k, std::uint64_t cap, const RepConfig& cfg) {
  auto all = rep_tables(A, k, cap, cfg);
  return std::move(all.back());
}

// ---------------------------------------------------------------------------
// Window pigeonhole over reals

nlohmann::json WindowResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < per_k.size(); ++i)
    rows.push_back({{"k", i + 1}, {"lower", per_k[i].first}, {"upper", per_k[i].second}});
  nlohmann::json j{{"k", k},
                   {"beta_lower", beta_lower},
                   {"beta_upper", beta_upper},
                   {"guarantee", guarantee},
                   {"bins_log2", bins_log2},
                   {"per_k", rows}};
  j["beta_verified"] = beta_verified ? nlohmann::json(*beta_verified) : nlohmann::json(nullptr);
  return j;
}

namespace {

// Exhaustive normalized mass of k-tuples with sum in (lo, hi]. Sums are long
// double; near a boundary the exact dyadic sum decides.
double exhaustive_beta(const std::vector<double>& B, const std::vector<double>& pw, unsigned k, double lo,
                       double hi) {
  long double total = 0;
  std::vector<std::size_t> idx(k, 0);
  const long double tol = 1e-12L * std::max(1.0, std::fabs(hi));
  while (true) {
    long double s = 0, w = 1;
    for (auto i : idx) {
      s += B[i];
      w *= pw[i];
    }
    bool in;
    if (std::fabs(static_cast<double>(s - lo)) > tol && std::fabs(static_cast<double>(s - hi)) > tol) {
      in = s > lo && s <= hi;
    } else {
      mpq_class q(0);
      for (auto i : idx) q += exact_rational(B[i]);
      in = q > exact_rational(lo) && q <= exact_rational(hi);
    }
    if (in) total += w;
    std::size_t d = 0;
    while (d < k && ++idx[d] == B.size()) idx[d++] = 0;
    if (d == k) break;
  }
  return static_cast<double>(total);
}

}  // namespace

WindowResult window_best_k(const std::vector<double>& B, const std::vector<double>& w, double y, double z, double x,
                           const WindowConfig& cfg) {
  if (!(0 < y && y < z && z <= x)) throw PreconditionFail("need 0 < y < z <= x");
  if (B.empty() || B.size() != w.size()) throw PreconditionFail("B and weights must be nonempty and aligned");
  for (std::size_t i = 0; i < B.size(); ++i) {
    if (!(B[i] > y && B[i] <= z)) throw PreconditionFail("element outside (y, z]");
    if (!(w[i] > 0)) throw PreconditionFail("weights must be positive");
  }
  CompensatedSum W;
  for (double wi : w) W.add(wi);
  std::vector<double> pw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) pw[i] = w[i] / W.value();

  const auto K = static_cast<unsigned>(std::floor(x / y));
  const double guarantee = y / x;
  const double lo = x - z, hi = x;
  WindowResult best;
  best.guarantee = guarantee;

  for (unsigned bl = cfg.min_bins_log2; bl <= cfg.max_bins_log2; ++bl) {
    // dyadic bin width: b / h and S * h are exact
    const int e = static_cast<int>(std::floor(std::log2(x))) + 1 - static_cast<int>(bl);
    const double h = std::ldexp(1.0, e);
    const auto M = static_cast<std::size_t>(std::floor(x / h)) + 1;
    std::map<std::size_t, double> hist;
    for (std::size_t i = 0; i < B.size(); ++i) hist[static_cast<std::size_t>(std::floor(B[i] / h))] += pw[i];
    std::vector<std::pair<std::size_t, double>> bins(hist.begin(), hist.end());

    std::vector<double> layer(M, 0.0);
    for (auto [b, m] : bins)
      if (b < M) layer[b] += m;
    const double eps = 0x1.0p-53 * static_cast<double>(B.size() + 4);
    std::vector<std::pair<double, double>> per_k;
    for (unsigned k = 1; k <= K; ++k) {
      if (k > 1) {
        std::vector<double> next(M, 0.0);
        std::vector<std::size_t> chunk_starts;
        const std::size_t chunk = std::max<std::size_t>(1024, M / 64 + 1);
        parallel_chunks((M + chunk - 1) / chunk, [&](std::size_t c) {
          const std::size_t a = c * chunk, b = std::min(M, a + chunk);
          for (std::size_t S = a; S < b; ++S) {
            double acc = 0.0;
            for (auto [bi, m] : bins) {
              if (bi > S) break;
              acc += layer[S - bi] * m;
            }
            next[S] = acc;
          }
        });
        layer = std::move(next);
      }
      double certain = 0.0, possible = 0.0;
      for (std::size_t S = 0; S < M; ++S) {
        if (layer[S] == 0.0) continue;
        const double s_lo = static_cast<double>(S) * h;
        const double s_hi = static_cast<double>(S + k) * h;  // sum < s_hi
        if (s_lo > lo && s_hi <= hi) certain += layer[S];
        if (s_lo <= hi && s_hi > lo) possible += layer[S];
      }
      const double rel = eps * k + 0x1.0p-52 * static_cast<double>(M);
      per_k.emplace_back(std::max(0.0, certain * (1 - rel)), std::min(1.0, possible * (1 + rel)));
    }
    unsigned arg = 0;
    for (unsigned k = 1; k < per_k.size(); ++k)
      if (per_k[k].first > per_k[arg].first) arg = k;
    best.k = arg + 1;
    best.beta_lower = per_k[arg].first;
    best.beta_upper = per_k[arg].second;
    best.bins_log2 = bl;
    best.per_k = per_k;
    if (best.beta_lower >= guarantee) break;
  }

  auto tuple_count = [&](unsigned k) {
    long double t = 1;
    for (unsigned i = 0; i < k; ++i) t *= static_cast<long double>(B.size());
    return t;
  };

  if (best.beta_lower < guarantee) {
    // bins could not certify: try exhaustive evaluation on the most promising k
    unsigned arg = 0;
    for (unsigned k = 1; k < best.per_k.size(); ++k)
      if (best.per_k[k].second > best.per_k[arg].second) arg = k;
    if (tuple_count(arg + 1) <= static_cast<long double>(cfg.verify_tuple_limit)) {
      double b = exhaustive_beta(B, pw, arg + 1, lo, hi);
      if (b >= guarantee) {
        best.k = arg + 1;
        best.beta_lower = best.per_k[arg].first;
        best.beta_upper = best.per_k[arg].second;
        best.beta_verified = b;
        return best;
      }
    }
    throw DiscretizationInconclusive("window mass could not be certified above y/x");
  }
  if (tuple_count(best.k) <= static_cast<long double>(cfg.verify_tuple_limit)) {
    double b = exhaustive_beta(B, pw, best.k, lo, hi);
    if (b < best.beta_lower * (1 - 1e-9) || b > best.beta_upper * (1 + 1e-9))
      throw InvariantViolation("exhaustive window mass outside the certified bracket");
    best.beta_verified = b;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Prime tuples in a multiplicative window

namespace {

struct TupleWindow {
  long double lo_f = 0, hi_f = 0;    // coarse bounds for pruning
  std::function<bool(u128)> inside;  // exact test at the leaves
};

struct TupleMass {
  mpq_class exact;
  double approx = 0.0;
};

// Ordered ell-tuples enumerated as nondecreasing index multisets weighted by
// their multinomial coefficient.
TupleMass tuple_mass(const std::vector<std::uint64_t>& q, unsigned ell, const TupleWindow& win,
                     std::uint64_t node_budget) {
  std::vector<RationalTerm> terms;
  long double approx = 0;
  std::uint64_t nodes = 0;
  if (q.empty()) return {};
  const long double qmax = static_cast<long double>(q.back());
  std::vector<mpz_class> fact(ell + 1, 1);
  for (unsigned i = 1; i <= ell; ++i) fact[i] = fact[i - 1] * i;

  std::function<void(std::size_t, unsigned, u128, long double, mpz_class, unsigned, std::size_t)> rec =
      [&](std::size_t start, unsigned depth, u128 prod, long double prod_f, mpz_class denom, unsigned run,
          std::size_t last) {
        if (++nodes > node_budget) throw ExplosionGuard("prime tuple enumeration exceeded its node budget");
        if (depth == ell) {
          if (!win.inside(prod)) return;
          mpz_class d = denom * fact[run];
          mpz_class coef = fact[ell] / d;
          terms.push_back({coef, to_mpz(prod)});
          approx += static_cast<long double>(coef.get_d()) / static_cast<long double>(prod_f);
          return;
        }
        const unsigned r = ell - depth;
        for (std::size_t j = start; j < q.size(); ++j) {
          const long double qj = static_cast<long double>(q[j]);
          if (prod_f * std::pow(qj, static_cast<long double>(r)) > win.hi_f * (1 + 1e-15L)) break;
          if (prod_f * qj * std::pow(qmax, static_cast<long double>(r - 1)) < win.lo_f * (1 - 1e-15L)) continue;
          if (depth > 0 && j == last)
            rec(j, depth + 1, prod * q[j], prod_f * qj, denom, run + 1, j);
          else
            rec(j, depth + 1, prod * q[j], prod_f * qj, depth > 0 ? mpz_class(denom * fact[run]) : denom, 1, j);
        }
      };
  rec(0, 0, 1, 1.0L, mpz_class(1), 0, q.size());
  return {sum_rationals(terms), static_cast<double>(approx)};
}

std::vector<std::uint64_t> members(const PrimeSet& P) { return P.to_vector(); }

mpq_class reciprocal_exact(const std::vector<std::uint64_t>& q) {
  std::vector<RationalTerm> t;
  for (auto p : q) t.push_back({1, mpz_class(std::to_string(p))});
  return sum_rationals(t);
}

}  // namespace

nlohmann::json ProductWindowResult::to_json() const {
  return {{"ell", ell},
          {"K", K},
          {"mass_num", mass.get_num().get_str()},
          {"mass_den", mass.get_den().get_str()},
          {"normalized", normalized},
          {"guarantee_holds", guarantee_holds},
          {"per_ell", per_ell}};
}

ProductWindowResult prime_product_window(const PrimeSet& P, double x, double u, double v, double X,
                                         std::uint64_t node_budget) {
  if (!(x > 1 && u >= 1 && v >= u)) throw PreconditionFail("need x > 1 and 1 <= u <= v");
  const double xu = std::pow(x, 1.0 / u);
  if (!(X >= xu * (1 - 1e-15))) throw PreconditionFail("need X >= x^{1/u}");
  if (!(X < 1e36)) throw BudgetExceeded("X beyond 128-bit products");
  auto q = members(P);
  if (q.empty()) throw PreconditionFail("empty prime set");
  for (auto p : q) {
    mpz_class pz(std::to_string(p));
    if (hp::compare_to_power(pz, x, 1.0 / ev_of(v)) != Cmp::Greater || hp::compare_to_power(pz, x, 1.0 / u) == Cmp::Greater)
      throw PreconditionFail("prime " + std::to_string(p) + " outside (x^{1/ev}, x^{1/u}]");
  }
  ProductWindowResult r;
  r.K = ev_of(v) * std::log(X) / std::log(x);
  r.recip_sum = reciprocal_exact(q);
  const auto Xfloor = static_cast<u128>(std::floor(static_cast<long double>(X)));
  const long double lo_f = static_cast<long double>(X) / std::pow(static_cast<long double>(x), 1.0L / u);
  TupleWindow win;
  win.hi_f = static_cast<long double>(X);
  win.lo_f = lo_f;
  win.inside = [&](u128 prod) {
    if (prod > Xfloor) return false;
    const long double pf = static_cast<long double>(prod);
    if (std::fabs(static_cast<double>(pf - lo_f)) > 1e-12 * static_cast<double>(lo_f)) return pf > lo_f;
    return hp::compare_to_scaled_power(to_mpz(prod), X, x, -1.0 / u) == Cmp::Greater;
  };
  const auto Kmax = static_cast<unsigned>(std::floor(r.K));
  double best = -1;
  for (unsigned ell = 1; ell <= Kmax; ++ell) {
    TupleMass m = tuple_mass(q, ell, win, node_budget);
    const double norm = mpq_class(m.exact / qpow(r.recip_sum, ell)).get_d();
    r.per_ell.push_back(norm);
    if (norm > best) {
      best = norm;
      r.ell = ell;
      r.mass = m.exact;
      r.normalized = norm;
    }
  }
  // mass * K >= recip^ell, K compared as the exact value of its double
  if (r.ell > 0)
    r.guarantee_holds = r.mass * exact_rational(r.K) * mpq_class(1 + 1e-12) >= qpow(r.recip_sum, r.ell);
  return r;
}

// ---------------------------------------------------------------------------
// Integer hypothesis

nlohmann::json HypAReport::to_json() const {
  nlohmann::json rws = nlohmann::json::array();
  for (auto& rw : rows) rws.push_back({{"k", rw.k}, {"n", rw.n}, {"lhs", rw.lhs}, {"alpha", rw.alpha}});
  nlohmann::json j{{"precondition_met", precondition_met},
                   {"lambda2", lambda2},
                   {"recip_sum", recip_sum},
                   {"k", k},
                   {"n", n},
                   {"lhs", lhs},
                   {"implied_constant", implied_alpha},
                   {"rows", rws}};
  if (lhs_exact) {
    j["lhs_num"] = lhs_exact->get_num().get_str();
    j["lhs_den"] = lhs_exact->get_den().get_str();
  }
  return j;
}

HypAReport hypA_check(const WeightedIntegerSet& A, double lambda2, const RepConfig& cfg) {
  HypAReport r;
  r.lambda2 = lambda2;
  r.recip_sum = A.reciprocal_sum_approx();
  r.precondition_met = r.recip_sum >= (1 + lambda2) / A.u;
  const unsigned klo = std::max(1u, k_low(A.u)), khi = k_high(A.v);
  if (klo > khi || A.elements.empty()) return r;
  auto tables = rep_tables(A.elements, khi, A.N, cfg);
  double best = -1;
  for (unsigned k = klo; k <= khi; ++k) {
    const RepTable& t = tables[k - 1];
    std::uint64_t bn = A.N;
    double bl = -1;
    for (std::uint64_t n = A.N >= k ? A.N - k : 0; n <= A.N; ++n)
      if (t.weight(n) > bl) {
        bl = t.weight(n);
        bn = n;
      }
    const double alpha = bl * static_cast<double>(A.N) / std::pow(r.recip_sum, k);
    r.rows.push_back({k, bn, bl, alpha});
    if (alpha > best) {
      best = alpha;
      r.k = k;
      r.n = bn;
      r.lhs = bl;
      r.implied_alpha = alpha;
      if (t.weighted_exact)
        r.lhs_exact = (*t.weighted_exact)[bn];
      else
        r.lhs_exact.reset();
    }
  }
  return r;
}

mpz_class thm71_count(const WeightedIntegerSet& B, unsigned k, const RepConfig& cfg) {
  if (k < 1 || static_cast<double>(k) < B.u || static_cast<double>(k) > ev_of(B.v))
    throw PreconditionFail("k must lie in [u, ev]");
  RepConfig c = cfg;
  c.exact_weight_budget = 0;
  RepTable t = rep_table(B.elements, k, B.N, c);
  mpz_class total = 0;
  for (std::uint64_t n = B.N >= k ? B.N - k : 0; n <= B.N; ++n) total += t.count(n);
  return total;
}

// ---------------------------------------------------------------------------
// Sumsets

std::set<std::int64_t> sumset(const std::set<std::int64_t>& A, const std::set<std::int64_t>& B) {
  std::set<std::int64_t> out;
  for (auto a : A)
    for (auto b : B) out.insert(a + b);
  return out;
}

std::set<std::int64_t> restricted_sumset(const std::set<std::pair<std::int64_t, std::int64_t>>& E) {
  std::set<std::int64_t> out;
  for (auto [a, b] : E) out.insert(a + b);
  return out;
}

PopularPairSet popular_pairs(const std::vector<std::int64_t>& B_in, double delta) {
  if (!(delta > 0 && delta < 1)) throw PreconditionFail("need 0 < delta < 1");
  PopularPairSet r;
  r.base = B_in;
  std::sort(r.base.begin(), r.base.end());
  r.base.erase(std::unique(r.base.begin(), r.base.end()), r.base.end());
  r.delta = delta;
  std::map<std::int64_t, std::uint64_t> rep;
  for (auto a : r.base)
    for (auto b : r.base) ++rep[a + b];
  r.doubling_size = rep.size();
  const double nB = static_cast<double>(r.base.size());
  if (r.base.empty()) {
    r.bound_holds = true;
    return r;
  }
  // r(s) >= delta^2 |B|^2 / |2B|, compared exactly
  const mpq_class d = exact_rational(delta);
  const mpq_class thr = d * d * mpq_class(static_cast<long>(r.base.size() * r.base.size())) /
                        mpq_class(static_cast<long>(r.doubling_size));
  r.threshold = thr.get_d();
  for (auto a : r.base)
    for (auto b : r.base)
      if (mpq_class(static_cast<long>(rep[a + b])) >= thr) r.pairs.insert({a, b});
  r.restricted_size = restricted_sumset(r.pairs).size();
  r.bound_holds = mpq_class(static_cast<long>(r.pairs.size())) >= (1 - d * d) * mpq_class(nB * nB);
  return r;
}

// ---------------------------------------------------------------------------
// Generalized arithmetic progressions

namespace {

template <class F>
void for_each_offset(const std::vector<std::int64_t>& lim, F&& f) {
  const std::size_t d = lim.size();
  std::vector<std::int64_t> l(d);
  for (std::size_t j = 0; j < d; ++j) l[j] = -lim[j];
  while (true) {
    f(l);
    std::size_t j = 0;
    while (j < d && l[j] == lim[j]) {
      l[j] = -lim[j];
      ++j;
    }
    if (j == d) break;
    ++l[j];
  }
}

}  // namespace

std::vector<std::int64_t> GAParithmetic::elements() const {
  if (steps.size() != bounds.size()) throw PreconditionFail("GAP steps and bounds differ in length");
  long double total = 1;
  for (auto L : bounds) total *= 2.0L * L + 1;
  if (total > 1e6L) throw BudgetExceeded("GAP has more than 10^6 points");
  std::vector<std::int64_t> lim(bounds.begin(), bounds.end());
  std::vector<std::int64_t> out;
  for_each_offset(lim, [&](const std::vector<std::int64_t>& l) {
    std::int64_t s = x0;
    for (std::size_t j = 0; j < l.size(); ++j) s += l[j] * steps[j];
    out.push_back(s);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool GAParithmetic::proper() const {
  std::uint64_t total = 1;
  for (auto L : bounds) total *= 2 * L + 1;
  return elements().size() == total;
}

nlohmann::json GapReport::to_json() const {
  return {{"p_size", p_size}, {"q_size", q_size},       {"rho", rho},
          {"required", required}, {"min_ratio", min_ratio}, {"holds", holds}};
}

GapReport gap_rep_check(const GAParithmetic& P, unsigned k, double delta) {
  const std::size_t d = P.steps.size();
  if (d < 1 || d > 3) throw PreconditionFail("GAP rank must be 1..3");
  if (k < 1) throw PreconditionFail("k >= 1");
  const double dmax = 1.0 / std::pow(6.0, static_cast<double>(d));
  if (!(delta > 0 && delta < dmax)) throw PreconditionFail("need 0 < delta < 6^{-d}");
  const double rho = 1 - 3 * std::pow(delta, 1.0 / static_cast<double>(d));
  if (rho < 0.5) throw PreconditionFail("rho = 1 - 3 delta^{1/d} below 1/2");
  GapReport r;
  r.rho = rho;
  auto el = P.elements();
  r.p_size = el.size();
  const std::int64_t lo = el.front(), hi = el.back();
  const auto span = static_cast<std::size_t>(hi - lo);
  // rep[i] = r_{jP}(j*lo + i)
  std::vector<std::uint64_t> rep(span + 1, 0);
  for (auto e : el) rep[static_cast<std::size_t>(e - lo)] = 1;
  for (unsigned j = 2; j <= k; ++j) {
    std::vector<std::uint64_t> next(rep.size() + span, 0);
    for (std::size_t i = 0; i < rep.size(); ++i) {
      if (!rep[i]) continue;
      for (auto e : el) {
        auto& cell = next[i + static_cast<std::size_t>(e - lo)];
        if (__builtin_add_overflow(cell, rep[i], &cell)) throw BudgetExceeded("representation count overflow");
      }
    }
    rep = std::move(next);
  }
  r.required = std::pow(delta * static_cast<double>(r.p_size), static_cast<double>(k - 1));
  std::vector<std::int64_t> lim(d);
  for (std::size_t j = 0; j < d; ++j)
    lim[j] = static_cast<std::int64_t>(std::floor(static_cast<long double>(rho) * k * P.bounds[j]));
  std::set<std::int64_t> Q;
  for_each_offset(lim, [&](const std::vector<std::int64_t>& l) {
    std::int64_t s = static_cast<std::int64_t>(k) * P.x0;
    for (std::size_t j = 0; j < d; ++j) s += l[j] * P.steps[j];
    Q.insert(s);
  });
  r.q_size = Q.size();
  double mn = std::numeric_limits<double>::infinity();
  const std::int64_t base = static_cast<std::int64_t>(k) * lo;
  for (auto n : Q) {
    const std::int64_t off = n - base;
    const std::uint64_t c = (off < 0 || static_cast<std::size_t>(off) >= rep.size()) ? 0 : rep[static_cast<std::size_t>(off)];
    mn = std::min(mn, static_cast<double>(c) / r.required);
  }
  r.min_ratio = mn;
  r.holds = mn >= 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Prime hypothesis

nlohmann::json HypPReport::to_json() const {
  nlohmann::json rws = nlohmann::json::array();
  for (auto& rw : rows) rws.push_back({{"k", rw.k}, {"lhs", rw.lhs}, {"pi", rw.pi}});
  return {{"precondition_met", precondition_met},
          {"delta_in_range", delta_in_range},
          {"recip_sum", recip_sum},
          {"k", k},
          {"lhs_num", lhs.get_num().get_str()},
          {"lhs_den", lhs.get_den().get_str()},
          {"implied_constant", implied_pi},
          {"rows", rws}};
}

HypPReport hypP_check(const PrimeSet& P, std::uint64_t x, double u, double v, double delta, double lambda1,
                      std::uint64_t node_budget) {
  if (!(u >= 1 && v >= u)) throw PreconditionFail("need 1 <= u <= v");
  if (!(delta > 0 && delta < 1)) throw PreconditionFail("need 0 < delta < 1");
  HypPReport r;
  auto q = members(P);
  const mpq_class rs = reciprocal_exact(q);
  r.recip_sum = rs.get_d();
  r.precondition_met = r.recip_sum >= (1 + lambda1) / u;
  const double xd = static_cast<double>(x);
  r.delta_in_range = delta >= std::pow(xd, -1.0 / (3 * ev_of(v))) && delta <= 0.5;
  if (q.empty()) return r;

  const mpq_class dq = exact_rational(delta);
  const mpz_class dnum = dq.get_num(), dden = dq.get_den();
  const mpz_class xz(std::to_string(x));
  const mpz_class lower_scaled = (dden - dnum) * xz;  // prod * dden > (dden - dnum) x
  TupleWindow win;
  win.hi_f = static_cast<long double>(x);
  win.lo_f = (1.0L - delta) * static_cast<long double>(x);
  win.inside = [&](u128 prod) {
    if (prod >= static_cast<u128>(x)) return false;
    return to_mpz(prod) * dden > lower_scaled;
  };
  const unsigned klo = std::max(1u, k_low(u)), khi = k_high(v);
  double best = -1;
  for (unsigned k = klo; k <= khi; ++k) {
    TupleMass m = tuple_mass(q, k, win, node_budget);
    const double pi = mpq_class(m.exact * mpq_class(std::log(xd)) / (dq * qpow(rs, k))).get_d();
    r.rows.push_back({k, m.exact.get_d(), pi});
    if (pi > best) {
      best = pi;
      r.k = k;
      r.lhs = m.exact;
      r.implied_pi = pi;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Transforms between integer and prime sets

PrimesFromA a_to_primes(const WeightedIntegerSet& A) {
  if (A.N > 21) throw BudgetExceeded("a_to_primes needs N <= 21");
  PrimesFromA r;
  r.x_log = static_cast<double>(A.N + 1);
  std::vector<std::uint64_t> ps;
  for (auto a : A.elements) {
    const auto lo = hp::floor_exp(static_cast<double>(a)).get_ui();
    const auto hi = hp::floor_exp(static_cast<double>(a + 1)).get_ui();
    auto seg = primes_in_range(lo, hi);
    ps.insert(ps.end(), seg.begin(), seg.end());
  }
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  Descriptor d;
  d.kind = Descriptor::Kind::Derived;
  d.label = "a_to_primes";
  d.n = A.N;
  const auto bound = hp::floor_exp(static_cast<double>(A.N + 1));
  d.x = bound.get_ui();
  r.primes = PrimeSet::from_sorted(d.x, std::move(ps), d);
  r.recip_primes = reciprocal_sum(r.primes).approx;
  r.recip_a = A.reciprocal_sum_approx();
  r.relative_gap = r.recip_a > 0 ? std::fabs(r.recip_primes - r.recip_a) / r.recip_a : 0.0;
  r.bound = 5 * A.v * A.v / static_cast<double>(A.N);
  return r;
}

AFromPrimes p_to_a(const PrimeSet& P, std::uint64_t x, double u, double v, double delta, double lambda2) {
  if (!(u >= 1 && v >= u)) throw PreconditionFail("need 1 <= u <= v");
  if (!(delta > 0 && delta <= 0.5)) throw PreconditionFail("need 0 < delta <= 1/2");
  AFromPrimes r;
  const double ev = ev_of(v);
  r.rho = 1 + delta / (2 * ev);
  const long double lr = std::log1p(static_cast<long double>(delta) / (2 * ev));
  r.N_real = static_cast<double>(std::log(static_cast<long double>(x)) / lr) - ev;
  if (r.N_real < 1) throw PreconditionFail("x too small for this delta");
  r.eta = std::min(1.0, lambda2);
  const auto rs = reciprocal_sum(P);
  r.recip_primes = rs.approx;
  std::map<std::uint64_t, double> S;
  for (auto p : P) {
    const long double t = std::log(static_cast<long double>(p)) / lr;
    S[static_cast<std::uint64_t>(std::floor(t))] += 1.0 / static_cast<double>(p);
  }
  const double a_lo = r.N_real / ev + 1, a_hi = r.N_real / u;
  const auto Nint = static_cast<std::uint64_t>(std::floor(r.N_real));
  std::vector<std::uint64_t> el;
  for (auto [a, s] : S) {
    const double ad = static_cast<double>(a);
    if (ad < a_lo || ad > a_hi) continue;
    r.S.emplace_back(a, s);
    if (s >= r.eta / (4 * ad * std::log(ev)) * rs.approx && admissible(a, Nint, u, v)) el.push_back(a);
  }
  r.A = WeightedIntegerSet{Nint, u, v, std::move(el)};
  r.recip_a = r.A.reciprocal_sum_approx();
  return r;
}

}  // namespace sievelab
