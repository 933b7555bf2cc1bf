#include "sievelab/sieve_counts.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "sievelab/errors.hpp"
#include "sievelab/numeric.hpp"

namespace sievelab {

const char* method_name(CountMethod m) {
  return m == CountMethod::IntervalSieve ? "IntervalSieve" : "SmoothDFS";
}

nlohmann::json CountResult::to_json() const {
  return {{"x", x}, {"set_checksum", set_checksum}, {"method", method_name(method)}, {"value", value}};
}

nlohmann::json LogWeightResult::to_json() const {
  nlohmann::json j{{"x", x}, {"set_checksum", set_checksum}, {"method", "IntervalSieve"}, {"value", approx}};
  if (exact) {
    j["exact_num"] = exact->get_num().get_str();
    j["exact_den"] = exact->get_den().get_str();
  }
  return j;
}

namespace {

using Clock = std::chrono::steady_clock;

// Calls fn(piece, lo, alive) for consecutive segments covering (T0, T0+len],
// where alive[i] says whether lo+i has no prime factor in `sieving`. The
// range is split into contiguous pieces, one per worker; every piece keeps its
// own next-multiple table.
void for_each_segment(std::uint64_t T0, std::uint64_t len, std::span<const std::uint64_t> sieving, std::size_t seg,
                      const std::function<void(std::size_t, std::uint64_t, std::span<const unsigned char>)>& fn,
                      std::size_t& pieces_out) {
  const std::uint64_t first = T0 + 1, last = T0 + len;  // inclusive
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t nseg = (len + seg - 1) / seg;
  std::size_t pieces = static_cast<std::size_t>(std::min<std::uint64_t>(hw, std::max<std::uint64_t>(1, nseg)));
  pieces_out = pieces;
  if (len == 0) return;
  const std::uint64_t per = (nseg + pieces - 1) / pieces;
  auto relevant_end = std::upper_bound(sieving.begin(), sieving.end(), last);
  std::span<const std::uint64_t> primes(sieving.begin(), relevant_end);

  parallel_chunks(pieces, [&](std::size_t piece) {
    std::uint64_t s0 = piece * per, s1 = std::min(nseg, s0 + per);
    if (s0 >= s1) return;
    std::uint64_t lo0 = first + s0 * seg;
    std::vector<std::uint64_t> next(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
      std::uint64_t p = primes[i];
      next[i] = (lo0 + p - 1) / p * p;
    }
    std::vector<unsigned char> alive(seg);
    for (std::uint64_t s = s0; s < s1; ++s) {
      std::uint64_t lo = first + s * seg;
      std::uint64_t hi = std::min(last, lo + seg - 1);
      std::size_t n = hi - lo + 1;
      std::fill_n(alive.begin(), n, 1);
      for (std::size_t i = 0; i < primes.size(); ++i) {
        std::uint64_t m = next[i];
        if (m > hi) continue;
        const std::uint64_t p = primes[i];
        for (; m <= hi; m += p) alive[m - lo] = 0;
        next[i] = m;
      }
      fn(piece, lo, std::span<const unsigned char>(alive.data(), n));
    }
  });
}

std::vector<std::uint64_t> excluded_primes(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg) {
  if (x < 2) return {};
  auto all = primes_up_to(x, cfg.primes);
  std::vector<std::uint64_t> out;
  out.reserve(all.size());
  auto it = P.begin();
  const auto end = P.end();
  for (auto p : all) {
    while (it != end && *it < p) ++it;
    if (it != end && *it == p) continue;
    out.push_back(p);
  }
  return out;
}

void check_budget(std::uint64_t x, const CountConfig& cfg) {
  if (x > cfg.ceiling)
    throw BudgetExceeded("x = " + std::to_string(x) + " above counting ceiling " + std::to_string(cfg.ceiling));
}

std::uint64_t count_alive(std::span<const unsigned char> a) {
  std::uint64_t c = 0;
  for (auto v : a) c += v;
  return c;
}

}  // namespace

CountResult psi_sieve(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg) {
  check_budget(x, cfg);
  auto t0 = Clock::now();
  auto E = excluded_primes(x, P, cfg);
  std::vector<std::uint64_t> partial(std::max(1u, std::thread::hardware_concurrency()), 0);
  std::size_t pieces = 0;
  for_each_segment(0, x, E, cfg.segment,
                   [&](std::size_t piece, std::uint64_t, std::span<const unsigned char> a) {
                     partial[piece] += count_alive(a);
                   },
                   pieces);
  CountResult r;
  for (std::size_t i = 0; i < pieces; ++i) r.value += partial[i];
  r.method = CountMethod::IntervalSieve;
  r.x = x;
  r.set_checksum = P.checksum();
  r.elapsed = Clock::now() - t0;
  return r;
}

CountResult interval_count(std::uint64_t T0, std::uint64_t x, const PrimeSet& E, const CountConfig& cfg) {
  check_budget(x, cfg);
  auto t0 = Clock::now();
  auto primes = E.to_vector();
  std::vector<std::uint64_t> partial(std::max(1u, std::thread::hardware_concurrency()), 0);
  std::size_t pieces = 0;
  for_each_segment(T0, x, primes, cfg.segment,
                   [&](std::size_t piece, std::uint64_t, std::span<const unsigned char> a) {
                     partial[piece] += count_alive(a);
                   },
                   pieces);
  CountResult r;
  for (std::size_t i = 0; i < pieces; ++i) r.value += partial[i];
  r.method = CountMethod::IntervalSieve;
  r.x = x;
  r.set_checksum = E.checksum();
  r.elapsed = Clock::now() - t0;
  return r;
}

std::vector<std::uint64_t> survivors(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg) {
  check_budget(x, cfg);
  auto E = excluded_primes(x, P, cfg);
  std::vector<std::vector<std::uint64_t>> parts(std::max(1u, std::thread::hardware_concurrency()));
  std::size_t pieces = 0;
  for_each_segment(0, x, E, cfg.segment,
                   [&](std::size_t piece, std::uint64_t lo, std::span<const unsigned char> a) {
                     for (std::size_t i = 0; i < a.size(); ++i)
                       if (a[i]) parts[piece].push_back(lo + i);
                   },
                   pieces);
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < pieces; ++i) out.insert(out.end(), parts[i].begin(), parts[i].end());
  return out;
}

std::vector<std::uint64_t> psi_profile(std::uint64_t x, const PrimeSet& P, std::span<const std::uint64_t> checkpoints,
                                       const CountConfig& cfg) {
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) || (!checkpoints.empty() && checkpoints.back() > x))
    throw PreconditionFail("psi_profile checkpoints must be ascending and <= x");
  check_budget(x, cfg);
  auto E = excluded_primes(x, P, cfg);
  // Per piece: survivors strictly below each checkpoint boundary are counted
  // into per-checkpoint buckets, then prefix-summed.
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::vector<std::uint64_t>> buckets(hw, std::vector<std::uint64_t>(checkpoints.size() + 1, 0));
  std::size_t pieces = 0;
  for_each_segment(0, x, E, cfg.segment,
                   [&](std::size_t piece, std::uint64_t lo, std::span<const unsigned char> a) {
                     auto& b = buckets[piece];
                     std::size_t ci = std::lower_bound(checkpoints.begin(), checkpoints.end(), lo) - checkpoints.begin();
                     for (std::size_t i = 0; i < a.size(); ++i) {
                       std::uint64_t n = lo + i;
                       while (ci < checkpoints.size() && checkpoints[ci] < n) ++ci;
                       if (a[i]) ++b[ci];
                     }
                   },
                   pieces);
  std::vector<std::uint64_t> out(checkpoints.size(), 0);
  std::uint64_t run = 0;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    for (std::size_t i = 0; i < pieces; ++i) run += buckets[i][c];
    out[c] = run;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Depth-first enumeration

namespace {

struct Dfs {
  std::span<const std::uint64_t> primes;
  std::uint64_t budget;
  std::atomic<std::uint64_t>* nodes;

  void tick() {
    if (nodes->fetch_add(1, std::memory_order_relaxed) + 1 > budget)
      throw ExplosionGuard("depth-first enumeration exceeded " + std::to_string(budget) + " nodes");
  }

  std::size_t upto(std::size_t from, std::uint64_t limit) const {
    return std::upper_bound(primes.begin() + from, primes.end(), limit) - primes.begin();
  }

  // Number of k >= 1 (including k = 1) composed of primes[i..] with k <= limit.
  std::uint64_t smooth(std::uint64_t limit, std::size_t i) {
    tick();
    std::uint64_t total = 1;
    std::size_t all_end = upto(i, limit);
    std::uint64_t r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(limit)));
    while (r * r > limit) --r;
    while ((r + 1) * (r + 1) <= limit) ++r;
    std::size_t deep_end = std::min(all_end, upto(i, r));
    // primes with p^2 > limit contribute exactly the single product p
    total += all_end - deep_end;
    for (std::size_t j = i; j < deep_end; ++j) {
      std::uint64_t p = primes[j];
      for (std::uint64_t q = limit / p; q >= 1; q /= p) {
        total += smooth(q, j + 1);
        if (q < p) break;
      }
    }
    return total;
  }

  // Squarefree products of exactly k distinct primes from primes[i..], <= limit.
  std::uint64_t exact_k(std::uint64_t limit, std::size_t i, unsigned k) {
    tick();
    if (k == 1) return upto(i, limit) - std::min(i, primes.size());
    std::uint64_t total = 0;
    for (std::size_t j = i; j < primes.size(); ++j) {
      std::uint64_t p = primes[j];
      // need p * (k-1 larger primes) <= limit; p^k <= limit is necessary
      long double pk = std::pow(static_cast<long double>(p), static_cast<long double>(k));
      if (pk > static_cast<long double>(limit) * (1 + 1e-15L)) break;
      total += exact_k(limit / p, j + 1, k - 1);
    }
    return total;
  }
};

}  // namespace

CountResult psi_dfs(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg) {
  auto t0 = Clock::now();
  auto primes = P.to_vector();
  primes.erase(std::upper_bound(primes.begin(), primes.end(), x), primes.end());
  std::atomic<std::uint64_t> nodes{0};
  Dfs dfs{primes, cfg.dfs_node_budget, &nodes};

  CountResult r;
  r.method = CountMethod::SmoothDFS;
  r.x = x;
  r.set_checksum = P.checksum();
  if (x == 0) {
    r.value = 0;
  } else {
    // top-level branches in parallel, reduced in branch order
    std::size_t top = primes.size();
    std::vector<std::uint64_t> branch(top, 0);
    parallel_chunks(top, [&](std::size_t j) {
      std::uint64_t p = primes[j], sum = 0;
      for (std::uint64_t q = x / p; q >= 1; q /= p) {
        sum += dfs.smooth(q, j + 1);
        if (q < p) break;
      }
      branch[j] = sum;
    });
    r.value = 1;
    for (auto b : branch) r.value += b;
  }
  r.elapsed = Clock::now() - t0;
  return r;
}

CountResult psi_k(std::uint64_t x, const PrimeSet& P, unsigned k, const CountConfig& cfg) {
  if (k < 1) throw PreconditionFail("psi_k needs k >= 1");
  auto t0 = Clock::now();
  auto primes = P.to_vector();
  primes.erase(std::upper_bound(primes.begin(), primes.end(), x), primes.end());
  std::atomic<std::uint64_t> nodes{0};
  Dfs dfs{primes, cfg.dfs_node_budget, &nodes};
  CountResult r;
  r.method = CountMethod::SmoothDFS;
  r.x = x;
  r.set_checksum = P.checksum();
  r.value = x == 0 ? 0 : dfs.exact_k(x, 0, k);
  r.elapsed = Clock::now() - t0;
  return r;
}

// ---------------------------------------------------------------------------
// Logarithmic weights

LogWeightResult log_weight_sum(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg) {
  LogWeightResult r;
  r.x = x;
  r.set_checksum = P.checksum();
  auto s = survivors(x, P, cfg);
  CompensatedSum acc;
  for (auto n : s) acc.add(1.0 / static_cast<double>(n));
  r.term_count = s.size();
  if (s.size() <= LogWeightResult::kExactLimit) {
    std::vector<RationalTerm> terms;
    terms.reserve(s.size());
    for (auto n : s) terms.push_back({1, mpz_class(std::to_string(n))});
    r.exact = sum_rationals(terms);
    r.approx = r.exact->get_d();
  } else {
    r.approx = acc.value();
    r.error_bound = acc.error_bound() + 0x1.0p-53 * r.approx;
  }
  return r;
}

double mean_identity_residual(std::uint64_t x, const PrimeSet& P, unsigned grid, const CountConfig& cfg) {
  if (grid < 10) throw PreconditionFail("mean_identity_residual needs grid >= 10");
  if (x <= 1) return 0.0;
  auto s = survivors(x, P, cfg);
  std::vector<double> checkpoints;
  for (unsigned j = 1; j <= grid; ++j)
    checkpoints.push_back(std::pow(static_cast<double>(x), static_cast<double>(j) / grid));
  checkpoints.back() = static_cast<double>(x);

  double worst = 0.0;
  CompensatedSum lhs, integral;
  std::size_t idx = 0;  // survivors consumed
  for (double t : checkpoints) {
    while (idx < s.size() && static_cast<double>(s[idx]) <= t) {
      double n = static_cast<double>(s[idx]);
      lhs.add(1.0 / n);
      // Psi jumps from idx to idx+1 at n: close the previous step [s[idx-1], n)
      if (idx > 0) {
        double prev = static_cast<double>(s[idx - 1]);
        integral.add(static_cast<double>(idx) * (1.0 / prev - 1.0 / n));
      }
      ++idx;
    }
    // open step from the last survivor up to t
    double tail = 0.0;
    if (idx > 0) tail = static_cast<double>(idx) * (1.0 / static_cast<double>(s[idx - 1]) - 1.0 / t);
    double rhs = static_cast<double>(idx) / t + integral.value() + tail;
    worst = std::max(worst, std::fabs(lhs.value() - rhs));
  }
  return worst;
}

}  // namespace sievelab
