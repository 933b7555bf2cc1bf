// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sievelab/continuous_sets.hpp"
#include "sievelab/discrete_comb.hpp"
#include "sievelab/errors.hpp"
#include "sievelab/experiments.hpp"
#include "sievelab/numeric.hpp"
#include "sievelab/predictions.hpp"
#include "sievelab/prime_sets.hpp"
#include "sievelab/sieve_counts.hpp"

using namespace sievelab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. survivors, sieve and DFS against factorization
Outcome exact_counts() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint32_t X = 100'000;
  auto spf = oracle::spf_table(X);
  auto all = oracle::primes_to(X);
  SplitMix64 rng(derive_seed(20240601, 1));
  std::size_t bad = 0, checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double keep = rng.uniform();
    std::vector<char> member(X + 1, 0);
    std::vector<std::uint64_t> m;
    for (auto p : all)
      if (rng.uniform() < keep) m.push_back(p), member[p] = 1;
    auto P = PrimeSet::explicit_list(X, m);
    std::vector<std::uint64_t> want;
    for (std::uint64_t n = 1; n <= X; ++n)
      if (oracle::all_factors_in(n, spf, [&](std::uint64_t p) { return member[p] != 0; })) want.push_back(n);
    ++checks;
    if (survivors(X, P) != want) ++bad;
    std::vector<std::uint64_t> xs{X, 1 + rng.below(X), 1 + rng.below(1000), 1 + rng.below(30)};
    for (auto x : xs) {
      const auto brute = static_cast<std::uint64_t>(std::upper_bound(want.begin(), want.end(), x) - want.begin());
      auto Px = P.restrict_to(0, x);
      checks += 2;
      bad += psi_sieve(x, Px).value != brute;
      bad += psi_dfs(x, Px).value != brute;
    }
  }
  const double t = seconds_since(t0);
  return {bad == 0 && t < 120, fmt("%zu discrepancies in %zu checks, %.1f s", bad, checks, t)};
}

// 2. exact small values
Outcome small_values() {
  auto P = PrimeSet::explicit_list(30, {2, 3, 5});
  const auto a = psi_sieve(30, P).value, b = psi_dfs(30, P).value, c = psi_k(30, P, 2).value;
  bool ok = a == 18 && b == 18 && c == 3;
  for (std::uint64_t x : {1ull, 2ull, 97ull, 1000ull, 65'536ull}) {
    ok = ok && psi_sieve(x, primes_up_to(x)).value == x;
    ok = ok && psi_sieve(x, PrimeSet::explicit_list(x, {})).value == 1;
    ok = ok && psi_dfs(x, PrimeSet::explicit_list(x, {})).value == 1;
  }
  return {ok, fmt("Psi(30,{2,3,5})=%llu/%llu, Psi_2=%llu", (unsigned long long)a, (unsigned long long)b,
                  (unsigned long long)c)};
}

// rho on [0,3] by trapezoid steps of rho(u) = rho(n) - int rho(t-1)/t dt
double rho_trapezoid(double u, double h) {
  const auto m = static_cast<std::size_t>(std::llround(1 / h));
  const auto n = static_cast<std::size_t>(std::llround(u / h));
  std::vector<double> r(n + 1, 1.0);
  for (std::size_t i = m + 1; i <= n; ++i) {
    const double ta = static_cast<double>(i - 1) * h, tb = static_cast<double>(i) * h;
    r[i] = r[i - 1] - h / 2 * (r[i - 1 - m] / ta + r[i - m] / tb);
  }
  return r[n];
}

// 3. Dickman rho
Outcome dickman() {
  const double e2 = std::fabs(dickman_rho(2.0) - (1 - std::log(2.0)));
  // the table runs at 1e-4; the oracle at 1e-5
  const double ref3 = rho_trapezoid(3.0, 1e-5);
  const double e3 = std::max(std::fabs(dickman_rho(3.0) - ref3), std::fabs(DickmanTable::instance()(3.0) - ref3));
  double worst = 0;
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double u = 1.05 + 0.0885 * i;
    const double d = (dickman_rho(u + h) - dickman_rho(u - h)) / (2 * h);
    worst = std::max(worst, std::fabs(u * d + dickman_rho(u - 1)) / dickman_rho(u - 1));
  }
  return {e2 <= 1e-9 && e3 <= 1e-6 && worst <= 1e-6,
          fmt("|rho(2)-(1-log2)|=%.2e, |rho(3)-oracle|=%.2e, max ODE residual %.2e", e2, e3, worst)};
}

// 4. smooth numbers against rho(u) at 10^8
Outcome hildebrand() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t x = 100'000'000;
  bool ok = true;
  std::string detail;
  for (double u : {2.0, 2.5, 3.0}) {
    const auto y = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(x), 1 / u) + 1e-9));
    const auto psi = psi_sieve(x, primes_up_to(y)).value;
    const double rho = dickman_rho(u);
    const double dev = std::fabs(static_cast<double>(psi) / static_cast<double>(x) - rho) / rho;
    ok = ok && dev <= 0.15;
    detail += fmt("u=%.1f dev=%.3f; ", u, dev);
  }
  const double t = seconds_since(t0);
  detail += fmt("%.1f s", t);
  return {ok && t < 300, detail};
}

// 5. log-weight sandwich
Outcome sandwich() {
  const std::uint64_t x = 1'000'000;
  auto all = primes_up_to(x).to_vector();
  SplitMix64 rng(derive_seed(20240601, 5));
  int bad = 0;
  double lo_min = 1e9, hi_max = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double keep = rng.uniform();
    std::vector<std::uint64_t> m;
    for (auto p : all)
      if (rng.uniform() < keep) m.push_back(p);
    auto P = PrimeSet::explicit_list(x, m);
    const double prod = euler_product(complement_within(P, x));
    const double S = log_weight_sum(x, P).approx / std::log(static_cast<double>(x));
    lo_min = std::min(lo_min, S / prod);
    hi_max = std::max(hi_max, S / (kExpGamma * prod));
    bad += !(prod / 1.1 <= S && S <= 1.1 * kExpGamma * prod);
  }
  return {bad == 0, fmt("%d violations; min S/lower %.3f, max S/upper %.3f", bad, lo_min, hi_max)};
}

// 6. counterexample family ratio
Outcome counterexample() {
  ExperimentConfig cfg;
  cfg.experiment = "counterexample";
  auto r = run_counterexample_scan({100'000, 1'000'000, 10'000'000, 100'000'000}, 3, false, cfg);
  std::string detail = "Psi*log x*u_P/x:";
  for (auto& row : r.rows) detail += fmt(" %.4f", row["ratio"].get<double>());
  detail += "; Psi*u_P/x:";
  for (auto& row : r.rows) detail += fmt(" %.4f", row["ratio_to_expected"].get<double>());
  return {r.derived["ratio_strictly_decreasing"].get<bool>(), detail};
}

// 7. tuple counter
Outcome tuple_counter() {
  const auto c = thm71_count(WeightedIntegerSet::make(12, 1, 2, {3, 4, 5}), 3);
  SplitMix64 rng(derive_seed(20240601, 7));
  int bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::uint64_t N = 20 + rng.below(180);
    const auto lo = static_cast<std::uint64_t>(std::floor(static_cast<double>(N) / (2 * kE))) + 2;
    std::vector<std::uint64_t> B;
    const auto m = 1 + rng.below(8);
    while (B.size() < m) {
      const auto a = lo + rng.below(N - lo + 1);
      if (std::find(B.begin(), B.end(), a) == B.end()) B.push_back(a);
    }
    std::sort(B.begin(), B.end());
    const auto k = static_cast<unsigned>(1 + rng.below(4));
    mpz_class want = 0;
    oracle::for_each_tuple(B.size(), k, [&](const std::vector<std::size_t>& idx) {
      std::uint64_t s = 0;
      for (auto i : idx) s += B[i];
      if (s + k >= N && s <= N) ++want;
    });
    bad += thm71_count(WeightedIntegerSet::make(N, 1, 2, B), k) != want;
  }
  return {c == 17 && bad == 0, fmt("B={3,4,5}: %s; %d mismatches in 500", c.get_str().c_str(), bad)};
}

// 8. pigeonhole guarantees
Outcome pigeonhole() {
  SplitMix64 rng(derive_seed(20240601, 8));
  int violations = 0, inconclusive = 0, skipped = 0;
  for (int i = 0; i < 40; ++i) {
    const double y = 1 + rng.uniform(), z = y * (1.2 + rng.uniform()), x = z * (1 + 3 * rng.uniform());
    std::vector<double> B, w;
    const auto m = 1 + rng.below(6);
    for (std::size_t j = 0; j < m; ++j) {
      B.push_back(y + (z - y) * (0.01 + 0.99 * rng.uniform()));
      w.push_back(0.1 + rng.uniform());
    }
    try {
      auto r = window_best_k(B, w, y, z, x);
      double W = 0, beta = 0;
      for (double wi : w) W += wi;
      oracle::for_each_tuple(B.size(), r.k, [&](const std::vector<std::size_t>& idx) {
        double s = 0, p = 1;
        for (auto j : idx) s += B[j], p *= w[j] / W;
        if (s > x - z && s <= x) beta += p;
      });
      const bool certified = r.beta_lower >= y / x || (r.beta_verified && *r.beta_verified >= y / x);
      violations += !certified || beta < y / x * (1 - 1e-12);
    } catch (const DiscretizationInconclusive&) {
      ++inconclusive;
    }
  }
  for (int i = 0; i < 30; ++i) {
    const double x = std::pow(10.0, 4 + 2 * rng.uniform());
    const double u = 1 + rng.uniform(), v = u + rng.uniform();
    const double lo = std::pow(x, 1 / (kE * v)), hi = std::pow(x, 1 / u);
    const double X = hi * std::pow(x / hi, rng.uniform());
    std::vector<std::uint64_t> ps;
    auto cand = primes_up_to(static_cast<std::uint64_t>(hi)).to_vector();
    const double keep = std::min(1.0, 40.0 / static_cast<double>(cand.size() + 1));
    for (auto p : cand)
      if (p > lo * (1 + 1e-9) && p < hi * (1 - 1e-9) && rng.uniform() < keep) ps.push_back(p);
    if (ps.empty()) ps.push_back(cand.back());
    try {
      auto r = prime_product_window(PrimeSet::explicit_list(static_cast<std::uint64_t>(x), ps), x, u, v, X);
      violations += !(r.guarantee_holds && r.normalized >= 1 / r.K);
    } catch (const ExplosionGuard&) {
      ++skipped;
    } catch (const PreconditionFail&) {
      ++skipped;
    }
  }
  for (int i = 0; i < 30; ++i) {
    const double v = 1 + 2 * rng.uniform(), w = (1 + rng.uniform()) / v;
    // T stays inside (1/(ev), 1/v]: no single step can jump the window
    const long den = 100'000;
    const auto lo = static_cast<long>(std::ceil(den / (kE * v))) + 1, hi = static_cast<long>(std::floor(den / v));
    std::vector<OpenInterval> parts;
    const auto n = 1 + rng.below(3);
    for (std::size_t j = 0; j < n; ++j) {
      const long a = lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi - lo - 1)));
      const long b = a + 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi - a)));
      parts.push_back({mpq_class(a, den), mpq_class(b, den)});
    }
    auto r = window_search(OpenIntervalSet(std::move(parts)), v, w);
    violations += r.guarantee_refuted;
    inconclusive += !r.guarantee_certified && !r.guarantee_refuted;
  }
  return {violations == 0,
          fmt("%d violations in 100 cases; %d inconclusive, %d over budget", violations, inconclusive, skipped)};
}

// 9. GAP representation bound
Outcome gaps() {
  SplitMix64 rng(derive_seed(20240601, 9));
  int bad = 0;
  double worst = 1e300;
  for (int i = 0; i < 50; ++i) {
    GAParithmetic P;
    P.x0 = static_cast<std::int64_t>(rng.below(11)) - 5;
    double delta;
    if (i % 2 == 0) {
      P.steps = {1 + static_cast<std::int64_t>(rng.below(5))};
      P.bounds = {1 + rng.below(6)};
      delta = (0.05 + 0.9 * rng.uniform()) / 6;
    } else {
      const auto L1 = 1 + rng.below(4);
      const auto s1 = 1 + static_cast<std::int64_t>(rng.below(3));
      P.steps = {s1, s1 * static_cast<std::int64_t>(2 * L1 + 1 + rng.below(3))};
      P.bounds = {L1, 1 + rng.below(4)};
      delta = (0.05 + 0.9 * rng.uniform()) / 36;
    }
    const auto k = static_cast<unsigned>(1 + rng.below(3));
    if (!P.proper()) {
      ++bad;
      continue;
    }
    auto g = gap_rep_check(P, k, delta);
    worst = std::min(worst, g.min_ratio);
    bad += !(g.holds && g.min_ratio >= 1);
  }
  return {bad == 0, fmt("%d failures in 50; min ratio %.3f", bad, worst)};
}

// 10. continuous engine
Outcome continuous() {
  OpenIntervalSet T({{mpq_class(3, 10), mpq_class(3, 5)}});
  const double exact = 2 * std::log(1.5);
  auto c = simplex_integral_conv(T, 2, 100'000);
  auto m = simplex_integral_mc(T, 2, 1'000'000, derive_seed(20240601, 10));
  auto reach = reachable_one(OpenIntervalSet::t_family(2), 32);
  bool zero = true;
  for (unsigned k = 2; k <= 6; ++k) zero = zero && simplex_integral_conv(OpenIntervalSet::t_family(2), k, 20'000).value == 0.0;
  const double ec = std::fabs(c.value - exact), em = std::fabs(m.mean - exact) / m.std_error;
  return {ec <= 1e-3 && em <= 3 && !reach.reachable && reach.checked_up_to >= 32 && zero,
          fmt("conv err %.2e, MC %.2f SE, T_2 reachable=%d up to k=%u, integral zero=%d", ec, em, reach.reachable,
              reach.checked_up_to, zero)};
}

// 11. equivalence pipeline
Outcome pipeline() {
  ExperimentConfig cfg;
  cfg.experiment = "pipeline";
  cfg.set_pair("instance=A");
  cfg.set_pair("N=10000");
  auto r = run_hypothesis_pipeline(cfg);
  const double gap = r.derived["a_t_relative_gap"].get<double>();
  const double v = 2;
  auto ap = a_to_primes(WeightedIntegerSet::full_interval(20, 1, v));
  const double bound = 5 * v * v / 20;
  const double rel = std::fabs(ap.recip_primes - ap.recip_a) / ap.recip_a;
  return {gap <= 0.1 && rel <= bound, fmt("A/T gap %.4f; A->P gap %.4f vs %.2f", gap, rel, bound)};
}

// 12. reruns from the echoed config
Outcome reproducibility() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"psi", {"x=100000", "set=congruence:4:1", "method=both"}},
      {"psi", {"x=1000", "set=all", "k=2"}},
      {"benchmark", {"xs=10000,100000", "set=smooth:100"}},
      {"counterexample", {"xs=10000,100000", "N=3"}},
      {"congruence", {"x=1000000", "q=5"}},
      {"friedlander", {"x=1000000", "u=2", "v=8"}},
      {"hyp-a", {"N=500"}},
      {"hyp-p", {"x=100000"}},
      {"hyp-t", {"T=1/5:1/2", "u=2", "v=2", "M=20000"}},
      {"pipeline", {"instance=T"}},
      {"dickman", {"u=1,2,3,4"}},
  };
  int bad = 0;
  std::string failed;
  for (auto& [e, kvs] : runs) {
    for (const char* format : {"json", "csv"}) {
      try {
        ExperimentConfig cfg;
        cfg.experiment = e;
        cfg.format = format;
        cfg.seed = 17;
        for (auto& kv : kvs) cfg.set_pair(kv);
        const auto first = run_experiment(cfg).serialize(format);
        const auto echoed = nlohmann::json::parse(run_experiment(cfg).serialize("json"))["config"];
        const auto again = run_experiment(ExperimentConfig::from_json(echoed)).serialize(format);
        if (first != again) ++bad, failed += " " + e;
      } catch (const std::exception& ex) {
        ++bad;
        failed += " " + e + "(" + ex.what() + ")";
      }
    }
  }
  return {bad == 0, fmt("%d of %zu reruns differ%s", bad, 2 * runs.size(), failed.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"exact-count oracle suite", exact_counts},
      {"exact small values", small_values},
      {"Dickman rho", dickman},
      {"smooth numbers vs rho(u) at 1e8", hildebrand},
      {"log-weight sandwich", sandwich},
      {"counterexample ratio decreasing", counterexample},
      {"tuple counter", tuple_counter},
      {"pigeonhole guarantees", pigeonhole},
      {"GAP representation bound", gaps},
      {"continuous engine", continuous},
      {"equivalence pipeline", pipeline},
      {"reproducibility", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
