#include "sievelab/continuous_sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <fftw3.h>
#include <mpfr.h>

#include "sievelab/errors.hpp"
#include "sievelab/numeric.hpp"

namespace sievelab {

// ---------------------------------------------------------------------------
// OpenIntervalSet

OpenIntervalSet::OpenIntervalSet(std::vector<OpenInterval> parts) {
  for (auto& p : parts) {
    p.a.canonicalize();
    p.b.canonicalize();
    if (!(p.a > 0)) throw PreconditionFail("interval endpoints must be positive");
    if (!(p.a < p.b)) throw PreconditionFail("interval needs a < b");
  }
  std::sort(parts.begin(), parts.end(), [](const OpenInterval& x, const OpenInterval& y) { return x.a < y.a; });
  for (auto& p : parts) {
    if (!parts_.empty() && p.a < parts_.back().b) {
      if (p.b > parts_.back().b) parts_.back().b = p.b;
    } else {
      parts_.push_back(p);
    }
  }
}

OpenIntervalSet OpenIntervalSet::from_doubles(const std::vector<std::pair<double, double>>& parts, long max_den) {
  std::vector<OpenInterval> v;
  for (auto [a, b] : parts) v.push_back({rational_from_double(a, max_den), rational_from_double(b, max_den)});
  return OpenIntervalSet(std::move(v));
}

OpenIntervalSet OpenIntervalSet::t_family(unsigned N) {
  if (N < 1) throw PreconditionFail("T_N needs N >= 1");
  std::vector<OpenInterval> v;
  for (unsigned j = 1; j <= N; ++j) v.push_back({mpq_class(j, N + 1), mpq_class(j, N)});
  return OpenIntervalSet(std::move(v));
}

bool OpenIntervalSet::contains(const mpq_class& t) const {
  auto it = std::upper_bound(parts_.begin(), parts_.end(), t,
                             [](const mpq_class& x, const OpenInterval& p) { return x < p.b; });
  return it != parts_.end() && it->a < t;
}

bool OpenIntervalSet::contains(double t) const { return contains(exact_rational(t)); }

mpq_class OpenIntervalSet::inf() const { return parts_.empty() ? mpq_class(0) : parts_.front().a; }
mpq_class OpenIntervalSet::sup() const { return parts_.empty() ? mpq_class(0) : parts_.back().b; }

OpenIntervalSet OpenIntervalSet::clip(const mpq_class& lo, const mpq_class& hi) const {
  std::vector<OpenInterval> v;
  for (auto& p : parts_) {
    mpq_class a = std::max(p.a, lo), b = std::min(p.b, hi);
    if (a < b) v.push_back({a, b});
  }
  return OpenIntervalSet(std::move(v));
}

nlohmann::json OpenIntervalSet::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (auto& p : parts_)
    j.push_back({{"num_a", p.a.get_num().get_str()},
                 {"den_a", p.a.get_den().get_str()},
                 {"num_b", p.b.get_num().get_str()},
                 {"den_b", p.b.get_den().get_str()}});
  return j;
}

OpenIntervalSet OpenIntervalSet::from_json(const nlohmann::json& j) {
  auto field = [](const nlohmann::json& e, const char* k) {
    const auto& f = e.at(k);
    return f.is_string() ? mpz_class(f.get<std::string>()) : mpz_class(std::to_string(f.get<long long>()));
  };
  std::vector<OpenInterval> v;
  for (auto& e : j) {
    mpq_class a(field(e, "num_a"), field(e, "den_a")), b(field(e, "num_b"), field(e, "den_b"));
    a.canonicalize();
    b.canonicalize();
    v.push_back({a, b});
  }
  return OpenIntervalSet(std::move(v));
}

double mass(const OpenIntervalSet& T) {
  mpfr_t acc, a, b;
  mpfr_inits2(256, acc, a, b, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_ui(acc, 0, MPFR_RNDN);
  for (auto& p : T.intervals()) {
    mpq_class r = p.b / p.a;
    mpfr_set_q(a, r.get_mpq_t(), MPFR_RNDN);
    mpfr_log(a, a, MPFR_RNDN);
    mpfr_add(acc, acc, a, MPFR_RNDN);
  }
  double out = mpfr_get_d(acc, MPFR_RNDN);
  mpfr_clears(acc, a, b, static_cast<mpfr_ptr>(nullptr));
  return out;
}

// ---------------------------------------------------------------------------
// Exact sum sets

namespace {

// (S + T) with components starting at or beyond `cut` discarded.
std::vector<OpenInterval> sum_sets(const std::vector<OpenInterval>& S, const std::vector<OpenInterval>& T,
                                   const mpq_class& cut, std::size_t limit) {
  std::vector<OpenInterval> raw;
  for (auto& s : S)
    for (auto& t : T) {
      mpq_class a = s.a + t.a;
      if (a >= cut) break;  // T is sorted by left endpoint
      raw.push_back({a, s.b + t.b});
    }
  auto out = OpenIntervalSet(std::move(raw)).intervals();
  if (out.size() > limit) throw IntervalBlowup("sum set exceeds the component limit");
  return out;
}

bool contains_one(const std::vector<OpenInterval>& S) {
  const mpq_class one(1);
  for (auto& p : S)
    if (p.a < one && one < p.b) return true;
  return false;
}

// Pick t in T and s - t in the (j-1)-fold set, descending to j = 1.
std::vector<mpq_class> backtrack(const std::vector<std::vector<OpenInterval>>& levels, mpq_class s) {
  std::vector<mpq_class> w;
  const auto& T = levels[0];
  for (std::size_t j = levels.size(); j >= 2; --j) {
    const auto& prev = levels[j - 2];
    bool found = false;
    for (auto& I : T) {
      for (auto& J : prev) {
        if (!(I.a + J.a < s && s < I.b + J.b)) continue;
        mpq_class lo = std::max(I.a, mpq_class(s - J.b)), hi = std::min(I.b, mpq_class(s - J.a));
        if (!(lo < hi)) continue;
        mpq_class t = (lo + hi) / 2;
        w.push_back(t);
        s -= t;
        found = true;
        break;
      }
      if (found) break;
    }
    if (!found) throw InvariantViolation("reachability witness reconstruction failed");
  }
  w.push_back(s);
  return w;
}

}  // namespace

nlohmann::json Reachability::to_json() const {
  nlohmann::json wit = nlohmann::json::array();
  for (auto& t : witness) wit.push_back(t.get_str());
  return {{"reachable", reachable},
          {"k", k},
          {"witness", wit},
          {"checked_up_to", checked_up_to},
          {"components", components}};
}

Reachability reachable_one(const OpenIntervalSet& T, unsigned k_max, std::size_t component_limit) {
  if (k_max < 1 || k_max > 64) throw PreconditionFail("k_max must be in 1..64");
  Reachability r;
  const mpq_class one(1);
  std::vector<std::vector<OpenInterval>> levels;
  levels.push_back(T.clip(0, 2).intervals());
  for (unsigned k = 1; k <= k_max; ++k) {
    if (k > 1) levels.push_back(sum_sets(levels.back(), levels[0], one, component_limit));
    r.components.push_back(levels.back().size());
    r.checked_up_to = k;
    if (contains_one(levels.back())) {
      r.reachable = true;
      r.k = k;
      const mpq_class sym(1, k);
      if (T.contains(sym))
        r.witness.assign(k, sym);
      else
        r.witness = backtrack(levels, one);
      mpq_class total(0);
      for (auto& t : r.witness) {
        if (!T.contains(t)) throw InvariantViolation("witness element outside T");
        total += t;
      }
      if (total != one) throw InvariantViolation("witness does not sum to 1");
      return r;
    }
    if (levels.back().empty()) {
      // every further sum set is empty below 1 as well
      r.checked_up_to = k_max;
      return r;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Grid convolution

namespace {

constexpr double kEps = 0x1.0p-53;

// Per-bin dt/t mass of T on [i h, (i+1) h), i < bins.
std::vector<double> bin_masses(const OpenIntervalSet& T, double h, std::size_t bins) {
  std::vector<double> m(bins, 0.0);
  for (auto& p : T.intervals()) {
    const double a = p.a.get_d(), b = p.b.get_d();
    auto i0 = static_cast<std::size_t>(std::floor(a / h));
    for (std::size_t i = i0; i < bins; ++i) {
      const double lo = std::max(a, static_cast<double>(i) * h);
      const double hi = std::min(b, static_cast<double>(i + 1) * h);
      if (lo >= b) break;
      if (hi > lo) m[i] += std::log1p((hi - lo) / lo);
    }
  }
  return m;
}

double l1(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += std::fabs(x);
  return s;
}

// First n_out coefficients of a * b, with an absolute per-entry error bound.
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b, std::size_t n_out,
                             double& err) {
  std::vector<double> out(n_out, 0.0);
  const long double work = static_cast<long double>(a.size()) * b.size();
  if (work <= 4e6L) {
    for (std::size_t i = 0; i < a.size() && i < n_out; ++i) {
      if (a[i] == 0) continue;
      for (std::size_t j = 0; j < b.size() && i + j < n_out; ++j) out[i + j] += a[i] * b[j];
    }
    err = 2 * static_cast<double>(std::min(a.size(), b.size())) * kEps * l1(a) * l1(b);
    return out;
  }
  std::size_t L = 1;
  while (L < a.size() + b.size()) L <<= 1;
  const std::size_t C = L / 2 + 1;
  double* in = fftw_alloc_real(L);
  fftw_complex* fa = fftw_alloc_complex(C);
  fftw_complex* fb = fftw_alloc_complex(C);
  fftw_plan pa = fftw_plan_dft_r2c_1d(static_cast<int>(L), in, fa, FFTW_ESTIMATE);
  fftw_plan pb = fftw_plan_dft_r2c_1d(static_cast<int>(L), in, fb, FFTW_ESTIMATE);
  fftw_plan pi = fftw_plan_dft_c2r_1d(static_cast<int>(L), fa, in, FFTW_ESTIMATE);
  std::fill(in, in + L, 0.0);
  std::copy(a.begin(), a.end(), in);
  fftw_execute(pa);
  std::fill(in, in + L, 0.0);
  std::copy(b.begin(), b.end(), in);
  fftw_execute(pb);
  for (std::size_t i = 0; i < C; ++i) {
    const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
    const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
    fa[i][0] = re;
    fa[i][1] = im;
  }
  fftw_execute(pi);
  for (std::size_t i = 0; i < n_out && i < L; ++i) out[i] = in[i] / static_cast<double>(L);
  fftw_destroy_plan(pa);
  fftw_destroy_plan(pb);
  fftw_destroy_plan(pi);
  fftw_free(in);
  fftw_free(fa);
  fftw_free(fb);
  err = 10 * std::log2(static_cast<double>(L)) * kEps * l1(a) * l1(b);
  for (auto& x : out)
    if (x < 0) x = 0;  // the true coefficients are nonnegative
  return out;
}

// Whether 1 lies in the k-fold sum set, when that is cheap to decide exactly.
std::optional<bool> one_in_k_fold(const OpenIntervalSet& T, unsigned k) {
  const mpq_class one(1);
  std::vector<OpenInterval> base = T.clip(0, 1).intervals();
  std::vector<OpenInterval> cur = base;
  for (unsigned j = 2; j <= k; ++j) {
    if (static_cast<long double>(cur.size()) * base.size() > 2e6L) return std::nullopt;
    cur = sum_sets(cur, base, one, 1'000'000);
  }
  return contains_one(cur);
}

struct Components {
  std::vector<double> a, b;
  explicit Components(const OpenIntervalSet& T) {
    for (auto& p : T.intervals()) {
      a.push_back(p.a.get_d());
      b.push_back(p.b.get_d());
    }
  }
  // min and max of 1_T(t)/t over t in (L, R]
  std::pair<double, double> range(double L, double R) const {
    double mn = 0.0, mx = 0.0;
    auto it = std::upper_bound(b.begin(), b.end(), L);
    for (auto i = static_cast<std::size_t>(it - b.begin()); i < a.size() && a[i] < R; ++i) {
      const double tmin = std::max(L, a[i]);
      if (tmin > 0) mx = std::max(mx, 1.0 / tmin);
      if (a[i] <= L && R < b[i] && L > 0) mn = 1.0 / R;
    }
    return {mn, mx};
  }
  double g(double t) const {
    auto it = std::upper_bound(b.begin(), b.end(), t);
    if (it == b.end()) return 0.0;
    auto i = static_cast<std::size_t>(it - b.begin());
    return a[i] < t ? 1.0 / t : 0.0;
  }
};

}  // namespace

nlohmann::json SimplexResult::to_json() const {
  return {{"k", k},         {"M", M},         {"value", value},
          {"lower", lower}, {"upper", upper}, {"error_bound", error_bound}};
}

SimplexResult simplex_integral_conv(const OpenIntervalSet& T, unsigned k, std::uint64_t M, double tol) {
  if (k < 2) throw PreconditionFail("simplex integral needs k >= 2");
  if (M < 1000) throw PreconditionFail("simplex integral needs M >= 1000");
  SimplexResult r;
  r.k = k;
  r.M = M;
  if (auto hit = one_in_k_fold(T, k); hit && !*hit) return r;  // support is empty: exactly 0

  const double h = 1.0 / static_cast<double>(M);
  const auto bins = static_cast<std::size_t>(M);
  auto mu = bin_masses(T, h, bins);
  const double mu_l1 = l1(mu);
  std::vector<double> P = mu;
  double perr = 4 * kEps * *std::max_element(mu.begin(), mu.end());  // per-entry bound on P
  for (unsigned j = 2; j <= k - 1; ++j) {
    double cerr = 0;
    P = convolve(P, mu, bins, cerr);
    perr = perr * mu_l1 + cerr;
  }
  const Components comp(T);
  const double gmax = 1.0 / T.inf().get_d();
  long double lo = 0, hi = 0, mid = 0;
  for (std::size_t S = 0; S < bins; ++S) {
    if (P[S] == 0) continue;
    const double L = 1.0 - static_cast<double>(S + k - 1) * h;
    const double R = 1.0 - static_cast<double>(S) * h;
    if (R <= 0) break;
    auto [mn, mx] = comp.range(L, R);
    lo += P[S] * mn;
    hi += P[S] * mx;
    mid += P[S] * comp.g(1.0 - (static_cast<double>(S) + 0.5 * (k - 1)) * h);
  }
  const double numeric = perr * gmax * static_cast<double>(bins) + 8 * kEps * static_cast<double>(hi);
  r.lower = std::max(0.0, static_cast<double>(lo) - numeric);
  r.upper = static_cast<double>(hi) + numeric;
  r.value = std::clamp(static_cast<double>(mid), r.lower, r.upper);
  r.error_bound = std::max(r.upper - r.value, r.value - r.lower);
  if (r.error_bound > tol) throw ResolutionTooCoarse("simplex integral error bar exceeds tolerance");
  return r;
}

nlohmann::json MonteCarloResult::to_json() const {
  return {{"k", k}, {"samples", samples}, {"seed", seed}, {"mean", mean}, {"std_error", std_error}};
}

MonteCarloResult simplex_integral_mc(const OpenIntervalSet& T, unsigned k, std::uint64_t samples,
                                     std::uint64_t seed) {
  if (k < 2) throw PreconditionFail("simplex integral needs k >= 2");
  MonteCarloResult r;
  r.k = k;
  r.samples = samples;
  r.seed = seed;
  if (T.empty() || samples == 0) return r;
  const Components comp(T);
  std::vector<double> cum;
  double total = 0;
  for (std::size_t i = 0; i < comp.a.size(); ++i) {
    total += std::log(comp.b[i] / comp.a[i]);
    cum.push_back(total);
  }
  const double m = mass(T);
  const double scale = std::pow(m, static_cast<double>(k - 1));
  constexpr std::size_t kStreams = 64;
  std::vector<long double> sum(kStreams, 0), sumsq(kStreams, 0);
  parallel_chunks(kStreams, [&](std::size_t s) {
    SplitMix64 g(derive_seed(seed, s));
    const std::uint64_t n = samples / kStreams + (s < samples % kStreams ? 1 : 0);
    long double acc = 0, acc2 = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      double rest = 1.0;
      for (unsigned j = 0; j + 1 < k; ++j) {
        const double pick = g.uniform() * total;
        auto c = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin());
        if (c >= cum.size()) c = cum.size() - 1;
        const double t = comp.a[c] * std::exp(g.uniform() * std::log(comp.b[c] / comp.a[c]));
        rest -= t;
      }
      const double val = rest > 0 ? comp.g(rest) * scale : 0.0;
      acc += val;
      acc2 += static_cast<long double>(val) * val;
    }
    sum[s] = acc;
    sumsq[s] = acc2;
  });
  long double S = 0, S2 = 0;
  for (std::size_t s = 0; s < kStreams; ++s) {
    S += sum[s];
    S2 += sumsq[s];
  }
  const long double n = static_cast<long double>(samples);
  const long double mean = S / n;
  const long double var = samples > 1 ? std::max(0.0L, (S2 - n * mean * mean) / (n - 1)) : 0.0L;
  r.mean = static_cast<double>(mean);
  r.std_error = static_cast<double>(std::sqrt(var / n));
  return r;
}

void MassDensityGrid::write_binary(std::ostream& out) const {
  auto put64 = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto putd = [&](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put64(bits);
  };
  put64(M);
  putd(s_max);
  putd(total_mass);
  putd(error_bound);
  for (double v : values) putd(v);
}

MassDensityGrid convolution_grid(const OpenIntervalSet& T, unsigned k, std::uint64_t M, double s_max) {
  if (k < 1 || M < 1 || !(s_max > 0)) throw PreconditionFail("grid needs k >= 1, M >= 1, s_max > 0");
  MassDensityGrid g;
  g.M = M;
  g.s_max = s_max;
  const double h = s_max / static_cast<double>(M);
  const auto bins = static_cast<std::size_t>(M);
  auto mu = bin_masses(T, h, bins);
  g.values = mu;
  double err = 4 * kEps * *std::max_element(mu.begin(), mu.end());
  for (unsigned j = 2; j <= k; ++j) {
    double cerr = 0;
    g.values = convolve(g.values, mu, bins, cerr);
    err = err * l1(mu) + cerr;
  }
  g.total_mass = l1(g.values);
  g.error_bound = err * static_cast<double>(bins);
  return g;
}

// ---------------------------------------------------------------------------
// Continuous hypothesis and window

nlohmann::json HypTReport::to_json() const {
  nlohmann::json rws = nlohmann::json::array();
  for (auto& rw : rows)
    rws.push_back({{"k", rw.k}, {"integral", rw.integral}, {"error_bound", rw.error_bound}, {"tau", rw.tau}});
  return {{"precondition_met", precondition_met},
          {"lambda3", lambda3},
          {"mass", mass},
          {"k", k},
          {"integral", integral},
          {"error_bound", error_bound},
          {"implied_constant", implied_tau},
          {"rows", rws}};
}

HypTReport hypT_check(const OpenIntervalSet& T, double u, double v, double lambda3, std::uint64_t M) {
  if (!(u >= 1 && v >= u)) throw PreconditionFail("need 1 <= u <= v");
  if (T.empty()) throw PreconditionFail("T is empty");
  if (T.inf().get_d() * kE * v < 1 - 1e-15) throw PreconditionFail("T reaches below 1/(ev)");
  if (T.sup() * exact_rational(u) > 1) throw PreconditionFail("T reaches above 1/u");
  HypTReport r;
  r.lambda3 = lambda3;
  r.mass = mass(T);
  r.precondition_met = r.mass >= (1 + lambda3) / u;
  const auto klo = static_cast<unsigned>(std::ceil(u)), khi = static_cast<unsigned>(std::floor(kE * v));
  double best = -1;
  for (unsigned k = std::max(1u, klo); k <= khi; ++k) {
    SimplexResult s;
    if (k >= 2) s = simplex_integral_conv(T, k, M);  // k = 1 would need 1 in T
    const double tau = s.value / std::pow(r.mass, static_cast<double>(k));
    r.rows.push_back({k, s.value, s.error_bound, tau});
    if (tau > best) {
      best = tau;
      r.k = k;
      r.integral = s.value;
      r.error_bound = s.error_bound;
      r.implied_tau = tau;
    }
  }
  return r;
}

nlohmann::json WindowSearchResult::to_json() const {
  return {{"ell", ell},
          {"mass_lower", mass_lower},
          {"mass_upper", mass_upper},
          {"required", required},
          {"guarantee_certified", guarantee_certified},
          {"guarantee_refuted", guarantee_refuted},
          {"M", M}};
}

WindowSearchResult window_search(const OpenIntervalSet& T, double v, double w, std::uint64_t M,
                                 std::uint64_t M_max) {
  if (!(v >= 1)) throw PreconditionFail("need v >= 1");
  if (!(w >= 1 / v)) throw PreconditionFail("need w >= 1/v");
  if (T.empty()) throw PreconditionFail("T is empty");
  if (T.inf().get_d() * kE * v < 1 - 1e-15) throw PreconditionFail("T reaches below 1/(ev)");
  const double m = mass(T);
  const double evw = kE * v * w;
  const auto L_max = static_cast<unsigned>(std::floor(evw));
  const double lo_w = w - 1 / v;
  WindowSearchResult best;
  for (std::uint64_t MM = M; MM <= M_max; MM *= 2) {
    const double h = w / static_cast<double>(MM);
    const auto bins = static_cast<std::size_t>(MM) + 1;
    auto mu = bin_masses(T, h, bins);
    const double mu_l1 = l1(mu);
    std::vector<double> P = mu;
    double perr = 4 * kEps * *std::max_element(mu.begin(), mu.end());
    best = WindowSearchResult{};
    best.M = MM;
    double best_score = -1;
    bool any_possible = false;
    for (unsigned ell = 1; ell <= L_max; ++ell) {
      if (ell > 1) {
        double cerr = 0;
        P = convolve(P, mu, bins, cerr);
        perr = perr * mu_l1 + cerr;
      }
      long double certain = 0, possible = 0;
      for (std::size_t S = 0; S < bins; ++S) {
        if (P[S] == 0) continue;
        const double s_lo = static_cast<double>(S) * h, s_hi = static_cast<double>(S + ell) * h;
        if (s_lo > lo_w && s_hi <= w) certain += P[S];
        if (s_lo <= w && s_hi > lo_w) possible += P[S];
      }
      const double slack = perr * static_cast<double>(bins) + 8 * kEps * static_cast<double>(possible);
      const double lower = std::max(0.0, static_cast<double>(certain) - slack);
      const double upper = static_cast<double>(possible) + slack;
      const double required = std::pow(m, static_cast<double>(ell)) / evw;
      if (upper >= required) any_possible = true;
      const double score = lower / required;
      if (score > best_score) {
        best_score = score;
        best.ell = ell;
        best.mass_lower = lower;
        best.mass_upper = upper;
        best.required = required;
      }
    }
    best.guarantee_certified = best.ell > 0 && best.mass_lower >= best.required;
    best.guarantee_refuted = !any_possible;
    if (best.guarantee_certified || best.guarantee_refuted) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Transforms between T and A

TToA t_to_a(const OpenIntervalSet& T, std::uint64_t N, double u, double v) {
  TToA r;
  std::vector<std::uint64_t> el;
  const mpq_class Nq(mpz_class(std::to_string(N)));
  for (auto& p : T.intervals()) {
    // alpha N + 2ev < a < beta N - 2ev; both bounds are irrational
    const mpz_class lo = hp::floor_shift_by_ev(p.a * Nq, +1, 2 * v) + 1;
    const mpz_class hi = hp::floor_shift_by_ev(p.b * Nq, -1, 2 * v);
    if (lo > hi) {
      ++r.empty_intervals;
      continue;
    }
    for (mpz_class a = lo; a <= hi; ++a) el.push_back(a.get_ui());
  }
  r.A = WeightedIntegerSet::make(N, u, v, std::move(el));
  r.mass_T = mass(T);
  r.recip_A = r.A.reciprocal_sum_approx();
  r.discrepancy = std::fabs(r.recip_A - r.mass_T);
  return r;
}

AToT a_to_t(const WeightedIntegerSet& A) {
  AToT r;
  std::vector<OpenInterval> parts;
  for (auto a : A.elements) {
    if (a == 0) throw PreconditionFail("a_to_t needs positive elements");
    parts.push_back({mpq_class(a, A.N), mpq_class(a + 1, A.N)});
  }
  for (auto& p : parts) {
    p.a.canonicalize();
    p.b.canonicalize();
  }
  r.T = OpenIntervalSet(std::move(parts));
  r.mass_T = mass(r.T);
  r.recip_A = A.reciprocal_sum_approx();
  r.discrepancy = std::fabs(r.recip_A - r.mass_T);
  return r;
}

}  // namespace sievelab
