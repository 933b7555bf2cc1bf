#include "sievelab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sievelab/continuous_sets.hpp"
#include "sievelab/discrete_comb.hpp"
#include "sievelab/errors.hpp"
#include "sievelab/numeric.hpp"
#include "sievelab/predictions.hpp"
#include "sievelab/sieve_counts.hpp"

namespace sievelab {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& s) {
  // accepts plain integers and exact powers such as 1e8
  try {
    std::size_t pos = 0;
    if (s.find_first_of("eE.") == std::string::npos) {
      auto v = std::stoull(s, &pos);
      if (pos == s.size()) return v;
    } else {
      double d = std::stod(s, &pos);
      if (pos == s.size() && d >= 0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
    }
  } catch (const std::exception&) {
  }
  throw PreconditionFail("not a natural number: '" + s + "'");
}

double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    double d = std::stod(s, &pos);
    if (pos == s.size()) return d;
  } catch (const std::exception&) {
  }
  throw PreconditionFail("not a number: '" + s + "'");
}

// "1/3", "0.25" or "2" as an exact rational.
mpq_class parse_rational(const std::string& s) {
  try {
    if (s.find('/') != std::string::npos) {
      mpq_class q(s);
      q.canonicalize();
      return q;
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return mpq_class(mpz_class(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    mpz_class den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    mpq_class q(mpz_class(digits), den);
    q.canonicalize();
    return q;
  } catch (const std::exception&) {
    throw PreconditionFail("not a rational: '" + s + "'");
  }
}

// floor(x^e) with the boundary decided at 256 bits; an exact power counts as equal.
std::uint64_t floor_power(std::uint64_t x, double e) {
  auto c = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<long double>(x), static_cast<long double>(e))));
  auto cmp = [&](std::uint64_t n) { return hp::compare_to_power(mpz_class(std::to_string(n)), static_cast<double>(x), e); };
  while (cmp(c + 1) != Cmp::Greater) ++c;
  while (c > 0 && cmp(c) == Cmp::Greater) --c;
  return c;
}

OpenIntervalSet interval_set_from_spec(const ExperimentConfig& cfg) {
  if (cfg.has("tfamily")) return OpenIntervalSet::t_family(static_cast<unsigned>(cfg.get_u64("tfamily", 2)));
  std::string spec = cfg.get("T", "");
  if (spec.empty()) return OpenIntervalSet::t_family(2);
  std::vector<OpenInterval> parts;
  for (auto& piece : split(spec, ',')) {
    auto ab = split(trim(piece), ':');
    if (ab.size() != 2) throw PreconditionFail("interval '" + piece + "' is not a:b");
    parts.push_back({parse_rational(trim(ab[0])), parse_rational(trim(ab[1]))});
  }
  return OpenIntervalSet(std::move(parts));
}

CountConfig count_config(const ExperimentConfig& cfg) {
  CountConfig c;
  c.ceiling = cfg.budget;
  c.primes.ceiling = std::max<std::uint64_t>(cfg.budget, c.primes.ceiling);
  c.dfs_node_budget = cfg.get_u64("nodes", c.dfs_node_budget);
  return c;
}

SlackConfig slack_config(const ExperimentConfig& cfg) {
  SlackConfig s;
  s.log_weight = cfg.get_double("slack_log_weight", s.log_weight);
  s.hall = cfg.get_double("slack_hall", s.hall);
  s.hildebrand_band = cfg.get_double("slack_hildebrand", s.hildebrand_band);
  s.friedlander_band = cfg.get_double("slack_friedlander", s.friedlander_band);
  return s;
}

void check_budget(std::uint64_t x, const ExperimentConfig& cfg) {
  if (x > cfg.budget) throw BudgetExceeded("x = " + std::to_string(x) + " above --budget");
}

ExperimentReport start(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.config = cfg.to_json();
  r.timing = cfg.timing;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

std::string ExperimentConfig::get(const std::string& key, const std::string& def) const {
  auto it = params.find(key);
  return it == params.end() ? def : it->second;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t def) const {
  auto it = params.find(key);
  return it == params.end() ? def : parse_u64(it->second);
}

double ExperimentConfig::get_double(const std::string& key, double def) const {
  auto it = params.find(key);
  return it == params.end() ? def : parse_double(it->second);
}

std::vector<std::uint64_t> ExperimentConfig::get_u64_list(const std::string& key,
                                                          std::vector<std::uint64_t> def) const {
  auto it = params.find(key);
  if (it == params.end()) return def;
  std::vector<std::uint64_t> out;
  for (auto& s : split(it->second, ',')) out.push_back(parse_u64(trim(s)));
  return out;
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key, std::vector<double> def) const {
  auto it = params.find(key);
  if (it == params.end()) return def;
  std::vector<double> out;
  for (auto& s : split(it->second, ',')) out.push_back(parse_double(trim(s)));
  return out;
}

void ExperimentConfig::set_pair(const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw PreconditionFail("expected key=value, got '" + kv + "'");
  std::string key = trim(kv.substr(0, eq)), value = trim(kv.substr(eq + 1));
  if (key == "experiment")
    experiment = value;
  else if (key == "seed")
    seed = parse_u64(value);
  else if (key == "budget")
    budget = parse_u64(value);
  else if (key == "format")
    format = value;
  else if (key == "jobs")
    jobs = static_cast<unsigned>(parse_u64(value));
  else
    params[key] = value;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json p = nlohmann::json::object();
  for (auto& [k, v] : params) p[k] = v;
  return {{"experiment", experiment}, {"params", p},   {"seed", seed},
          {"budget", budget},         {"format", format}, {"jobs", jobs}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.experiment = j.at("experiment").get<std::string>();
  for (auto& [k, v] : j.at("params").items()) c.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
  c.seed = j.value("seed", c.seed);
  c.budget = j.value("budget", c.budget);
  c.format = j.value("format", c.format);
  c.jobs = j.value("jobs", c.jobs);
  return c;
}

ExperimentConfig ExperimentConfig::from_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionFail("cannot open config file " + path);
  ExperimentConfig c;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (!line.empty()) c.set_pair(line);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Report

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j{{"schema", kReportSchema}, {"version", kVersion}, {"config", config},
                   {"rows", rows},            {"derived", derived},  {"checksums", checksums},
                   {"precondition_met", precondition_met}};
  if (timing) j["wall_clock_s"] = wall_clock;
  return j;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  if (rows.empty()) return "";
  std::vector<std::string> cols;
  for (auto& [k, v] : rows.front().items()) cols.push_back(k);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (auto& row : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ",";
      if (!row.contains(cols[i])) continue;
      const auto& v = row[cols[i]];
      std::string s = v.is_string() ? v.get<std::string>() : v.dump();
      if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        s = q + "\"";
      }
      out << s;
    }
    out << "\n";
  }
  return out.str();
}

std::string ExperimentReport::serialize(const std::string& format) const {
  if (format == "csv") return to_csv();
  if (format == "json") return to_json().dump(2) + "\n";
  throw PreconditionFail("format must be json or csv");
}

// ---------------------------------------------------------------------------
// Prime set specs

PrimeSet prime_set_from_spec(const std::string& spec, std::uint64_t x, const SieveConfig& cfg) {
  auto parts = split(spec, ':');
  const std::string kind = parts.empty() ? "" : parts[0];
  auto arg = [&](std::size_t i) {
    if (parts.size() <= i) throw PreconditionFail("prime set spec '" + spec + "' is missing fields");
    return parts[i];
  };
  if (kind == "all") return primes_up_to(x, cfg);
  if (kind == "none") return PrimeSet::explicit_list(x, {});
  if (kind == "list") {
    std::vector<std::uint64_t> m;
    for (auto& s : split(arg(1), ',')) m.push_back(parse_u64(trim(s)));
    std::sort(m.begin(), m.end());
    for (auto p : m)
      if (!is_prime_mr(p)) throw PreconditionFail(std::to_string(p) + " is not prime");
    return PrimeSet::explicit_list(x, std::move(m));
  }
  if (kind == "range") return prime_range(x, parse_u64(arg(1)), parse_u64(arg(2)), cfg);
  if (kind == "smooth") return prime_range(x, 0, parse_u64(arg(1)), cfg);
  if (kind == "root") return prime_range(x, 0, floor_power(x, 1.0 / parse_double(arg(1))), cfg);
  if (kind == "power") return from_power_intervals(x, static_cast<unsigned>(parse_u64(arg(1))), false, cfg);
  if (kind == "power-aug") return from_power_intervals(x, static_cast<unsigned>(parse_u64(arg(1))), true, cfg);
  if (kind == "congruence") return from_congruence(x, parse_u64(arg(1)), parse_u64(arg(2)), cfg);
  if (kind == "friedlander") {
    const double u = parse_double(arg(1)), v = parse_double(arg(2));
    if (!(u >= 1 && v > u)) throw PreconditionFail("friedlander set needs 1 <= u < v");
    auto small = prime_range(x, floor_power(x, 1.0 / v), floor_power(x, 1.0 / u), cfg);
    auto large = prime_range(x, floor_power(x, 1.0 - 1.0 / v), x, cfg);
    return set_union(small, large);
  }
  throw PreconditionFail("unknown prime set spec '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Named experiments

ExperimentReport run_counterexample_scan(const std::vector<std::uint64_t>& xs, unsigned N, bool augmented,
                                         const ExperimentConfig& cfg) {
  for (auto x : xs) check_budget(x, cfg);
  ExperimentReport r = start(cfg);
  const CountConfig cc = count_config(cfg);
  std::vector<nlohmann::json> rows(xs.size());
  std::vector<std::uint64_t> sums(xs.size());
  auto one = [&](std::size_t i) {
    const std::uint64_t x = xs[i];
    PrimeSet P = from_power_intervals(x, N, augmented, cc.primes);
    const auto psi = psi_sieve(x, P, cc).value;
    const double uP = u_of(P, x, cc.primes);
    const double xd = static_cast<double>(x);
    rows[i] = {{"x", x},
               {"N", N},
               {"augmented", augmented},
               {"set_size", P.size()},
               {"set_checksum", P.checksum()},
               {"psi", psi},
               {"u_P", uP},
               {"expected", xd / uP},
               {"ratio", static_cast<double>(psi) * std::log(xd) * uP / xd},
               {"ratio_to_expected", static_cast<double>(psi) * uP / xd}};
    sums[i] = P.checksum();
  };
  if (cfg.jobs > 1)
    parallel_chunks(xs.size(), one);
  else
    for (std::size_t i = 0; i < xs.size(); ++i) one(i);
  auto strictly_decreasing = [&](const char* key) {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (!(rows[i][key].get<double>() < rows[i - 1][key].get<double>())) return false;
    return true;
  };
  r.rows = rows;
  r.checksums = sums;
  r.derived["ratio_strictly_decreasing"] = strictly_decreasing("ratio");
  r.derived["ratio_to_expected_strictly_decreasing"] = strictly_decreasing("ratio_to_expected");
  return r;
}

ExperimentReport run_congruence_example(std::uint64_t x, std::uint64_t q, double u, const ExperimentConfig& cfg) {
  check_budget(x, cfg);
  if (!(u > 1)) throw PreconditionFail("congruence example needs u > 1");
  ExperimentReport r = start(cfg);
  const CountConfig cc = count_config(cfg);
  const unsigned grid = static_cast<unsigned>(cfg.get_u64("grid", 12));
  if (grid < 2) throw PreconditionFail("grid >= 2");
  PrimeSet P = from_congruence(x, q, 1, cc.primes);
  const std::uint64_t t0 = floor_power(x, 1.0 / u);
  std::vector<std::uint64_t> ts;
  const double l0 = std::log(static_cast<double>(t0)), l1 = std::log(static_cast<double>(x));
  for (unsigned i = 0; i < grid; ++i) {
    auto t = static_cast<std::uint64_t>(std::llround(std::exp(l0 + (l1 - l0) * i / (grid - 1))));
    t = std::clamp<std::uint64_t>(t, t0, x);
    if (ts.empty() || t > ts.back()) ts.push_back(t);
  }
  ts.back() = x;
  auto psi = psi_profile(x, P, ts, cc);
  // prod over p in E, p <= t of (1 - 1/p), at each checkpoint
  PrimeSet E = complement_within(P, x, cc.primes);
  std::vector<double> prods(ts.size());
  CompensatedSum logs;
  std::size_t ci = 0;
  for (auto p : E) {
    while (ci < ts.size() && p > ts[ci]) prods[ci++] = std::exp(logs.value());
    logs.add(std::log1p(-1.0 / static_cast<double>(p)));
  }
  while (ci < ts.size()) prods[ci++] = std::exp(logs.value());
  double worst = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double density = static_cast<double>(psi[i]) / static_cast<double>(ts[i]);
    const double shape = prods[i] / static_cast<double>(q);
    r.rows.push_back({{"t", ts[i]},
                      {"q", q},
                      {"psi", psi[i]},
                      {"density", density},
                      {"sieve_product", prods[i]},
                      {"shape", shape},
                      {"ratio", density / shape}});
    worst = std::max(worst, density / shape);
  }
  r.checksums = {P.checksum()};
  r.derived["max_ratio"] = worst;
  r.derived["u"] = u;
  return r;
}

ExperimentReport run_friedlander_example(std::uint64_t x, double u, double v, const ExperimentConfig& cfg) {
  check_budget(x, cfg);
  ExperimentReport r = start(cfg);
  const CountConfig cc = count_config(cfg);
  const SlackConfig slack = slack_config(cfg);
  std::ostringstream spec;
  spec.precision(17);
  spec << "friedlander:" << u << ":" << v;
  PrimeSet P = prime_set_from_spec(spec.str(), x, cc.primes);
  const auto psi = psi_sieve(x, P, cc).value;
  const double uP = u_of(P, x, cc.primes);
  const double xd = static_cast<double>(x);
  const double expected = xd / uP;
  const double measured = static_cast<double>(psi) / expected;
  const double predicted = u * dickman_rho(u) * (1 - 1 / v);
  const double dev = std::fabs(measured / predicted - 1);
  nlohmann::json row{{"x", x},
                     {"u", u},
                     {"v", v},
                     {"set_size", P.size()},
                     {"set_checksum", P.checksum()},
                     {"psi", psi},
                     {"expected", expected},
                     {"measured_ratio", measured},
                     {"predicted_ratio", predicted},
                     {"relative_deviation", dev},
                     {"band", slack.friedlander_band},
                     {"within_band", dev <= slack.friedlander_band}};
  if (u == 1.0) {
    // every member exceeds x^{1/v}; with v <= 2 no two of them fit under x
    row["set_size_plus_one"] = P.size() + 1;
  }
  r.rows.push_back(row);
  r.checksums = {P.checksum()};
  r.derived["slack"] = slack.to_json();
  return r;
}

namespace {

nlohmann::json side_row(const std::string& side, unsigned k, double lhs, double constant, double err = 0.0) {
  return {{"side", side}, {"k", k}, {"lhs", lhs}, {"implied_constant", constant}, {"error_bound", err}};
}

// T-side constant at a fixed k.
double tau_at(const OpenIntervalSet& T, unsigned k, std::uint64_t M, double& integral, double& err) {
  if (k < 2) {
    integral = 0;
    err = 0;
    return 0;
  }
  auto s = simplex_integral_conv(T, k, M);
  integral = s.value;
  err = s.error_bound;
  return s.value / std::pow(mass(T), static_cast<double>(k));
}

void p_side_from_a(const WeightedIntegerSet& A, const ExperimentConfig& cfg, ExperimentReport& r) {
  if (A.N > 21) {
    r.derived["p_side"] = "skipped: N > 21";
    return;
  }
  auto ap = a_to_primes(A);
  r.derived["a_to_p_recip_primes"] = ap.recip_primes;
  r.derived["a_to_p_recip_a"] = ap.recip_a;
  r.derived["a_to_p_relative_gap"] = ap.relative_gap;
  r.derived["a_to_p_bound"] = ap.bound;
  r.checksums.push_back(ap.primes.checksum());
  const auto x = hp::floor_exp(static_cast<double>(A.N + 1)).get_ui();
  const auto limit = cfg.get_u64("p_side_limit", 2'000'000);
  if (ap.primes.size() > limit) {
    r.derived["p_side"] = "skipped: " + std::to_string(ap.primes.size()) + " primes above p_side_limit";
    return;
  }
  try {
    auto hP = hypP_check(ap.primes, x, A.u, A.v, cfg.get_double("delta", 0.5), cfg.get_double("lambda1", 0.5),
                         cfg.get_u64("nodes", 20'000'000));
    r.rows.push_back(side_row("P", hP.k, hP.lhs.get_d(), hP.implied_pi));
  } catch (const ExplosionGuard&) {
    r.derived["p_side"] = "node budget exhausted";
  }
}

}  // namespace

ExperimentReport run_hypothesis_pipeline(const ExperimentConfig& cfg) {
  ExperimentReport r = start(cfg);
  const std::string instance = cfg.get("instance", "A");
  const std::uint64_t M = cfg.get_u64("M", 100'000);
  if (instance == "A") {
    const std::uint64_t N = cfg.get_u64("N", 10'000);
    const double u = cfg.get_double("u", 2), v = cfg.get_double("v", 2);
    WeightedIntegerSet A = cfg.has("A") ? WeightedIntegerSet::make(N, u, v, cfg.get_u64_list("A", {}))
                                        : WeightedIntegerSet::full_interval(N, u, v);
    auto hA = hypA_check(A, cfg.get_double("lambda2", 0.5));
    r.precondition_met = hA.precondition_met;
    r.rows.push_back(side_row("A", hA.k, hA.lhs, hA.implied_alpha));
    auto at = a_to_t(A);
    double integral = 0, err = 0;
    const double tau = tau_at(at.T, hA.k, M, integral, err);
    r.rows.push_back(side_row("T", hA.k, integral, tau, err));
    r.derived["a_t_relative_gap"] = hA.implied_alpha > 0 ? std::fabs(tau / hA.implied_alpha - 1) : 0.0;
    r.derived["mass_discrepancy"] = at.discrepancy;
    r.derived["discrepancy_scale"] = v * v / static_cast<double>(N);
    r.checksums.push_back(fnv1a64(A.elements));
    p_side_from_a(A, cfg, r);
  } else if (instance == "T") {
    OpenIntervalSet T = interval_set_from_spec(cfg);
    const double u = cfg.get_double("u", 1), v = cfg.get_double("v", 2);
    const std::uint64_t N = cfg.get_u64("N", 1000);
    auto reach = reachable_one(T, static_cast<unsigned>(cfg.get_u64("kmax", 32)));
    r.derived["reachable"] = reach.reachable;
    r.derived["reach_k"] = reach.k;
    r.derived["reach_checked_up_to"] = reach.checked_up_to;
    auto hT = hypT_check(T, u, v, cfg.get_double("lambda3", 0.5), M);
    r.precondition_met = hT.precondition_met;
    r.rows.push_back(side_row("T", hT.k, hT.integral, hT.implied_tau, hT.error_bound));
    auto ta = t_to_a(T, N, u, v);
    r.derived["mass_discrepancy"] = ta.discrepancy;
    r.derived["discrepancy_scale"] = v * v / static_cast<double>(N);
    r.derived["empty_intervals"] = ta.empty_intervals;
    if (!ta.A.elements.empty()) {
      auto hA = hypA_check(ta.A, cfg.get_double("lambda2", 0.5));
      r.rows.push_back(side_row("A", hA.k, hA.lhs, hA.implied_alpha));
      p_side_from_a(ta.A, cfg, r);
    } else {
      r.rows.push_back(side_row("A", 0, 0.0, 0.0));
    }
  } else if (instance == "P") {
    const std::uint64_t x = cfg.get_u64("x", 1'000'000);
    check_budget(x, cfg);
    const double u = cfg.get_double("u", 1), v = cfg.get_double("v", 2);
    const double delta = cfg.get_double("delta", 0.5);
    PrimeSet P = prime_set_from_spec(cfg.get("set", "power:3"), x);
    // keep only the primes in (x^{1/ev}, x^{1/u}]
    P = P.restrict_to(floor_power(x, 1.0 / (kE * v)), floor_power(x, 1.0 / u), "hypothesis-window");
    auto hP = hypP_check(P, x, u, v, delta, cfg.get_double("lambda1", 0.5), cfg.get_u64("nodes", 50'000'000));
    r.precondition_met = hP.precondition_met;
    r.rows.push_back(side_row("P", hP.k, hP.lhs.get_d(), hP.implied_pi));
    auto pa = p_to_a(P, x, u, v, delta, cfg.get_double("lambda2", 0.5));
    r.derived["p_to_a_N"] = pa.A.N;
    r.derived["p_to_a_size"] = pa.A.elements.size();
    r.checksums.push_back(P.checksum());
    if (!pa.A.elements.empty()) {
      auto hA = hypA_check(pa.A, cfg.get_double("lambda2", 0.5));
      r.rows.push_back(side_row("A", hA.k, hA.lhs, hA.implied_alpha));
      auto at = a_to_t(pa.A);
      double integral = 0, err = 0;
      const double tau = tau_at(at.T, hA.k, M, integral, err);
      r.rows.push_back(side_row("T", hA.k, integral, tau, err));
    } else {
      r.rows.push_back(side_row("A", 0, 0.0, 0.0));
      r.rows.push_back(side_row("T", 0, 0.0, 0.0));
    }
  } else {
    throw PreconditionFail("instance must be A, T or P");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Dispatcher

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport r;
  const std::string& e = cfg.experiment;
  const CountConfig cc = count_config(cfg);

  if (e == "psi") {
    r = start(cfg);
    const std::uint64_t x = cfg.get_u64("x", 30);
    check_budget(x, cfg);
    PrimeSet P = prime_set_from_spec(cfg.get("set", "all"), x, cc.primes);
    const std::string method = cfg.get("method", "sieve");
    nlohmann::json row{{"x", x}, {"set", cfg.get("set", "all")}, {"set_checksum", P.checksum()}};
    if (cfg.has("k")) {
      auto res = psi_k(x, P, static_cast<unsigned>(cfg.get_u64("k", 1)), cc);
      row["k"] = cfg.get_u64("k", 1);
      row["method"] = method_name(res.method);
      row["value"] = res.value;
    } else if (cfg.has("T0")) {
      PrimeSet E = complement_within(P, x, cc.primes);
      auto res = interval_count(cfg.get_u64("T0", 0), x, E, cc);
      row["T0"] = cfg.get_u64("T0", 0);
      row["method"] = method_name(res.method);
      row["value"] = res.value;
    } else if (method == "sieve" || method == "dfs") {
      auto res = method == "sieve" ? psi_sieve(x, P, cc) : psi_dfs(x, P, cc);
      row["method"] = method_name(res.method);
      row["value"] = res.value;
    } else if (method == "both") {
      auto a = psi_sieve(x, P, cc), b = psi_dfs(x, P, cc);
      if (a.value != b.value) throw InvariantViolation("sieve and DFS counts disagree");
      row["method"] = "both";
      row["value"] = a.value;
    } else {
      throw PreconditionFail("method must be sieve, dfs or both");
    }
    r.rows.push_back(row);
    r.checksums = {P.checksum()};
  } else if (e == "benchmark") {
    r = start(cfg);
    auto xs = cfg.get_u64_list("xs", {cfg.get_u64("x", 1'000'000)});
    const SlackConfig slack = slack_config(cfg);
    for (auto x : xs) {
      check_budget(x, cfg);
      PrimeSet P = prime_set_from_spec(cfg.get("set", "all"), x, cc.primes);
      auto b = benchmark(x, P, cc, slack);
      r.rows.push_back({{"x", b.x},
                        {"set_checksum", b.set_checksum},
                        {"u_P", b.u_P},
                        {"expected", b.expected},
                        {"hall_upper", b.hall_upper},
                        {"hildebrand_lower", b.hildebrand_lower},
                        {"rho_out_of_range", b.rho_out_of_range},
                        {"observed", b.observed},
                        {"ratio", b.ratio},
                        {"hall_ok", b.ratio <= slack.hall * kExpGamma}});
      r.checksums.push_back(b.set_checksum);
    }
    r.derived["slack"] = slack.to_json();
    r.derived["expected_convention"] = "x * prod over p in E, p <= x, of (1 - 1/p)";
  } else if (e == "counterexample") {
    r = run_counterexample_scan(cfg.get_u64_list("xs", {100'000, 1'000'000, 10'000'000, 100'000'000}),
                                static_cast<unsigned>(cfg.get_u64("N", 3)), cfg.get_u64("augmented", 0) != 0, cfg);
  } else if (e == "congruence") {
    r = run_congruence_example(cfg.get_u64("x", 100'000'000), cfg.get_u64("q", 5), cfg.get_double("u", 4), cfg);
  } else if (e == "friedlander") {
    r = run_friedlander_example(cfg.get_u64("x", 100'000'000), cfg.get_double("u", 2), cfg.get_double("v", 8), cfg);
  } else if (e == "hyp-a") {
    r = start(cfg);
    const std::uint64_t N = cfg.get_u64("N", 1000);
    const double u = cfg.get_double("u", 1), v = cfg.get_double("v", 2);
    WeightedIntegerSet A = cfg.has("A") ? WeightedIntegerSet::make(N, u, v, cfg.get_u64_list("A", {}))
                                        : WeightedIntegerSet::full_interval(N, u, v);
    auto h = hypA_check(A, cfg.get_double("lambda2", 0.5));
    for (auto& row : h.rows) r.rows.push_back({{"k", row.k}, {"n", row.n}, {"lhs", row.lhs}, {"alpha", row.alpha}});
    r.derived = h.to_json();
    r.derived.erase("rows");
    r.precondition_met = h.precondition_met;
    r.checksums = {fnv1a64(A.elements)};
  } else if (e == "hyp-p") {
    r = start(cfg);
    const std::uint64_t x = cfg.get_u64("x", 1'000'000);
    check_budget(x, cfg);
    const double u = cfg.get_double("u", 1), v = cfg.get_double("v", 2);
    PrimeSet P = prime_set_from_spec(cfg.get("set", "power:3"), x, cc.primes);
    P = P.restrict_to(floor_power(x, 1.0 / (kE * v)), floor_power(x, 1.0 / u), "hypothesis-window");
    auto h = hypP_check(P, x, u, v, cfg.get_double("delta", 0.5), cfg.get_double("lambda1", 0.5),
                        cfg.get_u64("nodes", 50'000'000));
    for (auto& row : h.rows) r.rows.push_back({{"k", row.k}, {"lhs", row.lhs}, {"pi", row.pi}});
    r.derived = h.to_json();
    r.derived.erase("rows");
    r.precondition_met = h.precondition_met;
    r.checksums = {P.checksum()};
  } else if (e == "hyp-t") {
    r = start(cfg);
    OpenIntervalSet T = interval_set_from_spec(cfg);
    auto h = hypT_check(T, cfg.get_double("u", 1), cfg.get_double("v", 2), cfg.get_double("lambda3", 0.5),
                        cfg.get_u64("M", 100'000));
    for (auto& row : h.rows)
      r.rows.push_back({{"k", row.k}, {"integral", row.integral}, {"error_bound", row.error_bound}, {"tau", row.tau}});
    r.derived = h.to_json();
    r.derived.erase("rows");
    auto reach = reachable_one(T, static_cast<unsigned>(cfg.get_u64("kmax", 32)));
    r.derived["reachability"] = reach.to_json();
    r.derived["T"] = T.to_json();
    r.precondition_met = h.precondition_met;
  } else if (e == "pipeline") {
    r = run_hypothesis_pipeline(cfg);
  } else if (e == "dickman") {
    r = start(cfg);
    const double tol = cfg.get_double("tol", 1e-12);
    for (double u : cfg.get_double_list("u", {1, 2, 3, 4, 5})) r.rows.push_back({{"u", u}, {"rho", dickman_rho(u, tol)}});
  } else {
    throw PreconditionFail("unknown experiment '" + e + "'");
  }
  r.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.timing = cfg.timing;
  return r;
}

int exit_code_for(const std::exception& e) {
  if (auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::Precondition:
        return 2;
      case ErrorKind::Budget:
      case ErrorKind::Inconclusive:
        return 3;
      case ErrorKind::Invariant:
        return 4;
    }
  }
  return 4;
}

}  // namespace sievelab
