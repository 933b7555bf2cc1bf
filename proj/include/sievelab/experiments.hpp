#pragma once

// End-to-end experiments behind the CLI. A report echoes its full config, so
// feeding that config back through run_experiment reproduces it byte for byte.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sievelab/prime_sets.hpp"

namespace sievelab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "sievelab-report/1";

struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 1;
  std::uint64_t budget = 1'000'000'000ULL;  // largest sieve bound
  std::string format = "json";
  std::string out;  // directory; empty means stdout
  unsigned jobs = 1;
  bool timing = false;  // wall clock breaks byte-identical re-runs, so it is opt-in

  bool has(const std::string& key) const { return params.count(key) > 0; }
  std::string get(const std::string& key, const std::string& def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  double get_double(const std::string& key, double def) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key, std::vector<std::uint64_t> def) const;
  std::vector<double> get_double_list(const std::string& key, std::vector<double> def) const;

  /// Adds `key=value`; throws PreconditionFail on a malformed pair.
  void set_pair(const std::string& kv);

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// `key=value` lines; `experiment`, `seed`, `budget`, `format`, `jobs` are
  /// reserved keys, `#` starts a comment.
  static ExperimentConfig from_kv_file(const std::string& path);
};

struct ExperimentReport {
  nlohmann::json config;
  nlohmann::json rows = nlohmann::json::array();  // flat objects
  nlohmann::json derived = nlohmann::json::object();
  std::vector<std::uint64_t> checksums;
  double wall_clock = 0.0;
  bool timing = false;
  bool precondition_met = true;  // a hypothesis antecedent may fail without an error

  nlohmann::json to_json() const;
  std::string serialize(const std::string& format) const;
  std::string to_csv() const;
};

/// Builds a prime set from a textual spec:
///   all | none | list:2,3,5 | range:lo:hi | smooth:y | power:N | power-aug:N |
///   congruence:q:a | friedlander:u:v
PrimeSet prime_set_from_spec(const std::string& spec, std::uint64_t x, const SieveConfig& cfg = {});

ExperimentReport run_counterexample_scan(const std::vector<std::uint64_t>& xs, unsigned N, bool augmented,
                                         const ExperimentConfig& cfg);
ExperimentReport run_congruence_example(std::uint64_t x, std::uint64_t q, double u, const ExperimentConfig& cfg);
ExperimentReport run_friedlander_example(std::uint64_t x, double u, double v, const ExperimentConfig& cfg);
ExperimentReport run_hypothesis_pipeline(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment:
///   psi, benchmark, counterexample, congruence, friedlander, hyp-a, hyp-p,
///   hyp-t, pipeline, dickman
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Process exit code for an error kind: 2 precondition, 3 budget or
/// inconclusive, 4 invariant.
int exit_code_for(const std::exception& e);

}  // namespace sievelab
