#pragma once

// Comparison targets for Psi(x;P): u_P, the inclusion-exclusion expectation,
// Hall's upper benchmark and Hildebrand's Dickman-rho lower benchmark.

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "sievelab/prime_sets.hpp"
#include "sievelab/sieve_counts.hpp"

namespace sievelab {

/// Slack constants applied to asymptotic statements at finite x. They are
/// configuration and every report echoes them.
struct SlackConfig {
  double log_weight = 1.1;       // log-weight sandwich upper side
  double hall = 1.1;             // observed/expected <= hall * e^gamma
  double hildebrand_band = 0.15; // |Psi/x - rho(u)| / rho(u)
  double friedlander_band = 0.25;
  double psi_k_upper = 1.2;

  nlohmann::json to_json() const;
};

/// rho on a uniform grid over [0, u_max], built once by per-unit-interval
/// integration of rho(u) = rho(n) - int_n^u rho(t-1)/t dt.
class DickmanTable {
 public:
  static constexpr double kUMax = 50.0;
  static constexpr int kStepsPerUnit = 10'000;  // grid step 1e-4

  explicit DickmanTable(int steps_per_unit = kStepsPerUnit, double u_max = kUMax);

  /// Shared default table.
  static const DickmanTable& instance();

  double step() const noexcept { return 1.0 / steps_; }
  double u_max() const noexcept { return u_max_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Cubic interpolation that never straddles an integer (rho' jumps there).
  double operator()(double u) const;

 private:
  int steps_;
  double u_max_;
  std::vector<double> values_;
};

/// rho(u) within relative `tol`: adaptive Simpson on [n, u] against the
/// tabulated delay term. Throws ToleranceUnreachable past the refinement depth.
double dickman_rho(double u, double tol = 1e-12);

/// u_P = 1 / prod_{p in E} (1 - 1/p), E = {p <= x} \ P.
double u_of(const PrimeSet& P, std::uint64_t x, const SieveConfig& cfg = {});

struct PredictionReport {
  std::uint64_t x = 0;
  double u_P = 1.0;
  double expected = 0.0;
  double hall_upper = 0.0;
  double hildebrand_lower = 0.0;
  bool rho_out_of_range = false;  // u_P > 50: lower benchmark reported as 0
  std::uint64_t observed = 0;
  double ratio = 0.0;
  std::uint64_t set_checksum = 0;
  SlackConfig slack{};

  nlohmann::json to_json() const;
};

PredictionReport benchmark(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg = {},
                           const SlackConfig& slack = {});

}  // namespace sievelab
