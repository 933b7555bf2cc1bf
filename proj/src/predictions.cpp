#include "sievelab/predictions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sievelab/errors.hpp"
#include "sievelab/numeric.hpp"

namespace sievelab {

nlohmann::json SlackConfig::to_json() const {
  return {{"log_weight", log_weight},
          {"hall", hall},
          {"hildebrand_band", hildebrand_band},
          {"friedlander_band", friedlander_band},
          {"psi_k_upper", psi_k_upper}};
}

DickmanTable::DickmanTable(int steps_per_unit, double u_max) : steps_(steps_per_unit), u_max_(u_max) {
  if (steps_ < 8) throw PreconditionFail("DickmanTable needs at least 8 steps per unit");
  const auto S = static_cast<std::size_t>(steps_);
  const auto units = static_cast<std::size_t>(std::ceil(u_max_));
  values_.assign(units * S + 1, 1.0);
  const double h = 1.0 / steps_;

  // f(t) = rho(t-1)/t at grid index i (t = i*h); rho(t-1) is already known.
  auto f = [&](std::size_t i) { return values_[i - S] / (static_cast<double>(i) * h); };

  for (std::size_t n = 1; n < units; ++n) {
    const std::size_t base = n * S;  // index of u = n
    double acc = 0.0, comp = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
      const std::size_t i = base + k;
      // cubic through four nodes kept inside [n, n+1]
      double piece;
      if (k == 0)
        piece = (9 * f(i) + 19 * f(i + 1) - 5 * f(i + 2) + f(i + 3)) / 24.0;
      else if (k == S - 1)
        piece = (f(i - 2) - 5 * f(i - 1) + 19 * f(i) + 9 * f(i + 1)) / 24.0;
      else
        piece = (-f(i - 1) + 13 * f(i) + 13 * f(i + 1) - f(i + 2)) / 24.0;
      piece *= h;
      double y = piece - comp;  // Kahan
      double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
      values_[i + 1] = values_[base] - acc;
    }
  }
}

const DickmanTable& DickmanTable::instance() {
  static const DickmanTable table;
  return table;
}

double DickmanTable::operator()(double u) const {
  if (u < 0) throw PreconditionFail("rho(u) needs u >= 0");
  if (u <= 1.0) return 1.0;
  if (u > u_max_) throw PreconditionFail("rho(u) tabulated only up to u_max");
  const double pos = u * steps_;
  const auto nearest = static_cast<std::size_t>(std::llround(pos));
  if (std::fabs(pos - static_cast<double>(nearest)) < 1e-9) return values_[nearest];
  // unit interval [n, n+1] that contains u in its interior
  const auto n = static_cast<std::size_t>(std::floor(u));
  const std::size_t lo = n * steps_, hi = (n + 1) * steps_;
  auto i0 = static_cast<std::size_t>(std::floor(pos));
  std::size_t start = i0 >= lo + 1 ? i0 - 1 : lo;
  if (start + 3 > hi) start = hi - 3;
  double result = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    double w = 1.0;
    for (std::size_t b = 0; b < 4; ++b)
      if (a != b)
        w *= (pos - static_cast<double>(start + b)) / (static_cast<double>(start + a) - static_cast<double>(start + b));
    result += w * values_[start + a];
  }
  return result;
}

namespace {

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6 * (fa + 4 * flm + fm);
  double right = (b - m) / 6 * (fm + 4 * frm + fb);
  double diff = left + right - whole;
  if (std::fabs(diff) <= 15 * tol) return left + right + diff / 15;
  if (depth <= 0) throw ToleranceUnreachable("adaptive Simpson refinement budget exhausted");
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double dickman_rho(double u, double tol) {
  if (!(u >= 0 && u <= DickmanTable::kUMax)) throw PreconditionFail("dickman_rho needs 0 <= u <= 50");
  if (!(tol >= 1e-12)) throw PreconditionFail("dickman_rho needs tol >= 1e-12");
  if (u <= 1.0) return 1.0;
  const auto& table = DickmanTable::instance();
  const double n = std::floor(u);
  if (u == n) return table(u);
  auto f = [&](double t) { return table(t - 1.0) / t; };
  double fa = f(n), fb = f(u), fm = f(0.5 * (n + u));
  double whole = (u - n) / 6 * (fa + 4 * fm + fb);
  // tol is relative to rho(u); the table value sets the absolute scale
  const double scale = std::max(table(u), std::numeric_limits<double>::min());
  double integral = adaptive_simpson(f, n, u, fa, fm, fb, whole, tol * scale / 4, 40);
  return table(n) - integral;
}

double u_of(const PrimeSet& P, std::uint64_t x, const SieveConfig& cfg) {
  return 1.0 / euler_product(complement_within(P, x, cfg));
}

nlohmann::json PredictionReport::to_json() const {
  return {{"x", x},
          {"set_checksum", set_checksum},
          {"u_P", u_P},
          {"expected", expected},
          {"hall_upper", hall_upper},
          {"hildebrand_lower", hildebrand_lower},
          {"rho_out_of_range", rho_out_of_range},
          {"observed", observed},
          {"ratio", ratio},
          {"slack", slack.to_json()}};
}

PredictionReport benchmark(std::uint64_t x, const PrimeSet& P, const CountConfig& cfg, const SlackConfig& slack) {
  PredictionReport r;
  r.x = x;
  r.slack = slack;
  r.set_checksum = P.checksum();
  r.u_P = u_of(P, x, cfg.primes);
  const double xd = static_cast<double>(x);
  r.expected = xd / r.u_P;
  r.hall_upper = kExpGamma * xd / r.u_P;
  if (r.u_P <= DickmanTable::kUMax) {
    r.hildebrand_lower = xd * DickmanTable::instance()(r.u_P);
  } else {
    r.rho_out_of_range = true;
    r.hildebrand_lower = 0.0;
  }
  r.observed = psi_sieve(x, P, cfg).value;
  r.ratio = r.expected > 0 ? static_cast<double>(r.observed) / r.expected : 0.0;
  if (r.hall_upper < r.expected) throw InvariantViolation("Hall benchmark below expectation");
  return r;
}

}  // namespace sievelab
