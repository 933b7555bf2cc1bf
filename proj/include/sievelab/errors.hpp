#pragma once

#include <stdexcept>
#include <string>

namespace sievelab {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Precondition,  // an input or hypothesis antecedent is not met
  Budget,        // a configured memory / node / size ceiling was hit
  Inconclusive,  // a numeric procedure could not certify its answer
  Invariant,     // an internal guarantee failed: always a bug
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct BudgetExceeded : Error {
  explicit BudgetExceeded(const std::string& w) : Error(ErrorKind::Budget, "BudgetExceeded: " + w) {}
};
struct ExplosionGuard : Error {
  explicit ExplosionGuard(const std::string& w) : Error(ErrorKind::Budget, "ExplosionGuard: " + w) {}
};
struct IntervalBlowup : Error {
  explicit IntervalBlowup(const std::string& w) : Error(ErrorKind::Budget, "IntervalBlowup: " + w) {}
};
struct InvalidResidue : Error {
  explicit InvalidResidue(const std::string& w) : Error(ErrorKind::Precondition, "InvalidResidue: " + w) {}
};
struct PreconditionFail : Error {
  explicit PreconditionFail(const std::string& w) : Error(ErrorKind::Precondition, "PreconditionFail: " + w) {}
};
struct ToleranceUnreachable : Error {
  explicit ToleranceUnreachable(const std::string& w)
      : Error(ErrorKind::Inconclusive, "ToleranceUnreachable: " + w) {}
};
struct ResolutionTooCoarse : Error {
  explicit ResolutionTooCoarse(const std::string& w)
      : Error(ErrorKind::Inconclusive, "ResolutionTooCoarse: " + w) {}
};
struct DiscretizationInconclusive : Error {
  explicit DiscretizationInconclusive(const std::string& w)
      : Error(ErrorKind::Inconclusive, "DiscretizationInconclusive: " + w) {}
};
struct InvariantViolation : Error {
  explicit InvariantViolation(const std::string& w) : Error(ErrorKind::Invariant, "InvariantViolation: " + w) {}
};

}  // namespace sievelab
