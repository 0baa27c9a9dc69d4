#pragma once

// Utility family: f(bp) = phi * Prob(bp) + psi * Cost(bp)
//                       = integral_0^bp (phi + psi x) p(x) dx.
// Every objective and constraint of the bidding problem is a member, so
// are their linear combinations.

#include <cstdint>
#include <optional>
#include <vector>

#include "dbbid/landscape.hpp"

namespace dbbid {

struct UtilityCoeffs {
  double phi = 0.0;  // weight on win probability
  double psi = 0.0;  // weight on expected cost

  friend bool operator==(const UtilityCoeffs&, const UtilityCoeffs&) = default;
};

inline UtilityCoeffs operator+(UtilityCoeffs a, UtilityCoeffs b) {
  return {a.phi + b.phi, a.psi + b.psi};
}
inline UtilityCoeffs operator-(UtilityCoeffs a, UtilityCoeffs b) {
  return {a.phi - b.phi, a.psi - b.psi};
}
inline UtilityCoeffs operator*(double s, UtilityCoeffs c) { return {s * c.phi, s * c.psi}; }

enum class PaymentMode { kP4P, kP4U };

enum class ObjectiveKind { kRevenue, kPerformance };

struct ObjectiveSpec {
  PaymentMode mode = PaymentMode::kP4P;
  ObjectiveKind kind = ObjectiveKind::kRevenue;
};

enum class ConstraintKind { kBudget, kDspRoi, kAdvertiserRoi };

using AdId = std::int64_t;

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::kBudget;
  PaymentMode mode = PaymentMode::kP4P;
  double bound = 0.0;        // Budget for kBudget, ROI lower bound otherwise
  std::vector<AdId> scope;   // ads sharing this constraint

  bool covers(AdId ad) const;
};

// Throws Error(kInvalidConfig) for bound <= 0 or an empty scope.
void validate(const ConstraintSpec& spec);

// Advertiser-side economics. cpp is used in P4P, cr in P4U.
struct AdEconomics {
  std::optional<double> cpp;
  std::optional<double> cr;
};

double eval(const UtilityCoeffs& c, const LandscapePrior& prior, double bp);

// f'(bp) = (phi + psi bp) p(bp).
double derivative(const UtilityCoeffs& c, const LandscapePrior& prior, double bp);

struct BidChoice {
  double bid = 0.0;
  // f does not peak inside (0, cap): the cap was returned because f is
  // nondecreasing, or eventually increasing, on [0, inf).
  bool unbounded = false;
};

// Maximiser of f over [0, cap] that does not depend on the prior, following
// the sign pattern of (phi, psi). For psi > 0 > phi the true maximum is at 0
// or at the cap; the cap is returned flagged and the caller compares
// eval(cap) against 0.
BidChoice argmax_bp(const UtilityCoeffs& c, double cap);

// Throws Error(kModeMismatch) when the economics lack the field for the mode.
UtilityCoeffs encode_objective(const ObjectiveSpec& spec, const AdEconomics& ad, double ppi);

struct EncodedConstraint {
  UtilityCoeffs coeffs;
  double bound = 0.0;  // B in sum W <= B
};

// Standard-form (phi, psi, B) of a constraint for one (impression, ad) pair.
// Ads outside the scope get zero coefficients.
EncodedConstraint encode_constraint(const ConstraintSpec& spec, AdId ad_id,
                                    const AdEconomics& ad, double ppi);

}  // namespace dbbid
