#include "dbbid/utility.hpp"

#include <algorithm>
#include <cmath>

#include "dbbid/error.hpp"

namespace dbbid {
namespace {

double require_cpp(const AdEconomics& ad) {
  if (!ad.cpp || !(*ad.cpp > 0.0)) {
    throw Error(Errc::kModeMismatch, "P4P encoding needs a positive cpp");
  }
  return *ad.cpp;
}

double require_cr(const AdEconomics& ad) {
  if (!ad.cr || !(*ad.cr >= 0.0)) {
    throw Error(Errc::kModeMismatch, "P4U encoding needs a commission rate cr >= 0");
  }
  return *ad.cr;
}

}  // namespace

bool ConstraintSpec::covers(AdId ad) const {
  return std::find(scope.begin(), scope.end(), ad) != scope.end();
}

void validate(const ConstraintSpec& spec) {
  if (!std::isfinite(spec.bound) || spec.bound <= 0.0) {
    throw Error(Errc::kInvalidConfig, "constraint bound must be finite and > 0");
  }
  if (spec.scope.empty()) {
    throw Error(Errc::kInvalidConfig, "constraint scope must not be empty");
  }
}

double eval(const UtilityCoeffs& c, const LandscapePrior& prior, double bp) {
  double out = 0.0;
  if (c.phi != 0.0) out += c.phi * win_prob(prior, bp);
  if (c.psi != 0.0) out += c.psi * expected_cost(prior, bp);
  return out;
}

double derivative(const UtilityCoeffs& c, const LandscapePrior& prior, double bp) {
  return (c.phi + c.psi * bp) * pdf(prior, bp);
}

BidChoice argmax_bp(const UtilityCoeffs& c, double cap) {
  const double phi = c.phi;
  const double psi = c.psi;
  if (phi == 0.0 && psi == 0.0) return {0.0, false};
  if (psi < 0.0 && phi > 0.0) return {std::min(-phi / psi, cap), false};
  if (phi <= 0.0 && psi <= 0.0) return {0.0, false};
  // Remaining patterns: both >= 0 (f nondecreasing), or psi > 0 > phi
  // (f dips then rises, so the maximum over [0, cap] is at an endpoint).
  return {cap, true};
}

UtilityCoeffs encode_objective(const ObjectiveSpec& spec, const AdEconomics& ad, double ppi) {
  switch (spec.mode) {
    case PaymentMode::kP4P:
      if (spec.kind == ObjectiveKind::kRevenue) return {require_cpp(ad) * ppi, 0.0};
      return {ppi, 0.0};
    case PaymentMode::kP4U:
      if (spec.kind == ObjectiveKind::kRevenue) return {0.0, 1.0 + require_cr(ad)};
      return {ppi, 0.0};
  }
  return {};
}

EncodedConstraint encode_constraint(const ConstraintSpec& spec, AdId ad_id,
                                    const AdEconomics& ad, double ppi) {
  const double bound = spec.kind == ConstraintKind::kBudget ? spec.bound : 0.0;
  if (!spec.covers(ad_id)) return {{0.0, 0.0}, bound};
  const double roi = spec.bound;
  if (spec.mode == PaymentMode::kP4P) {
    const double cpi = require_cpp(ad) * ppi;
    switch (spec.kind) {
      case ConstraintKind::kBudget:
        return {{cpi, 0.0}, bound};
      case ConstraintKind::kDspRoi:
        return {{-cpi, roi}, bound};
      case ConstraintKind::kAdvertiserRoi:
        return {{cpi * roi - ppi, 0.0}, bound};
    }
  } else {
    const double markup = 1.0 + require_cr(ad);
    switch (spec.kind) {
      case ConstraintKind::kBudget:
        return {{0.0, markup}, bound};
      case ConstraintKind::kDspRoi:
        return {{0.0, roi - markup}, bound};
      case ConstraintKind::kAdvertiserRoi:
        return {{-ppi, roi * markup}, bound};
    }
  }
  return {{0.0, 0.0}, bound};
}

}  // namespace dbbid
