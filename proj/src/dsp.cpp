#include "dbbid/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "dbbid/error.hpp"

namespace dbbid {

std::vector<double> DspInstance::limits() const {
  std::vector<double> out;
  out.reserve(constraints.size());
  for (const auto& c : constraints) {
    out.push_back(c.kind == ConstraintKind::kBudget ? c.bound : 0.0);
  }
  return out;
}

void validate(const DspInstance& instance) {
  auto fail = [](const std::string& what) { throw Error(Errc::kInvalidInstance, what); };
  if (!(instance.bid_cap > 0.0) || !std::isfinite(instance.bid_cap)) {
    fail("bid_cap must be finite and > 0");
  }
  if (instance.objective.mode != instance.mode) {
    fail("objective payment mode differs from the instance mode");
  }
  std::set<AdId> ids;
  for (const auto& ad : instance.ads) {
    if (!ids.insert(ad.id).second) fail("duplicate ad id " + std::to_string(ad.id));
    if (instance.mode == PaymentMode::kP4P) {
      if (!ad.economics.cpp || !(*ad.economics.cpp > 0.0)) {
        fail("ad " + std::to_string(ad.id) + " needs cpp > 0 in P4P mode");
      }
    } else if (!ad.economics.cr || !(*ad.economics.cr >= 0.0)) {
      fail("ad " + std::to_string(ad.id) + " needs cr >= 0 in P4U mode");
    }
  }
  for (std::size_t k = 0; k < instance.constraints.size(); ++k) {
    const auto& c = instance.constraints[k];
    if (c.mode != instance.mode) {
      fail("constraint " + std::to_string(k) + " payment mode differs from the instance mode");
    }
    try {
      validate(c);
    } catch (const Error& e) {
      fail("constraint " + std::to_string(k) + ": " + e.what());
    }
    for (const AdId id : c.scope) {
      if (!ids.count(id)) {
        fail("constraint " + std::to_string(k) + " scope names unknown ad " +
             std::to_string(id));
      }
    }
  }
  for (std::size_t i = 0; i < instance.impressions.size(); ++i) {
    const auto& imp = instance.impressions[i];
    try {
      validate(imp.prior);
    } catch (const Error& e) {
      fail("impression " + std::to_string(i) + ": " + e.what());
    }
    if (imp.ppi.size() != instance.ads.size()) {
      fail("impression " + std::to_string(i) + " has " + std::to_string(imp.ppi.size()) +
           " ppi entries for " + std::to_string(instance.ads.size()) + " ads");
    }
    for (const double p : imp.ppi) {
      if (!std::isfinite(p) || p < 0.0) {
        fail("impression " + std::to_string(i) + " has a negative or non-finite ppi");
      }
    }
  }
}

UtilityCoeffs objective_coeffs(const DspInstance& instance, std::size_t i, std::size_t j) {
  return encode_objective(instance.objective, instance.ads[j].economics,
                          instance.impressions[i].ppi[j]);
}

EncodedConstraint constraint_coeffs(const DspInstance& instance, std::size_t i,
                                    std::size_t j, std::size_t k) {
  const Ad& ad = instance.ads[j];
  return encode_constraint(instance.constraints[k], ad.id, ad.economics,
                           instance.impressions[i].ppi[j]);
}

UtilityCoeffs compose_coeffs(const DspInstance& instance, std::size_t i, std::size_t j,
                             std::span<const double> alpha) {
  UtilityCoeffs f = objective_coeffs(instance, i, j);
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (alpha[k] == 0.0) continue;
    f = f - alpha[k] * constraint_coeffs(instance, i, j, k).coeffs;
  }
  return f;
}

BidChoice optimal_bid(const UtilityCoeffs& coeffs, double cap) {
  return argmax_bp(coeffs, cap);
}

double best_bid(const UtilityCoeffs& coeffs, const LandscapePrior& prior, double cap) {
  const BidChoice choice = optimal_bid(coeffs, cap);
  if (choice.unbounded && coeffs.phi < 0.0) {
    return score(coeffs, prior, cap) > 0.0 ? cap : 0.0;
  }
  return choice.bid;
}

double score(const UtilityCoeffs& coeffs, const LandscapePrior& prior, double bp) {
  return eval(coeffs, prior, bp);
}

BidDecision bid_decision(const DspInstance& instance, std::size_t i,
                         std::span<const double> alpha) {
  const Impression& imp = instance.impressions[i];
  BidDecision out;
  out.impression_id = imp.id;
  std::optional<std::size_t> best;
  double best_score_value = -std::numeric_limits<double>::infinity();
  double best_price = 0.0;
  for (std::size_t j = 0; j < instance.ads.size(); ++j) {
    const UtilityCoeffs f = compose_coeffs(instance, i, j, alpha);
    const double bp = best_bid(f, imp.prior, instance.bid_cap);
    const double s = score(f, imp.prior, bp);
    if (!best || s > best_score_value) {
      best = j;
      best_score_value = s;
      best_price = bp;
    }
  }
  out.best_score = best_score_value;
  if (best && best_score_value >= 0.0 && best_price > 0.0) {
    out.ad_index = best;
    out.ad_id = instance.ads[*best].id;
    out.bid_price = best_price;
  }
  return out;
}

FeedbackResult feedback_update(double alpha, double target_roi, double actual_roi,
                               const ParamBounds& bounds) {
  if (!(actual_roi > 0.0) || !std::isfinite(actual_roi)) return {alpha, false, false};
  const double raw = target_roi / actual_roi * alpha;
  const double clamped = std::clamp(raw, bounds.min, bounds.max);
  return {clamped, true, clamped != raw};
}

DspChoiceModel::DspChoiceModel(const DspInstance& instance)
    : impressions_(instance.impressions.size()),
      ads_(instance.ads.size()),
      limits_(instance.limits()),
      bid_cap_(instance.bid_cap) {
  const std::size_t num_k = limits_.size();
  priors_.reserve(impressions_);
  objective_.reserve(impressions_ * ads_);
  constraint_.reserve(impressions_ * ads_ * num_k);
  for (std::size_t i = 0; i < impressions_; ++i) {
    priors_.push_back(instance.impressions[i].prior);
    for (std::size_t j = 0; j < ads_; ++j) {
      objective_.push_back(objective_coeffs(instance, i, j));
      for (std::size_t k = 0; k < num_k; ++k) {
        constraint_.push_back(constraint_coeffs(instance, i, j, k).coeffs);
      }
    }
  }
}

UtilityCoeffs DspChoiceModel::composite(std::size_t i, std::size_t j,
                                        std::span<const double> alpha) const {
  UtilityCoeffs f = objective_at(i, j);
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    f = f - alpha[k] * constraint_at(i, j, k);
  }
  return f;
}

double DspChoiceModel::gain(std::size_t i, std::size_t j, double bp) const {
  return eval(objective_at(i, j), priors_[i], bp);
}

double DspChoiceModel::consumption(std::size_t i, std::size_t j, std::size_t k,
                                   double bp) const {
  return eval(constraint_at(i, j, k), priors_[i], bp);
}

double DspChoiceModel::best_subchoice(std::size_t i, std::size_t j,
                                      std::span<const double> alpha) const {
  return best_bid(composite(i, j, alpha), priors_[i], bid_cap_);
}

double DspChoiceModel::best_score(std::size_t i, std::size_t j,
                                  std::span<const double> alpha) const {
  const UtilityCoeffs f = composite(i, j, alpha);
  return score(f, priors_[i], best_bid(f, priors_[i], bid_cap_));
}

}  // namespace dbbid
