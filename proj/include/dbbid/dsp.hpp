#pragma once

// The bidding problem as an augmented MMKP: impressions are items, ads are
// users and the bid price is the sub-choice. All gains and consumptions are
// members of the utility family over the impression's landscape, so the
// composite score is one too and its optimum has a closed form.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dbbid/landscape.hpp"
#include "dbbid/mmkp.hpp"
#include "dbbid/utility.hpp"

namespace dbbid {

struct Impression {
  std::int64_t id = 0;
  LandscapePrior prior;
  std::vector<double> ppi;  // expected performance, one entry per ad
};

struct Ad {
  AdId id = 0;
  AdEconomics economics;
};

inline constexpr double kDefaultBidCap = 1e4;

struct DspInstance {
  PaymentMode mode = PaymentMode::kP4P;
  ObjectiveSpec objective;
  std::vector<Ad> ads;
  std::vector<ConstraintSpec> constraints;
  std::vector<Impression> impressions;
  double bid_cap = kDefaultBidCap;

  std::size_t num_constraints() const { return constraints.size(); }
  std::vector<double> limits() const;
};

// Throws Error(kInvalidInstance) on mode disagreement, unknown scope ids,
// ppi length mismatch, negative ppi, bad priors or missing economics.
void validate(const DspInstance& instance);

UtilityCoeffs objective_coeffs(const DspInstance& instance, std::size_t i, std::size_t j);
EncodedConstraint constraint_coeffs(const DspInstance& instance, std::size_t i,
                                    std::size_t j, std::size_t k);

// phi_F = phi_V - sum_k alpha[k] phi_W(k), same for psi.
UtilityCoeffs compose_coeffs(const DspInstance& instance, std::size_t i, std::size_t j,
                             std::span<const double> alpha);

BidChoice optimal_bid(const UtilityCoeffs& coeffs, double cap);

// Bid that maximises the composite score over [0, cap], resolving the
// endpoint comparison left open by argmax_bp.
double best_bid(const UtilityCoeffs& coeffs, const LandscapePrior& prior, double cap);

// phi * win_prob(bp) + psi * expected_cost(bp).
double score(const UtilityCoeffs& coeffs, const LandscapePrior& prior, double bp);

struct BidDecision {
  std::int64_t impression_id = 0;
  std::optional<std::size_t> ad_index;
  std::optional<AdId> ad_id;
  std::optional<double> bid_price;
  double best_score = 0.0;
};

// Dual based decision for one impression: each ad proposes its best bid,
// the highest score wins (lowest index on ties), and a bid is placed when
// that score is >= 0 and the bid is positive.
BidDecision bid_decision(const DspInstance& instance, std::size_t i,
                         std::span<const double> alpha);

struct ParamBounds {
  double min = 1e-6;
  double max = 1e6;
};

struct FeedbackResult {
  double value = 0.0;
  bool updated = false;  // false: actual ROI was not positive, value unchanged
  bool clamped = false;
};

// alpha' = target / actual * alpha, clamped to bounds.
FeedbackResult feedback_update(double alpha, double target_roi, double actual_roi,
                               const ParamBounds& bounds = {});

// Adapter exposing an instance to the generic solver; coefficient tables
// are precomputed once.
class DspChoiceModel final : public ChoiceModel {
 public:
  explicit DspChoiceModel(const DspInstance& instance);

  std::size_t num_items() const override { return impressions_; }
  std::size_t num_users() const override { return ads_; }
  std::size_t num_constraints() const override { return limits_.size(); }
  std::span<const double> limits() const override { return limits_; }

  double gain(std::size_t i, std::size_t j, double bp) const override;
  double consumption(std::size_t i, std::size_t j, std::size_t k, double bp) const override;
  double best_subchoice(std::size_t i, std::size_t j,
                        std::span<const double> alpha) const override;
  double best_score(std::size_t i, std::size_t j,
                    std::span<const double> alpha) const override;

  UtilityCoeffs composite(std::size_t i, std::size_t j, std::span<const double> alpha) const;

 private:
  const UtilityCoeffs& objective_at(std::size_t i, std::size_t j) const {
    return objective_[i * ads_ + j];
  }
  const UtilityCoeffs& constraint_at(std::size_t i, std::size_t j, std::size_t k) const {
    return constraint_[(i * ads_ + j) * limits_.size() + k];
  }

  std::size_t impressions_ = 0;
  std::size_t ads_ = 0;
  std::vector<double> limits_;
  std::vector<LandscapePrior> priors_;
  std::vector<UtilityCoeffs> objective_;
  std::vector<UtilityCoeffs> constraint_;
  double bid_cap_ = kDefaultBidCap;
};

}  // namespace dbbid
