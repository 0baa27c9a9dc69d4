#pragma once

// Baseline and dual-based bidding strategies for stream simulation.
//
//   lin       bp' = ActualROI / ROI * Bid, one flat bid per ad
//   ortb      bp  = sqrt(c CPI / ROI (1 + 1/lambda) + c^2) - c,
//             lambda' = ROI / ActualROI * lambda, c refitted per window
//   db_single bp  = CPI / ROI (1 + 1/alpha) on one ad,
//             alpha' = ROI / ActualROI * alpha
//   db_multi  as db_single, ad picked by the dual based rule over all ads
//   db_fixed  full dual based rule with a frozen alpha vector (no feedback)

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dbbid/dsp.hpp"
#include "dbbid/landscape.hpp"

namespace dbbid {

struct RoiUpdate {
  double value = 0.0;
  bool flagged = false;  // input ROI not positive: value left unchanged
};

struct LinState {
  double bid_base = 1.0;              // the flat Bid set by the operator
  std::vector<double> bid_per_ad;     // current flat bid for each ad
};

// (actual_roi / target_roi) * bid_base, clamped to (0, bid_cap].
RoiUpdate lin_bid(const LinState& state, double actual_roi, double target_roi,
                  double bid_cap = kDefaultBidCap);

struct OrtbState {
  double c = 1.0;       // win curve w(bp) = bp / (c + bp)
  double lambda = 1.0;
};

double ortb_bid(const OrtbState& state, double cpi, double target_roi);

struct OrtbFitResult {
  double c = 0.0;
  bool converged = false;
  double log_likelihood = 0.0;
  int iterations = 0;
};

// Censored maximum likelihood of c under the competing-bid density
// c / (c + x)^2 implied by the win curve. Same error contract as
// fit_censored, except won auctions may have paid_cost == 0.
OrtbFitResult ortb_fit_c(std::span<const BidObservation> observations);

double ortb_log_likelihood(std::span<const BidObservation> observations, double c);

// (target / actual) * param clamped to bounds.
FeedbackResult multiplicative_update(double param, double target_roi, double actual_roi,
                                     const ParamBounds& bounds = {});

// ---------------------------------------------------------------------------
// Stream strategies

struct Bid {
  std::optional<std::size_t> ad_index;
  double price = 0.0;
};

// One auction as seen by the strategy after the epoch.
struct AuctionRecord {
  std::size_t impression = 0;
  std::size_t ad_index = 0;
  double bid = 0.0;
  bool won = false;
  double cost = 0.0;     // paid second price, 0 when lost
  double revenue = 0.0;  // DSP revenue credited for the win
};

struct EpochFeedback {
  std::vector<AuctionRecord> auctions;  // only impressions that received a bid
};

class BiddingStrategy {
 public:
  virtual ~BiddingStrategy() = default;
  virtual std::string name() const = 0;
  virtual Bid bid(const DspInstance& instance, std::size_t impression) const = 0;
  virtual void end_epoch(const DspInstance& instance, const EpochFeedback& feedback) = 0;
  // The tuned scalar (alpha, lambda or LIN bid) for reporting.
  virtual double parameter() const = 0;
  virtual std::size_t flagged_updates() const { return 0; }
};

enum class StrategyKind { kLin, kOrtb, kDbSingle, kDbMulti, kDbFixed };

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(std::string_view name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kDbSingle;
  std::optional<std::string> label;      // report name, defaults to the kind
  std::optional<double> target_roi;      // defaults to the instance DSP-ROI bound
  std::size_t ad_index = 0;              // inventory for lin / ortb / db_single
  double alpha0 = 1.0;                   // db_single, db_multi
  double lambda0 = 1.0;                  // ortb
  double c0 = 1.0;                       // ortb, before the first fit
  std::optional<double> bid_base;        // lin; defaults to mean CPI / ROI
  std::optional<int> update_every;       // epochs per feedback window (lin 10, else 1)
  std::vector<double> alpha;             // db_fixed
  ParamBounds bounds;
};

// Defaults come from the instance (target ROI, LIN base bid). Throws
// Error(kInvalidConfig) when a feedback strategy has no target ROI or the
// configured ad does not exist.
std::unique_ptr<BiddingStrategy> make_strategy(const StrategyConfig& config,
                                               const DspInstance& instance);

// Target ROI of the first DSP-ROI constraint, if any.
std::optional<double> instance_target_roi(const DspInstance& instance);

}  // namespace dbbid
