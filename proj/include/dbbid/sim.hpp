#pragma once

// Synthetic instances and the two execution modes: expectation mode
// (analytic win probability and cost) and Monte-Carlo mode (sampled
// competing bids, second-price settlement, strategy feedback per epoch).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbbid/dsp.hpp"
#include "dbbid/strategies.hpp"

namespace dbbid {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct MockConfig {
  std::size_t n_impressions = 200;
  PaymentMode mode = PaymentMode::kP4P;
  ObjectiveKind objective = ObjectiveKind::kRevenue;
  std::vector<AdEconomics> ads;            // ad ids are 1..M in order
  std::vector<ConstraintSpec> constraints;
  Range mu{-2.8, -2.0};
  Range sigma{0.3, 0.8};
  Range ppi{0.02, 0.07};
  std::uint64_t seed = 1;
  double bid_cap = kDefaultBidCap;
};

// Two P4P ads (CPP 1 and 2), per-ad budgets 20 and 10, global DSP ROI >= 2
// and global advertiser ROI >= 0.5.
MockConfig default_mock_config(ObjectiveKind objective = ObjectiveKind::kRevenue);

// Deterministic in the seed. Throws Error(kInvalidRange) on empty or
// inverted ranges and sigma ranges that reach 0.
DspInstance gen_mock_instance(const MockConfig& config);

struct ConstraintRow {
  std::size_t k = 0;
  double limit = 0.0;
  double consumption = 0.0;
  double surplus = 0.0;  // limit - consumption
  double alpha = 0.0;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double revenue = 0.0;
  double cost = 0.0;
  double performance = 0.0;
  double actual_roi = 0.0;  // revenue / cost, 0 without wins
  std::size_t bids = 0;
  std::size_t wins = 0;
  double revenue_per_win = 0.0;
  double parameter = 0.0;   // strategy parameter used during the epoch
  std::vector<double> consumption;  // realised W per constraint
};

struct StrategyRun {
  std::string name;
  std::vector<EpochMetrics> epochs;
  std::size_t flagged_updates = 0;
};

struct SimReport {
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::vector<ConstraintRow> per_constraint;
  std::vector<StrategyRun> per_strategy;
  std::vector<BidDecision> decisions;  // expectation mode only
  std::uint64_t seed = 0;
};

// Standard-normal draws behind every competing bid of one epoch; element i
// belongs to impression i. Identical for every strategy given the seed.
std::vector<double> competing_bid_normals(std::uint64_t seed, std::size_t epoch,
                                          std::size_t n_impressions);

SimReport run_expectation(const DspInstance& instance, std::span<const double> alpha);

SimReport run_monte_carlo(const DspInstance& instance, BiddingStrategy& strategy,
                          std::size_t epochs, std::uint64_t seed);

// One Monte-Carlo run per strategy on the same competing-bid stream.
// Throws Error(kInvalidConfig) for fewer than two strategies.
SimReport compare_strategies(const DspInstance& instance,
                             std::span<const StrategyConfig> strategies, std::size_t epochs,
                             std::uint64_t seed);

// Aggregate revenue / cost over epochs [from, end).
double aggregate_roi(const StrategyRun& run, std::size_t from = 0);
double total_revenue(const StrategyRun& run, std::size_t from = 0);

}  // namespace dbbid
