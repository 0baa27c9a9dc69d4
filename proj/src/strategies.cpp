#include "dbbid/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dbbid/error.hpp"

namespace dbbid {

RoiUpdate lin_bid(const LinState& state, double actual_roi, double target_roi,
                  double bid_cap) {
  if (!(target_roi > 0.0)) {
    throw Error(Errc::kInvalidConfig, "target ROI must be positive");
  }
  if (!(actual_roi > 0.0) || !std::isfinite(actual_roi)) return {state.bid_base, true};
  const double bid = actual_roi / target_roi * state.bid_base;
  return {std::min(bid, bid_cap), false};
}

double ortb_bid(const OrtbState& state, double cpi, double target_roi) {
  const double c = state.c;
  const double inner = c * cpi / target_roi * (1.0 + 1.0 / state.lambda) + c * c;
  return std::max(0.0, std::sqrt(inner) - c);
}

double ortb_log_likelihood(std::span<const BidObservation> observations, double c) {
  double total = 0.0;
  for (const auto& obs : observations) {
    if (obs.outcome == Outcome::kWon) {
      total += std::log(c) - 2.0 * std::log(c + *obs.paid_cost);
    } else {
      total += std::log(c) - std::log(c + obs.bid_price);
    }
  }
  return total;
}

OrtbFitResult ortb_fit_c(std::span<const BidObservation> observations) {
  if (observations.empty()) {
    throw Error(Errc::kEmptyObservations, "no observations to fit");
  }
  std::size_t wins = 0;
  double scale = 0.0;
  for (const auto& obs : observations) {
    validate(obs);
    if (obs.outcome == Outcome::kWon) {
      ++wins;
      scale = std::max(scale, *obs.paid_cost);
    }
    scale = std::max(scale, obs.bid_price);
  }
  if (wins == 0) {
    throw Error(Errc::kNoWinObservations, "c is unidentifiable from lost auctions alone");
  }
  if (!(scale > 0.0)) scale = 1.0;

  // c * dL/dc = n - sum_won 2c/(c+x) - sum_lost c/(c+bp) is strictly
  // decreasing in c, so the stationary point is bracketed and bisected in
  // log c.
  auto stationarity = [&](double c) {
    double v = 0.0;
    for (const auto& obs : observations) {
      if (obs.outcome == Outcome::kWon) {
        v += 1.0 - 2.0 * c / (c + *obs.paid_cost);
      } else {
        v += 1.0 - c / (c + obs.bid_price);
      }
    }
    return v;
  };

  double lo = std::log(scale * 1e-12);
  double hi = std::log(scale * 1e6);
  OrtbFitResult result;
  if (stationarity(std::exp(lo)) <= 0.0) {
    result.c = std::exp(lo);  // mass piles up at zero, optimum at the boundary
  } else if (stationarity(std::exp(hi)) >= 0.0) {
    result.c = std::exp(hi);
  } else {
    int iter = 0;
    for (; iter < 200 && hi - lo > 1e-13; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (stationarity(std::exp(mid)) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    result.c = std::exp(0.5 * (lo + hi));
    result.iterations = iter;
    result.converged = true;
  }
  result.log_likelihood = ortb_log_likelihood(observations, result.c);
  return result;
}

FeedbackResult multiplicative_update(double param, double target_roi, double actual_roi,
                                     const ParamBounds& bounds) {
  return feedback_update(param, target_roi, actual_roi, bounds);
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kLin:
      return "lin";
    case StrategyKind::kOrtb:
      return "ortb";
    case StrategyKind::kDbSingle:
      return "db_single";
    case StrategyKind::kDbMulti:
      return "db_multi";
    case StrategyKind::kDbFixed:
      return "db_fixed";
  }
  return "unknown";
}

StrategyKind strategy_kind_from_string(std::string_view name) {
  for (auto kind : {StrategyKind::kLin, StrategyKind::kOrtb, StrategyKind::kDbSingle,
                    StrategyKind::kDbMulti, StrategyKind::kDbFixed}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(Errc::kInvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

std::optional<double> instance_target_roi(const DspInstance& instance) {
  for (const auto& c : instance.constraints) {
    if (c.kind == ConstraintKind::kDspRoi) return c.bound;
  }
  return std::nullopt;
}

namespace {

double cpi(const DspInstance& instance, std::size_t i, std::size_t j) {
  return *instance.ads[j].economics.cpp * instance.impressions[i].ppi[j];
}

struct Window {
  double revenue = 0.0;
  double cost = 0.0;
  int epochs = 0;

  void add(const EpochFeedback& feedback) {
    for (const auto& a : feedback.auctions) {
      if (!a.won) continue;
      revenue += a.revenue;
      cost += a.cost;
    }
    ++epochs;
  }
  double roi() const { return cost > 0.0 ? revenue / cost : 0.0; }
};

class LinStrategy final : public BiddingStrategy {
 public:
  LinStrategy(std::string name, std::size_t ad, double target, double base, int every,
              double cap)
      : name_(std::move(name)), ad_(ad), target_(target), every_(every), cap_(cap) {
    state_.bid_base = base;
    state_.bid_per_ad.assign(ad + 1, base);
  }

  std::string name() const override { return name_; }

  Bid bid(const DspInstance&, std::size_t) const override {
    return {ad_, state_.bid_per_ad[ad_]};
  }

  void end_epoch(const DspInstance&, const EpochFeedback& feedback) override {
    window_.add(feedback);
    if (window_.epochs < every_) return;
    const RoiUpdate u = lin_bid(state_, window_.roi(), target_, cap_);
    if (u.flagged) {
      ++flagged_;
    } else {
      state_.bid_per_ad[ad_] = u.value;
    }
    window_ = {};
  }

  double parameter() const override { return state_.bid_per_ad[ad_]; }
  std::size_t flagged_updates() const override { return flagged_; }

 private:
  std::string name_;
  std::size_t ad_;
  double target_;
  int every_;
  double cap_;
  LinState state_;
  Window window_;
  std::size_t flagged_ = 0;
};

class OrtbStrategy final : public BiddingStrategy {
 public:
  OrtbStrategy(std::string name, std::size_t ad, double target, OrtbState init, int every,
               ParamBounds bounds, double cap)
      : name_(std::move(name)),
        ad_(ad),
        target_(target),
        state_(init),
        every_(every),
        bounds_(bounds),
        cap_(cap) {}

  std::string name() const override { return name_; }

  Bid bid(const DspInstance& instance, std::size_t i) const override {
    return {ad_, std::min(ortb_bid(state_, cpi(instance, i, ad_), target_), cap_)};
  }

  void end_epoch(const DspInstance&, const EpochFeedback& feedback) override {
    window_.add(feedback);
    for (const auto& a : feedback.auctions) {
      observations_.push_back(a.won ? BidObservation::won(a.bid, a.cost)
                                    : BidObservation::lost(a.bid));
    }
    if (window_.epochs < every_) return;
    const FeedbackResult u =
        multiplicative_update(state_.lambda, target_, window_.roi(), bounds_);
    if (u.updated) {
      state_.lambda = u.value;
    } else {
      ++flagged_;
    }
    const bool any_win = std::any_of(observations_.begin(), observations_.end(),
                                     [](const auto& o) { return o.outcome == Outcome::kWon; });
    if (any_win) {
      state_.c = std::clamp(ortb_fit_c(observations_).c, bounds_.min, bounds_.max);
    }
    observations_.clear();
    window_ = {};
  }

  double parameter() const override { return state_.lambda; }
  std::size_t flagged_updates() const override { return flagged_; }

 private:
  std::string name_;
  std::size_t ad_;
  double target_;
  OrtbState state_;
  int every_;
  ParamBounds bounds_;
  double cap_;
  Window window_;
  std::vector<BidObservation> observations_;
  std::size_t flagged_ = 0;
};

// Dual based bidding against a single DSP-ROI constraint whose price alpha
// is driven by ROI feedback. Runs the general decision rule on a reduced
// instance so the bid is the closed-form optimum of the composite score.
class DbFeedbackStrategy final : public BiddingStrategy {
 public:
  DbFeedbackStrategy(std::string name, const DspInstance& instance,
                     std::optional<std::size_t> single_ad, double target, double alpha0,
                     int every, ParamBounds bounds)
      : name_(std::move(name)), target_(target), alpha_(alpha0), every_(every), bounds_(bounds) {
    reduced_.mode = instance.mode;
    reduced_.objective = instance.objective;
    reduced_.bid_cap = instance.bid_cap;
    if (single_ad) {
      ad_map_.push_back(*single_ad);
    } else {
      for (std::size_t j = 0; j < instance.ads.size(); ++j) ad_map_.push_back(j);
    }
    ConstraintSpec roi{ConstraintKind::kDspRoi, instance.mode, target, {}};
    for (const std::size_t j : ad_map_) {
      reduced_.ads.push_back(instance.ads[j]);
      roi.scope.push_back(instance.ads[j].id);
    }
    reduced_.constraints.push_back(roi);
    reduced_.impressions.reserve(instance.impressions.size());
    for (const auto& imp : instance.impressions) {
      Impression r{imp.id, imp.prior, {}};
      for (const std::size_t j : ad_map_) r.ppi.push_back(imp.ppi[j]);
      reduced_.impressions.push_back(std::move(r));
    }
  }

  std::string name() const override { return name_; }

  Bid bid(const DspInstance&, std::size_t i) const override {
    const double alpha[1] = {alpha_};
    const BidDecision d = bid_decision(reduced_, i, alpha);
    if (!d.ad_index) return {};
    return {ad_map_[*d.ad_index], *d.bid_price};
  }

  void end_epoch(const DspInstance&, const EpochFeedback& feedback) override {
    window_.add(feedback);
    if (window_.epochs < every_) return;
    const FeedbackResult u = feedback_update(alpha_, target_, window_.roi(), bounds_);
    if (u.updated) {
      alpha_ = u.value;
    } else {
      ++flagged_;
    }
    window_ = {};
  }

  double parameter() const override { return alpha_; }
  std::size_t flagged_updates() const override { return flagged_; }

 private:
  std::string name_;
  DspInstance reduced_;
  std::vector<std::size_t> ad_map_;
  double target_;
  double alpha_;
  int every_;
  ParamBounds bounds_;
  Window window_;
  std::size_t flagged_ = 0;
};

class DbFixedStrategy final : public BiddingStrategy {
 public:
  DbFixedStrategy(std::string name, std::vector<double> alpha)
      : name_(std::move(name)), alpha_(std::move(alpha)) {}

  std::string name() const override { return name_; }

  Bid bid(const DspInstance& instance, std::size_t i) const override {
    const BidDecision d = bid_decision(instance, i, alpha_);
    if (!d.ad_index) return {};
    return {d.ad_index, *d.bid_price};
  }

  void end_epoch(const DspInstance&, const EpochFeedback&) override {}
  double parameter() const override { return alpha_.empty() ? 0.0 : alpha_.front(); }

 private:
  std::string name_;
  std::vector<double> alpha_;
};

}  // namespace

std::unique_ptr<BiddingStrategy> make_strategy(const StrategyConfig& config,
                                               const DspInstance& instance) {
  const std::string name = config.label.value_or(std::string(to_string(config.kind)));
  auto fail = [&](const std::string& what) {
    throw Error(Errc::kInvalidConfig, name + ": " + what);
  };

  if (config.kind == StrategyKind::kDbFixed) {
    if (config.alpha.size() != instance.num_constraints()) {
      fail("db_fixed needs one alpha per constraint (" +
           std::to_string(instance.num_constraints()) + ")");
    }
    for (const double a : config.alpha) {
      if (!(a >= 0.0)) fail("alpha entries must be >= 0");
    }
    return std::make_unique<DbFixedStrategy>(name, config.alpha);
  }

  if (instance.mode != PaymentMode::kP4P) fail("feedback strategies bid on CPI and need P4P");
  const std::optional<double> target =
      config.target_roi ? config.target_roi : instance_target_roi(instance);
  if (!target || !(*target > 0.0)) fail("no positive target ROI configured or in the instance");
  if (config.ad_index >= instance.ads.size()) fail("ad_index out of range");
  if (!(config.bounds.min > 0.0) || !(config.bounds.max >= config.bounds.min)) {
    fail("parameter bounds must satisfy 0 < min <= max");
  }
  const int every = config.update_every.value_or(config.kind == StrategyKind::kLin ? 10 : 1);
  if (every < 1) fail("update_every must be >= 1");

  switch (config.kind) {
    case StrategyKind::kLin: {
      double base = 0.0;
      if (config.bid_base) {
        base = *config.bid_base;
      } else if (!instance.impressions.empty()) {
        for (std::size_t i = 0; i < instance.impressions.size(); ++i) {
          base += cpi(instance, i, config.ad_index);
        }
        base /= static_cast<double>(instance.impressions.size()) * *target;
      } else {
        base = 1.0;
      }
      if (!(base > 0.0)) fail("bid_base must be positive");
      return std::make_unique<LinStrategy>(name, config.ad_index, *target, base, every,
                                           instance.bid_cap);
    }
    case StrategyKind::kOrtb:
      if (!(config.c0 > 0.0) || !(config.lambda0 > 0.0)) fail("c0 and lambda0 must be > 0");
      return std::make_unique<OrtbStrategy>(name, config.ad_index, *target,
                                            OrtbState{config.c0, config.lambda0}, every,
                                            config.bounds, instance.bid_cap);
    case StrategyKind::kDbSingle:
    case StrategyKind::kDbMulti: {
      if (!(config.alpha0 > 0.0)) fail("alpha0 must be > 0");
      std::optional<std::size_t> single;
      if (config.kind == StrategyKind::kDbSingle) single = config.ad_index;
      return std::make_unique<DbFeedbackStrategy>(name, instance, single, *target,
                                                  config.alpha0, every, config.bounds);
    }
    case StrategyKind::kDbFixed:
      break;
  }
  fail("unsupported strategy");
  return nullptr;
}

}  // namespace dbbid
