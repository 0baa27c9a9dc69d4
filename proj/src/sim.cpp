#include "dbbid/sim.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dbbid/error.hpp"

namespace dbbid {
namespace {

void check_range(const Range& r, const char* what, bool positive) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi ||
      (positive && !(r.lo > 0.0))) {
    throw Error(Errc::kInvalidRange,
                std::string(what) + " range [" + std::to_string(r.lo) + ", " +
                    std::to_string(r.hi) + "] is invalid");
  }
}

std::seed_seq make_seed(std::uint64_t a, std::uint64_t b) {
  return std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                       static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
}

double draw(std::mt19937_64& rng, const Range& r) {
  // 53-bit uniform in [0, 1), so the instance is identical across standard
  // libraries.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return r.lo + (r.hi - r.lo) * u;
}

double dsp_revenue(const DspInstance& instance, std::size_t i, std::size_t j, double cost) {
  const Ad& ad = instance.ads[j];
  if (instance.mode == PaymentMode::kP4P) return *ad.economics.cpp * instance.impressions[i].ppi[j];
  return (1.0 + *ad.economics.cr) * cost;
}

}  // namespace

MockConfig default_mock_config(ObjectiveKind objective) {
  MockConfig config;
  config.objective = objective;
  config.ads = {AdEconomics{1.0, std::nullopt}, AdEconomics{2.0, std::nullopt}};
  config.constraints = {
      {ConstraintKind::kBudget, PaymentMode::kP4P, 20.0, {1}},
      {ConstraintKind::kBudget, PaymentMode::kP4P, 10.0, {2}},
      {ConstraintKind::kDspRoi, PaymentMode::kP4P, 2.0, {1, 2}},
      {ConstraintKind::kAdvertiserRoi, PaymentMode::kP4P, 0.5, {1, 2}},
  };
  return config;
}

DspInstance gen_mock_instance(const MockConfig& config) {
  check_range(config.mu, "mu", false);
  check_range(config.sigma, "sigma", true);
  check_range(config.ppi, "ppi", false);
  if (config.ppi.lo < 0.0) {
    throw Error(Errc::kInvalidRange, "ppi range must be nonnegative");
  }

  DspInstance instance;
  instance.mode = config.mode;
  instance.objective = {config.mode, config.objective};
  instance.bid_cap = config.bid_cap;
  for (std::size_t j = 0; j < config.ads.size(); ++j) {
    instance.ads.push_back({static_cast<AdId>(j + 1), config.ads[j]});
  }
  instance.constraints = config.constraints;

  auto seq = make_seed(config.seed, 0x6d6f636bULL);
  std::mt19937_64 rng(seq);
  instance.impressions.reserve(config.n_impressions);
  for (std::size_t i = 0; i < config.n_impressions; ++i) {
    Impression imp;
    imp.id = static_cast<std::int64_t>(i);
    imp.prior.mu = draw(rng, config.mu);
    imp.prior.sigma = draw(rng, config.sigma);
    imp.ppi.reserve(config.ads.size());
    for (std::size_t j = 0; j < config.ads.size(); ++j) imp.ppi.push_back(draw(rng, config.ppi));
    instance.impressions.push_back(std::move(imp));
  }
  validate(instance);
  return instance;
}

std::vector<double> competing_bid_normals(std::uint64_t seed, std::size_t epoch,
                                          std::size_t n_impressions) {
  auto seq = make_seed(seed, epoch);
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  std::vector<double> z(n_impressions);
  for (double& v : z) v = normal(rng);
  return z;
}

SimReport run_expectation(const DspInstance& instance, std::span<const double> alpha) {
  const std::size_t num_k = instance.num_constraints();
  if (alpha.size() != num_k) {
    throw Error(Errc::kInvalidConfig, "alpha has " + std::to_string(alpha.size()) +
                                          " entries for " + std::to_string(num_k) +
                                          " constraints");
  }
  SimReport report;
  const std::vector<double> limits = instance.limits();
  std::vector<double> consumption(num_k, 0.0);
  report.decisions.reserve(instance.impressions.size());
  for (std::size_t i = 0; i < instance.impressions.size(); ++i) {
    BidDecision d = bid_decision(instance, i, alpha);
    if (d.ad_index) {
      const std::size_t j = *d.ad_index;
      const LandscapePrior& prior = instance.impressions[i].prior;
      report.primal_value += eval(objective_coeffs(instance, i, j), prior, *d.bid_price);
      for (std::size_t k = 0; k < num_k; ++k) {
        consumption[k] += eval(constraint_coeffs(instance, i, j, k).coeffs, prior, *d.bid_price);
      }
    }
    report.decisions.push_back(std::move(d));
  }
  report.dual_value = dual_objective(DspChoiceModel(instance), alpha);
  for (std::size_t k = 0; k < num_k; ++k) {
    report.per_constraint.push_back(
        {k, limits[k], consumption[k], limits[k] - consumption[k], alpha[k]});
  }
  return report;
}

SimReport run_monte_carlo(const DspInstance& instance, BiddingStrategy& strategy,
                          std::size_t epochs, std::uint64_t seed) {
  if (epochs < 1) throw Error(Errc::kInvalidConfig, "epochs must be >= 1");
  const std::size_t n = instance.impressions.size();
  const std::size_t num_k = instance.num_constraints();
  SimReport report;
  report.seed = seed;
  StrategyRun run;
  run.name = strategy.name();
  run.epochs.reserve(epochs);
  for (std::size_t e = 0; e < epochs; ++e) {
    const std::vector<double> z = competing_bid_normals(seed, e, n);
    EpochMetrics m;
    m.epoch = e;
    m.parameter = strategy.parameter();
    m.consumption.assign(num_k, 0.0);
    EpochFeedback feedback;
    for (std::size_t i = 0; i < n; ++i) {
      const Bid b = strategy.bid(instance, i);
      if (!b.ad_index || !(b.price > 0.0)) continue;
      const std::size_t j = *b.ad_index;
      const Impression& imp = instance.impressions[i];
      const double competing = std::exp(imp.prior.mu + imp.prior.sigma * z[i]);
      AuctionRecord rec{i, j, b.price, b.price > competing, 0.0, 0.0};
      ++m.bids;
      if (rec.won) {
        rec.cost = competing;
        rec.revenue = dsp_revenue(instance, i, j, competing);
        ++m.wins;
        m.cost += rec.cost;
        m.revenue += rec.revenue;
        m.performance += imp.ppi[j];
        for (std::size_t k = 0; k < num_k; ++k) {
          const UtilityCoeffs w = constraint_coeffs(instance, i, j, k).coeffs;
          m.consumption[k] += w.phi + w.psi * competing;
        }
      }
      feedback.auctions.push_back(rec);
    }
    m.actual_roi = m.cost > 0.0 ? m.revenue / m.cost : 0.0;
    m.revenue_per_win = m.wins > 0 ? m.revenue / static_cast<double>(m.wins) : 0.0;
    run.epochs.push_back(std::move(m));
    strategy.end_epoch(instance, feedback);
  }
  run.flagged_updates = strategy.flagged_updates();
  report.per_strategy.push_back(std::move(run));
  return report;
}

SimReport compare_strategies(const DspInstance& instance,
                             std::span<const StrategyConfig> strategies, std::size_t epochs,
                             std::uint64_t seed) {
  if (strategies.size() < 2) {
    throw Error(Errc::kInvalidConfig, "comparison needs at least two strategies");
  }
  SimReport report;
  report.seed = seed;
  for (const auto& config : strategies) {
    auto strategy = make_strategy(config, instance);
    SimReport single = run_monte_carlo(instance, *strategy, epochs, seed);
    report.per_strategy.push_back(std::move(single.per_strategy.front()));
  }
  return report;
}

double aggregate_roi(const StrategyRun& run, std::size_t from) {
  double revenue = 0.0;
  double cost = 0.0;
  for (std::size_t e = from; e < run.epochs.size(); ++e) {
    revenue += run.epochs[e].revenue;
    cost += run.epochs[e].cost;
  }
  return cost > 0.0 ? revenue / cost : 0.0;
}

double total_revenue(const StrategyRun& run, std::size_t from) {
  double revenue = 0.0;
  for (std::size_t e = from; e < run.epochs.size(); ++e) revenue += run.epochs[e].revenue;
  return revenue;
}

}  // namespace dbbid
