#include <cmath>
#include <vector>

#include <doctest.h>

#include "dbbid/error.hpp"
#include "dbbid/mmkp.hpp"
#include "dbbid/sim.hpp"
#include "../oracles.hpp"

using namespace dbbid;

namespace {

// Bids a constant price on ad 0 and keeps every feedback record.
class RecordingStrategy final : public BiddingStrategy {
 public:
  explicit RecordingStrategy(double price) : price_(price) {}
  std::string name() const override { return "recording"; }
  Bid bid(const DspInstance&, std::size_t) const override { return {0, price_}; }
  void end_epoch(const DspInstance&, const EpochFeedback& feedback) override {
    epochs.push_back(feedback);
  }
  double parameter() const override { return price_; }
  std::vector<EpochFeedback> epochs;

 private:
  double price_;
};

std::vector<double> solved_alpha(const DspInstance& inst) {
  return sgd_solve(DspChoiceModel(inst)).alpha;
}

}  // namespace

TEST_CASE("default mock instance") {
  const DspInstance inst = gen_mock_instance(default_mock_config());
  CHECK(inst.impressions.size() == 200u);
  REQUIRE(inst.ads.size() == 2u);
  CHECK(*inst.ads[0].economics.cpp == 1.0);
  CHECK(*inst.ads[1].economics.cpp == 2.0);
  REQUIRE(inst.num_constraints() == 4u);
  CHECK(inst.constraints[0].kind == ConstraintKind::kBudget);
  CHECK(inst.constraints[0].bound == 20.0);
  CHECK(inst.constraints[0].scope == std::vector<AdId>{1});
  CHECK(inst.constraints[1].bound == 10.0);
  CHECK(inst.constraints[1].scope == std::vector<AdId>{2});
  CHECK(inst.constraints[2].kind == ConstraintKind::kDspRoi);
  CHECK(inst.constraints[2].bound == 2.0);
  CHECK(inst.constraints[3].kind == ConstraintKind::kAdvertiserRoi);
  CHECK(inst.constraints[3].bound == 0.5);
  CHECK(inst.limits() == std::vector<double>{20.0, 10.0, 0.0, 0.0});
}

TEST_CASE("generation is deterministic and validated") {
  MockConfig c = default_mock_config();
  c.seed = 17;
  const DspInstance a = gen_mock_instance(c);
  const DspInstance b = gen_mock_instance(c);
  for (std::size_t i = 0; i < a.impressions.size(); ++i) {
    CHECK(a.impressions[i].prior.mu == b.impressions[i].prior.mu);
    CHECK(a.impressions[i].prior.sigma == b.impressions[i].prior.sigma);
    CHECK(a.impressions[i].ppi == b.impressions[i].ppi);
  }
  c.seed = 18;
  CHECK(gen_mock_instance(c).impressions[0].prior.mu != a.impressions[0].prior.mu);

  MockConfig bad = default_mock_config();
  bad.sigma = {0.0, 1.0};
  CHECK_THROWS_AS(gen_mock_instance(bad), Error);
  bad = default_mock_config();
  bad.mu = {1.0, 0.0};
  CHECK_THROWS_AS(gen_mock_instance(bad), Error);
}

TEST_CASE("empty instance") {
  MockConfig c = default_mock_config();
  c.n_impressions = 0;
  const DspInstance inst = gen_mock_instance(c);
  const DualState s = sgd_solve(DspChoiceModel(inst));
  CHECK(s.alpha == std::vector<double>(4, 1.0));
  CHECK(run_expectation(inst, s.alpha).primal_value == 0.0);
}

TEST_CASE("expectation mode on the solved default instance") {
  const DspInstance inst = gen_mock_instance(default_mock_config());
  const auto alpha = solved_alpha(inst);
  const SimReport r = run_expectation(inst, alpha);
  CHECK(std::fabs(r.primal_value - r.dual_value) / r.dual_value <= 0.01);
  CHECK(r.primal_value <= r.dual_value + 1e-6);
  REQUIRE(r.per_constraint.size() == 4u);
  for (const auto& row : r.per_constraint) {
    CHECK(row.surplus == row.limit - row.consumption);
    CHECK(row.consumption <= row.limit + 1e-2 * std::max(1.0, std::fabs(row.limit)));
    CHECK(row.alpha * row.surplus <= 1e-2);
  }
  CHECK(r.decisions.size() == 200u);

  const std::vector<double> priced_out = {1e6, 1e6, 0.0, 0.0};
  CHECK(run_expectation(inst, priced_out).primal_value == 0.0);
  CHECK_THROWS_AS(run_expectation(inst, std::vector<double>{1.0}), Error);
}

TEST_CASE("slack budget gets a vanishing price") {
  MockConfig c = default_mock_config();
  c.constraints[0].bound = 1000.0;
  const DspInstance inst = gen_mock_instance(c);
  const auto alpha = solved_alpha(inst);
  const SimReport r = run_expectation(inst, alpha);
  CHECK(alpha[0] <= 1e-3);
  CHECK(r.per_constraint[0].surplus > 0.0);
}

TEST_CASE("Monte-Carlo consumption matches expectation") {
  const DspInstance inst = gen_mock_instance(default_mock_config());
  const auto alpha = solved_alpha(inst);
  const SimReport exp = run_expectation(inst, alpha);
  StrategyConfig fixed;
  fixed.kind = StrategyKind::kDbFixed;
  fixed.alpha = alpha;
  auto s = make_strategy(fixed, inst);
  const std::size_t epochs = 400;
  const SimReport mc = run_monte_carlo(inst, *s, epochs, 3);
  const auto& run = mc.per_strategy.front();
  const double e_count = static_cast<double>(epochs);
  const double tol = 3.0 / std::sqrt(static_cast<double>(inst.impressions.size()) * e_count);
  auto check_mean = [&](auto&& per_epoch, double expected, bool lln_scale) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& m : run.epochs) {
      const double v = per_epoch(m);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / e_count;
    const double se = std::sqrt((sq / e_count - mean * mean) / (e_count - 1.0));
    CHECK(std::fabs(mean - expected) <= 4.0 * se + 1e-12);
    // The 1/sqrt(n epochs) scale assumes most impressions contribute.
    if (lln_scale) CHECK(std::fabs(mean - expected) / std::fabs(expected) <= tol);
  };
  for (std::size_t k = 0; k < 4; ++k) {
    check_mean([k](const EpochMetrics& m) { return m.consumption[k]; },
               exp.per_constraint[k].consumption, k == 1);
  }
  check_mean([](const EpochMetrics& m) { return m.revenue; }, exp.primal_value, true);
}

TEST_CASE("second-price accounting and common random numbers") {
  const DspInstance inst = gen_mock_instance(default_mock_config());
  RecordingStrategy s(0.08);
  const SimReport r = run_monte_carlo(inst, s, 5, 9);
  REQUIRE(s.epochs.size() == 5u);
  for (std::size_t e = 0; e < 5; ++e) {
    const auto z = competing_bid_normals(9, e, inst.impressions.size());
    std::size_t wins = 0;
    for (const auto& a : s.epochs[e].auctions) {
      const auto& p = inst.impressions[a.impression].prior;
      const double x = std::exp(p.mu + p.sigma * z[a.impression]);
      CHECK(a.won == (a.bid > x));
      if (a.won) {
        ++wins;
        CHECK(a.cost == x);
        CHECK(a.cost <= a.bid);
      } else {
        CHECK(a.cost == 0.0);
        CHECK(a.revenue == 0.0);
      }
    }
    CHECK(r.per_strategy[0].epochs[e].wins == wins);
  }

  RecordingStrategy zero(0.0);
  const SimReport none = run_monte_carlo(inst, zero, 3, 9);
  for (const auto& m : none.per_strategy[0].epochs) {
    CHECK(m.wins == 0u);
    CHECK(m.cost == 0.0);
  }
  CHECK_THROWS_AS(run_monte_carlo(inst, zero, 0, 9), Error);
}

TEST_CASE("comparison runs on a shared stream") {
  const DspInstance inst = gen_mock_instance(default_mock_config());
  StrategyConfig a;
  a.kind = StrategyKind::kDbSingle;
  a.label = "a";
  StrategyConfig b = a;
  b.label = "b";
  const std::vector<StrategyConfig> both = {a, b};
  const SimReport r = compare_strategies(inst, both, 20, 4);
  REQUIRE(r.per_strategy.size() == 2u);
  for (std::size_t e = 0; e < 20; ++e) {
    CHECK(r.per_strategy[0].epochs[e].revenue == r.per_strategy[1].epochs[e].revenue);
    CHECK(r.per_strategy[0].epochs[e].wins == r.per_strategy[1].epochs[e].wins);
  }
  CHECK(r.per_strategy[0].name == "a");
  CHECK_THROWS_AS(compare_strategies(inst, std::vector<StrategyConfig>{a}, 20, 4), Error);
}

TEST_CASE("aggregates") {
  StrategyRun run;
  run.epochs.resize(3);
  run.epochs[0].revenue = 1.0;
  run.epochs[0].cost = 1.0;
  run.epochs[1].revenue = 4.0;
  run.epochs[1].cost = 2.0;
  run.epochs[2].revenue = 2.0;
  run.epochs[2].cost = 0.0;
  CHECK(aggregate_roi(run) == doctest::Approx(7.0 / 3.0));
  CHECK(aggregate_roi(run, 1) == doctest::Approx(3.0));
  CHECK(total_revenue(run, 2) == 2.0);
  CHECK(aggregate_roi(run, 3) == 0.0);
}
