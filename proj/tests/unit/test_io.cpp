#include <string>

#include <doctest.h>

#include "dbbid/error.hpp"
#include "dbbid/io.hpp"
#include "dbbid/sim.hpp"

using namespace dbbid;
using io::Json;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no dbbid::Error thrown");
  return Errc::kIo;
}

}  // namespace

TEST_CASE("instance JSON round trip is exact") {
  MockConfig c = default_mock_config();
  c.n_impressions = 30;
  const DspInstance a = gen_mock_instance(c);
  const Json j = io::to_json(a);
  const DspInstance b = io::instance_from_json(io::parse_json(j.dump()));
  CHECK(io::to_json(b).dump() == j.dump());
  for (std::size_t i = 0; i < a.impressions.size(); ++i) {
    CHECK(a.impressions[i].prior.mu == b.impressions[i].prior.mu);
    CHECK(a.impressions[i].ppi == b.impressions[i].ppi);
  }
}

TEST_CASE("P4U instance parses") {
  const char* text = R"({"mode": "p4u", "objective": "revenue",
    "ads": [{"id": 7, "cr": 0.1}],
    "constraints": [{"kind": "adv_roi", "bound": 0.5, "scope": [7]}],
    "impressions": [{"mu": -1, "sigma": 0.5, "ppi": [0.3]}]})";
  const DspInstance inst = io::instance_from_json(io::parse_json(text));
  CHECK(inst.mode == PaymentMode::kP4U);
  CHECK(*inst.ads[0].economics.cr == 0.1);
  CHECK(inst.constraints[0].mode == PaymentMode::kP4U);
  CHECK(inst.impressions[0].id == 0);
}

TEST_CASE("instance errors") {
  CHECK(code_of([] { io::parse_json(R"({"mode": "p4p", "ads": [)"); }) == Errc::kParse);
  try {
    io::parse_json("{\"a\": 1,,}", "x.json");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("x.json: JSON parse error at byte 9") != std::string::npos);
  }
  const Json missing = io::parse_json(R"({"mode": "p4p", "objective": "revenue", "ads": []})");
  CHECK(code_of([&] { io::instance_from_json(missing); }) == Errc::kParse);
  const Json bad_kind = io::parse_json(R"({"mode": "p4p", "objective": "revenue",
    "ads": [{"id": 1, "cpp": 1}], "impressions": [],
    "constraints": [{"kind": "daily", "bound": 1, "scope": [1]}]})");
  CHECK(code_of([&] { io::instance_from_json(bad_kind); }) == Errc::kParse);
  const Json bad_scope = io::parse_json(R"({"mode": "p4p", "objective": "revenue",
    "ads": [{"id": 1, "cpp": 1}], "impressions": [],
    "constraints": [{"kind": "budget", "bound": 1, "scope": [2]}]})");
  CHECK(code_of([&] { io::instance_from_json(bad_scope); }) == Errc::kInvalidInstance);
  CHECK(code_of([] { io::read_json_file("/nonexistent/instance.json"); }) == Errc::kIo);
}

TEST_CASE("mock config JSON") {
  const MockConfig d = default_mock_config();
  const MockConfig r = io::mock_config_from_json(io::to_json(d));
  CHECK(io::to_json(r).dump() == io::to_json(d).dump());
  const MockConfig p = io::mock_config_from_json(io::parse_json(R"({"n_impressions": 5, "mu": [-1, 0]})"));
  CHECK(p.n_impressions == 5u);
  CHECK(p.mu.lo == -1.0);
  CHECK(p.constraints.size() == 4u);
  CHECK(code_of([] { io::mock_config_from_json(io::parse_json(R"({"mu": [1]})")); }) ==
        Errc::kParse);
}

TEST_CASE("strategy config JSON") {
  const StrategyConfig c = io::strategy_config_from_json(
      io::parse_json(R"({"strategy": "ortb", "params": {"label": "o", "c0": 0.5, "ad_index": 1}})"));
  CHECK(c.kind == StrategyKind::kOrtb);
  CHECK(*c.label == "o");
  CHECK(c.c0 == 0.5);
  CHECK(c.ad_index == 1u);
  CHECK(io::to_json(io::strategy_config_from_json(io::to_json(c))).dump() == io::to_json(c).dump());
  CHECK(code_of([] {
          io::strategy_config_from_json(io::parse_json(R"({"strategy": "lin", "params": {"speed": 1}})"));
        }) == Errc::kInvalidConfig);
  CHECK(code_of([] { io::strategy_config_from_json(io::parse_json(R"({"strategy": "x"})")); }) ==
        Errc::kInvalidConfig);
}

TEST_CASE("dual state JSON") {
  DualState s;
  s.alpha = {0.0, 1.25, 3.0000000000000004};
  s.iterations = 12;
  s.dual_trace = {2.0, 1.5};
  const DualState r = io::dual_state_from_json(io::parse_json(io::to_json(s).dump()));
  CHECK(r.alpha == s.alpha);
  CHECK(r.iterations == 12u);
  CHECK(r.dual_trace == s.dual_trace);
}

TEST_CASE("observation CSV") {
  const auto obs = io::parse_observations_csv("outcome,bid_price,paid_cost\nWON,1,0.5\nLOST,0.2,\n");
  REQUIRE(obs.size() == 2u);
  CHECK(obs[0].outcome == Outcome::kWon);
  CHECK(*obs[0].paid_cost == 0.5);
  CHECK_FALSE(obs[1].paid_cost);
  CHECK(io::parse_observations_csv(io::observations_csv(obs)).size() == 2u);

  auto message = [](const char* text) {
    try {
      io::parse_observations_csv(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("outcome,bid_price,paid_cost\nWON,1,0.5\nMAYBE,1,\n").find("line 3") !=
        std::string::npos);
  CHECK(message("outcome,bid_price,paid_cost\nLOST,1,0.5\n").find("line 2") != std::string::npos);
  CHECK(message("outcome,bid_price,paid_cost\nWON,abc,0.5\n").find("line 2") != std::string::npos);
  CHECK(message("bid,outcome\n") != "");
}

TEST_CASE("number formatting and report CSVs") {
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(2.0) == "2");
  CHECK(std::stod(io::format_number(1.0 / 3.0)) == 1.0 / 3.0);

  std::vector<BidDecision> d(2);
  d[0] = {3, 1, 2, 0.25, 0.125};
  d[1] = {4, std::nullopt, std::nullopt, std::nullopt, 0.0};
  CHECK(io::decisions_csv(d) == "impression_id,ad_id,bid_price,best_score\n3,2,0.25,0.125\n4,,,0\n");

  const std::vector<ConstraintRow> rows = {{0, 20.0, 5.0, 15.0, 0.0}};
  CHECK(io::constraints_csv(rows) == "k,limit,consumption,surplus,alpha\n0,20,5,15,0\n");

  StrategyRun run;
  run.epochs.resize(1);
  run.epochs[0].consumption = {1.0, 2.0};
  const std::string csv = io::epochs_csv(run, 2);
  CHECK(csv.rfind("epoch,revenue,cost,performance,actual_roi,bids,wins,revenue_per_win,"
                  "parameter,consumption_0,consumption_1\n",
                  0) == 0);
}
