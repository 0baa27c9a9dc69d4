#pragma once

// File formats: instance / config JSON, observation CSV, report CSV and JSON.
// Numbers are written in shortest round-trip form so equal values always
// produce equal bytes.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dbbid/dsp.hpp"
#include "dbbid/landscape.hpp"
#include "dbbid/mmkp.hpp"
#include "dbbid/sim.hpp"
#include "dbbid/strategies.hpp"

namespace dbbid::io {

using Json = nlohmann::ordered_json;

// Throws Error(kParse) with the byte offset of the failure.
Json parse_json(std::string_view text, std::string_view source = "<input>");
Json read_json_file(const std::filesystem::path& path);
// Writes dump(2) plus a trailing newline. Throws Error(kIo).
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string_view to_string(PaymentMode mode);
std::string_view to_string(ObjectiveKind kind);
std::string_view to_string(ConstraintKind kind);
PaymentMode payment_mode_from_string(std::string_view s);
ObjectiveKind objective_kind_from_string(std::string_view s);
ConstraintKind constraint_kind_from_string(std::string_view s);

// {"mode", "objective", "bid_cap"?, "ads": [{"id", "cpp"|"cr"}],
//  "constraints": [{"kind", "bound", "scope", "mode"?}],
//  "impressions": [{"id"?, "mu", "sigma", "ppi": [...]}]}
// Structural problems throw kParse, semantic ones kInvalidInstance.
DspInstance instance_from_json(const Json& j);
Json to_json(const DspInstance& instance);

// Every field optional; missing ones take default_mock_config values.
// Ranges are two-element arrays [lo, hi].
MockConfig mock_config_from_json(const Json& j);
Json to_json(const MockConfig& config);

// {"strategy": "lin"|"ortb"|"db_single"|"db_multi"|"db_fixed", "params": {...}}
StrategyConfig strategy_config_from_json(const Json& j);
Json to_json(const StrategyConfig& config);

Json to_json(const DualState& state);
DualState dual_state_from_json(const Json& j);

Json to_json(const FitResult& fit);
Json to_json(const OrtbFitResult& fit);

// Header "outcome,bid_price,paid_cost"; outcome WON or LOST, paid_cost empty
// for lost rows. Errors carry the line number.
std::vector<BidObservation> parse_observations_csv(std::string_view text);
std::vector<BidObservation> read_observations_csv(const std::filesystem::path& path);
std::string observations_csv(std::span<const BidObservation> observations);

// Shortest round-trip decimal.
std::string format_number(double x);

// impression_id,ad_id,bid_price,best_score; empty ad and price when no bid.
std::string decisions_csv(std::span<const BidDecision> decisions);
// k,limit,consumption,surplus,alpha
std::string constraints_csv(std::span<const ConstraintRow> rows);
// epoch,revenue,cost,performance,actual_roi,bids,wins,revenue_per_win,
// parameter,consumption_0..consumption_{K-1}
std::string epochs_csv(const StrategyRun& run, std::size_t num_constraints);

}  // namespace dbbid::io
