#include "dbbid/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "dbbid/error.hpp"

namespace dbbid::io {
namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(Errc::kParse, what); }

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) parse_fail(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(where + ": missing field '" + key + "'");
  return *it;
}

double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where + ": expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) parse_fail(where + ": expected a string");
  return j.get<std::string>();
}

std::int64_t as_integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) parse_fail(where + ": expected an integer");
  return j.get<std::int64_t>();
}

const Json& as_array(const Json& j, const std::string& where) {
  if (!j.is_array()) parse_fail(where + ": expected an array");
  return j;
}

Range as_range(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) parse_fail(where + ": expected [lo, hi]");
  return {as_number(j[0], where + "[0]"), as_number(j[1], where + "[1]")};
}

ConstraintSpec constraint_from_json(const Json& j, PaymentMode default_mode,
                                    const std::string& where) {
  ConstraintSpec c;
  c.kind = constraint_kind_from_string(as_string(require(j, "kind", where), where + ".kind"));
  c.mode = default_mode;
  if (j.contains("mode")) {
    c.mode = payment_mode_from_string(as_string(j["mode"], where + ".mode"));
  }
  c.bound = as_number(require(j, "bound", where), where + ".bound");
  const Json& scope = as_array(require(j, "scope", where), where + ".scope");
  for (std::size_t s = 0; s < scope.size(); ++s) {
    c.scope.push_back(as_integer(scope[s], where + ".scope[" + std::to_string(s) + "]"));
  }
  return c;
}

Json constraint_to_json(const ConstraintSpec& c) {
  Json j;
  j["kind"] = to_string(c.kind);
  j["mode"] = to_string(c.mode);
  j["bound"] = c.bound;
  j["scope"] = c.scope;
  return j;
}

AdEconomics economics_from_json(const Json& j, const std::string& where) {
  AdEconomics e;
  if (!j.is_object()) parse_fail(where + ": expected an object");
  if (j.contains("cpp")) e.cpp = as_number(j["cpp"], where + ".cpp");
  if (j.contains("cr")) e.cr = as_number(j["cr"], where + ".cr");
  return e;
}

void economics_to_json(Json& j, const AdEconomics& e) {
  if (e.cpp) j["cpp"] = *e.cpp;
  if (e.cr) j["cr"] = *e.cr;
}

template <typename Enum, std::size_t N>
Enum lookup(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N],
            const char* what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  parse_fail(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::pair<std::string_view, PaymentMode> kModes[] = {{"p4p", PaymentMode::kP4P},
                                                               {"p4u", PaymentMode::kP4U}};
constexpr std::pair<std::string_view, ObjectiveKind> kObjectives[] = {
    {"revenue", ObjectiveKind::kRevenue}, {"performance", ObjectiveKind::kPerformance}};
constexpr std::pair<std::string_view, ConstraintKind> kConstraints[] = {
    {"budget", ConstraintKind::kBudget},
    {"dsp_roi", ConstraintKind::kDspRoi},
    {"adv_roi", ConstraintKind::kAdvertiserRoi}};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view s, std::size_t line_no, const char* column) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    parse_fail("line " + std::to_string(line_no) + ": bad " + column + " '" + std::string(s) +
               "'");
  }
  return v;
}

}  // namespace

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    // e.what() already names line and column; the byte offset is stable
    // across editors.
    throw Error(Errc::kParse, fmt::format("{}: JSON parse error at byte {}: {}", source, e.byte,
                                          e.what()));
  }
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_file(path), path.string());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::kIo, "write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string_view to_string(PaymentMode mode) {
  return mode == PaymentMode::kP4P ? "p4p" : "p4u";
}

std::string_view to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::kRevenue ? "revenue" : "performance";
}

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kBudget:
      return "budget";
    case ConstraintKind::kDspRoi:
      return "dsp_roi";
    case ConstraintKind::kAdvertiserRoi:
      return "adv_roi";
  }
  return "unknown";
}

PaymentMode payment_mode_from_string(std::string_view s) {
  return lookup(s, kModes, "payment mode");
}
ObjectiveKind objective_kind_from_string(std::string_view s) {
  return lookup(s, kObjectives, "objective");
}
ConstraintKind constraint_kind_from_string(std::string_view s) {
  return lookup(s, kConstraints, "constraint kind");
}

DspInstance instance_from_json(const Json& j) {
  DspInstance inst;
  inst.mode = payment_mode_from_string(as_string(require(j, "mode", "instance"), "instance.mode"));
  inst.objective = {inst.mode, objective_kind_from_string(as_string(
                                   require(j, "objective", "instance"), "instance.objective"))};
  if (j.contains("bid_cap")) inst.bid_cap = as_number(j["bid_cap"], "instance.bid_cap");

  const Json& ads = as_array(require(j, "ads", "instance"), "instance.ads");
  for (std::size_t a = 0; a < ads.size(); ++a) {
    const std::string where = "instance.ads[" + std::to_string(a) + "]";
    Ad ad;
    ad.id = as_integer(require(ads[a], "id", where), where + ".id");
    ad.economics = economics_from_json(ads[a], where);
    inst.ads.push_back(ad);
  }

  const Json& cons = as_array(require(j, "constraints", "instance"), "instance.constraints");
  for (std::size_t k = 0; k < cons.size(); ++k) {
    inst.constraints.push_back(
        constraint_from_json(cons[k], inst.mode, "instance.constraints[" + std::to_string(k) + "]"));
  }

  const Json& imps = as_array(require(j, "impressions", "instance"), "instance.impressions");
  inst.impressions.reserve(imps.size());
  for (std::size_t i = 0; i < imps.size(); ++i) {
    const std::string where = "instance.impressions[" + std::to_string(i) + "]";
    Impression imp;
    imp.id = imps[i].contains("id") ? as_integer(imps[i]["id"], where + ".id")
                                    : static_cast<std::int64_t>(i);
    imp.prior.mu = as_number(require(imps[i], "mu", where), where + ".mu");
    imp.prior.sigma = as_number(require(imps[i], "sigma", where), where + ".sigma");
    const Json& ppi = as_array(require(imps[i], "ppi", where), where + ".ppi");
    for (std::size_t p = 0; p < ppi.size(); ++p) {
      imp.ppi.push_back(as_number(ppi[p], where + ".ppi[" + std::to_string(p) + "]"));
    }
    inst.impressions.push_back(std::move(imp));
  }
  validate(inst);
  return inst;
}

Json to_json(const DspInstance& instance) {
  Json j;
  j["mode"] = to_string(instance.mode);
  j["objective"] = to_string(instance.objective.kind);
  j["bid_cap"] = instance.bid_cap;
  j["ads"] = Json::array();
  for (const auto& ad : instance.ads) {
    Json a;
    a["id"] = ad.id;
    economics_to_json(a, ad.economics);
    j["ads"].push_back(std::move(a));
  }
  j["constraints"] = Json::array();
  for (const auto& c : instance.constraints) j["constraints"].push_back(constraint_to_json(c));
  j["impressions"] = Json::array();
  for (const auto& imp : instance.impressions) {
    Json o;
    o["id"] = imp.id;
    o["mu"] = imp.prior.mu;
    o["sigma"] = imp.prior.sigma;
    o["ppi"] = imp.ppi;
    j["impressions"].push_back(std::move(o));
  }
  return j;
}

MockConfig mock_config_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("mock config: expected an object");
  ObjectiveKind objective = ObjectiveKind::kRevenue;
  if (j.contains("objective")) {
    objective = objective_kind_from_string(as_string(j["objective"], "mock.objective"));
  }
  MockConfig c = default_mock_config(objective);
  if (j.contains("n_impressions")) {
    const std::int64_t n = as_integer(j["n_impressions"], "mock.n_impressions");
    if (n < 0) throw Error(Errc::kInvalidConfig, "mock.n_impressions must be >= 0");
    c.n_impressions = static_cast<std::size_t>(n);
  }
  if (j.contains("mode")) c.mode = payment_mode_from_string(as_string(j["mode"], "mock.mode"));
  if (j.contains("ads")) {
    c.ads.clear();
    const Json& ads = as_array(j["ads"], "mock.ads");
    for (std::size_t a = 0; a < ads.size(); ++a) {
      c.ads.push_back(economics_from_json(ads[a], "mock.ads[" + std::to_string(a) + "]"));
    }
  }
  if (j.contains("constraints")) {
    c.constraints.clear();
    const Json& cons = as_array(j["constraints"], "mock.constraints");
    for (std::size_t k = 0; k < cons.size(); ++k) {
      c.constraints.push_back(
          constraint_from_json(cons[k], c.mode, "mock.constraints[" + std::to_string(k) + "]"));
    }
  } else if (c.mode != PaymentMode::kP4P) {
    for (auto& spec : c.constraints) spec.mode = c.mode;
  }
  if (j.contains("mu")) c.mu = as_range(j["mu"], "mock.mu");
  if (j.contains("sigma")) c.sigma = as_range(j["sigma"], "mock.sigma");
  if (j.contains("ppi")) c.ppi = as_range(j["ppi"], "mock.ppi");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      parse_fail("mock.seed: expected an integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("bid_cap")) c.bid_cap = as_number(j["bid_cap"], "mock.bid_cap");
  return c;
}

Json to_json(const MockConfig& config) {
  Json j;
  j["n_impressions"] = config.n_impressions;
  j["mode"] = to_string(config.mode);
  j["objective"] = to_string(config.objective);
  j["ads"] = Json::array();
  for (const auto& e : config.ads) {
    Json a = Json::object();
    economics_to_json(a, e);
    j["ads"].push_back(std::move(a));
  }
  j["constraints"] = Json::array();
  for (const auto& c : config.constraints) j["constraints"].push_back(constraint_to_json(c));
  j["mu"] = {config.mu.lo, config.mu.hi};
  j["sigma"] = {config.sigma.lo, config.sigma.hi};
  j["ppi"] = {config.ppi.lo, config.ppi.hi};
  j["seed"] = config.seed;
  j["bid_cap"] = config.bid_cap;
  return j;
}

StrategyConfig strategy_config_from_json(const Json& j) {
  StrategyConfig c;
  c.kind = strategy_kind_from_string(as_string(require(j, "strategy", "strategy"),
                                               "strategy.strategy"));
  if (!j.contains("params")) return c;
  const Json& p = j["params"];
  if (!p.is_object()) parse_fail("strategy.params: expected an object");
  for (const auto& [key, value] : p.items()) {
    const std::string where = "strategy.params." + key;
    if (key == "label") {
      c.label = as_string(value, where);
    } else if (key == "target_roi") {
      c.target_roi = as_number(value, where);
    } else if (key == "ad_index") {
      const std::int64_t v = as_integer(value, where);
      if (v < 0) throw Error(Errc::kInvalidConfig, where + " must be >= 0");
      c.ad_index = static_cast<std::size_t>(v);
    } else if (key == "alpha0") {
      c.alpha0 = as_number(value, where);
    } else if (key == "lambda0") {
      c.lambda0 = as_number(value, where);
    } else if (key == "c0") {
      c.c0 = as_number(value, where);
    } else if (key == "bid_base") {
      c.bid_base = as_number(value, where);
    } else if (key == "update_every") {
      c.update_every = static_cast<int>(as_integer(value, where));
    } else if (key == "alpha") {
      for (std::size_t k = 0; k < as_array(value, where).size(); ++k) {
        c.alpha.push_back(as_number(value[k], where + "[" + std::to_string(k) + "]"));
      }
    } else if (key == "min") {
      c.bounds.min = as_number(value, where);
    } else if (key == "max") {
      c.bounds.max = as_number(value, where);
    } else {
      throw Error(Errc::kInvalidConfig, "unknown strategy parameter '" + key + "'");
    }
  }
  return c;
}

Json to_json(const StrategyConfig& config) {
  Json p = Json::object();
  if (config.label) p["label"] = *config.label;
  if (config.target_roi) p["target_roi"] = *config.target_roi;
  p["ad_index"] = config.ad_index;
  p["alpha0"] = config.alpha0;
  p["lambda0"] = config.lambda0;
  p["c0"] = config.c0;
  if (config.bid_base) p["bid_base"] = *config.bid_base;
  if (config.update_every) p["update_every"] = *config.update_every;
  if (!config.alpha.empty()) p["alpha"] = config.alpha;
  p["min"] = config.bounds.min;
  p["max"] = config.bounds.max;
  Json j;
  j["strategy"] = to_string(config.kind);
  j["params"] = std::move(p);
  return j;
}

Json to_json(const DualState& state) {
  Json j;
  j["alpha"] = state.alpha;
  j["iterations"] = state.iterations;
  j["dual_trace"] = state.dual_trace;
  return j;
}

DualState dual_state_from_json(const Json& j) {
  DualState s;
  const Json& alpha = as_array(require(j, "alpha", "dual state"), "dual state.alpha");
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    s.alpha.push_back(as_number(alpha[k], "dual state.alpha[" + std::to_string(k) + "]"));
  }
  if (j.contains("iterations")) {
    s.iterations = static_cast<std::size_t>(as_integer(j["iterations"], "dual state.iterations"));
  }
  if (j.contains("dual_trace")) {
    const Json& t = as_array(j["dual_trace"], "dual state.dual_trace");
    for (std::size_t e = 0; e < t.size(); ++e) s.dual_trace.push_back(as_number(t[e], "dual_trace"));
  }
  return s;
}

Json to_json(const FitResult& fit) {
  Json j;
  j["model"] = "lognormal";
  j["mu"] = fit.prior.mu;
  j["sigma"] = fit.prior.sigma;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["log_likelihood"] = fit.log_likelihood;
  return j;
}

Json to_json(const OrtbFitResult& fit) {
  Json j;
  j["model"] = "ortb";
  j["c"] = fit.c;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["log_likelihood"] = fit.log_likelihood;
  return j;
}

std::vector<BidObservation> parse_observations_csv(std::string_view text) {
  std::vector<BidObservation> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (cells.size() != 3 || trim(cells[0]) != "outcome" || trim(cells[1]) != "bid_price" ||
          trim(cells[2]) != "paid_cost") {
        parse_fail("line 1: expected header 'outcome,bid_price,paid_cost'");
      }
      continue;
    }
    if (cells.size() != 3) {
      parse_fail("line " + std::to_string(line_no) + ": expected 3 columns, got " +
                 std::to_string(cells.size()));
    }
    const std::string_view outcome = trim(cells[0]);
    const double bid = parse_double(cells[1], line_no, "bid_price");
    BidObservation obs;
    if (outcome == "WON") {
      obs = BidObservation::won(bid, parse_double(cells[2], line_no, "paid_cost"));
    } else if (outcome == "LOST") {
      if (!trim(cells[2]).empty()) {
        parse_fail("line " + std::to_string(line_no) + ": lost row must leave paid_cost empty");
      }
      obs = BidObservation::lost(bid);
    } else {
      parse_fail("line " + std::to_string(line_no) + ": outcome must be WON or LOST");
    }
    try {
      validate(obs);
    } catch (const Error& e) {
      throw Error(Errc::kInvalidObservation, "line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(obs);
  }
  if (!header_seen) parse_fail("observation CSV is empty");
  return out;
}

std::vector<BidObservation> read_observations_csv(const std::filesystem::path& path) {
  return parse_observations_csv(read_file(path));
}

std::string observations_csv(std::span<const BidObservation> observations) {
  std::string out = "outcome,bid_price,paid_cost\n";
  for (const auto& obs : observations) {
    if (obs.outcome == Outcome::kWon) {
      out += fmt::format("WON,{},{}\n", obs.bid_price, *obs.paid_cost);
    } else {
      out += fmt::format("LOST,{},\n", obs.bid_price);
    }
  }
  return out;
}

std::string format_number(double x) { return fmt::format("{}", x); }

std::string decisions_csv(std::span<const BidDecision> decisions) {
  std::string out = "impression_id,ad_id,bid_price,best_score\n";
  for (const auto& d : decisions) {
    if (d.ad_id) {
      out += fmt::format("{},{},{},{}\n", d.impression_id, *d.ad_id, *d.bid_price, d.best_score);
    } else {
      out += fmt::format("{},,,{}\n", d.impression_id, d.best_score);
    }
  }
  return out;
}

std::string constraints_csv(std::span<const ConstraintRow> rows) {
  std::string out = "k,limit,consumption,surplus,alpha\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", r.k, r.limit, r.consumption, r.surplus, r.alpha);
  }
  return out;
}

std::string epochs_csv(const StrategyRun& run, std::size_t num_constraints) {
  std::string out =
      "epoch,revenue,cost,performance,actual_roi,bids,wins,revenue_per_win,parameter";
  for (std::size_t k = 0; k < num_constraints; ++k) out += fmt::format(",consumption_{}", k);
  out += '\n';
  for (const auto& m : run.epochs) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}", m.epoch, m.revenue, m.cost, m.performance,
                       m.actual_roi, m.bids, m.wins, m.revenue_per_win, m.parameter);
    for (std::size_t k = 0; k < num_constraints; ++k) {
      out += fmt::format(",{}", k < m.consumption.size() ? m.consumption[k] : 0.0);
    }
    out += '\n';
  }
  return out;
}

}  // namespace dbbid::io
