#include "dbbid/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbbid/error.hpp"
#include "dbbid/io.hpp"
#include "dbbid/mmkp.hpp"
#include "dbbid/sim.hpp"
#include "dbbid/strategies.hpp"

#ifndef DBBID_VERSION
#define DBBID_VERSION "0.0.0"
#endif

namespace dbbid::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

struct Common {
  std::uint64_t seed = 1;
  std::size_t epochs = 100;
  double step0 = SgdOptions{}.step0;
  int epochs_sgd = SgdOptions{}.epochs;
  double alpha0 = SgdOptions{}.initial_alpha;
  std::optional<double> bid_cap;
  std::string out_dir = "out";
};

// Written before any output with complete = false and rewritten at the end.
class Manifest {
 public:
  Manifest(std::string command, const Common& common, std::string config_path,
           std::map<std::string, bool> explicit_flags)
      : dir_(common.out_dir), start_(std::chrono::steady_clock::now()) {
    j_["command"] = std::move(command);
    j_["config_path"] = config_path.empty() ? Json(nullptr) : Json(config_path);
    j_["seed"] = common.seed;
    j_["out_dir"] = common.out_dir;
    j_["version"] = DBBID_VERSION;
    Json flags;
    flags["seed"] = common.seed;
    flags["epochs"] = common.epochs;
    flags["step0"] = common.step0;
    flags["epochs_sgd"] = common.epochs_sgd;
    flags["alpha0"] = common.alpha0;
    flags["bid_cap"] = common.bid_cap ? Json(*common.bid_cap) : Json(nullptr);
    j_["flags"] = std::move(flags);
    Json given = Json::array();
    for (const auto& [name, set] : explicit_flags) {
      if (set) given.push_back(name);
    }
    j_["flags_given"] = std::move(given);
    j_["outputs"] = Json::array();
    j_["wall_time_seconds"] = 0.0;
    j_["complete"] = false;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(Errc::kIo, "cannot create " + dir_.string() + ": " + ec.message());
    write();
  }

  void set_seed(std::uint64_t seed) { j_["seed"] = seed; }

  fs::path output(const std::string& name) {
    j_["outputs"].push_back(name);
    return dir_ / name;
  }

  void finish() {
    j_["complete"] = true;
    stamp();
    write();
  }

  void fail(const std::string& message) {
    j_["complete"] = false;
    j_["error"] = message;
    stamp();
    write();
  }

 private:
  void stamp() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    j_["wall_time_seconds"] = dt.count();
  }
  void write() const { io::write_json_file(dir_ / "manifest.json", j_); }

  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  Json j_;
};

void apply_bid_cap(DspInstance& instance, const Common& common) {
  if (common.bid_cap) {
    instance.bid_cap = *common.bid_cap;
    validate(instance);
  }
}

DspInstance load_instance(const std::string& path, const Common& common) {
  DspInstance instance = io::instance_from_json(io::read_json_file(path));
  apply_bid_cap(instance, common);
  return instance;
}

SgdOptions sgd_options(const Common& common) {
  if (!(common.step0 > 0.0)) throw Error(Errc::kInvalidConfig, "--step0 must be > 0");
  if (common.epochs_sgd < 0) throw Error(Errc::kInvalidConfig, "--epochs-sgd must be >= 0");
  if (!(common.alpha0 >= 0.0)) throw Error(Errc::kInvalidConfig, "--alpha0 must be >= 0");
  SgdOptions o;
  o.step0 = common.step0;
  o.epochs = common.epochs_sgd;
  o.shuffle_seed = common.seed;
  o.initial_alpha = common.alpha0;
  return o;
}

double relative_gap(double primal, double dual) {
  const double diff = std::fabs(primal - dual);
  if (dual == 0.0) return diff == 0.0 ? 0.0 : diff / std::max(1.0, std::fabs(primal));
  return diff / std::fabs(dual);
}

struct SolveOutcome {
  DualState state;
  SimReport report;
};

SolveOutcome solve_instance(const DspInstance& instance, const Common& common) {
  const DspChoiceModel model(instance);
  SolveOutcome out;
  out.state = sgd_solve(model, sgd_options(common));
  out.report = run_expectation(instance, out.state.alpha);
  return out;
}

Json solve_summary(const DspInstance& instance, const SolveOutcome& s, const Common& common) {
  Json j;
  j["seed"] = common.seed;
  j["n_impressions"] = instance.impressions.size();
  j["num_constraints"] = instance.num_constraints();
  j["primal_value"] = s.report.primal_value;
  j["dual_value"] = s.report.dual_value;
  j["gap"] = s.report.dual_value - s.report.primal_value;
  j["relative_gap"] = relative_gap(s.report.primal_value, s.report.dual_value);
  j["alpha"] = s.state.alpha;
  Json sgd;
  sgd["step0"] = common.step0;
  sgd["epochs"] = common.epochs_sgd;
  sgd["initial_alpha"] = common.alpha0;
  sgd["iterations"] = s.state.iterations;
  j["sgd"] = std::move(sgd);
  j["constraints"] = Json::array();
  for (const auto& row : s.report.per_constraint) {
    Json r;
    r["k"] = row.k;
    r["limit"] = row.limit;
    r["consumption"] = row.consumption;
    r["surplus"] = row.surplus;
    r["alpha"] = row.alpha;
    j["constraints"].push_back(std::move(r));
  }
  return j;
}

void write_solve_outputs(Manifest& m, const SolveOutcome& s) {
  io::write_json_file(m.output("alpha.json"), io::to_json(s.state));
  io::write_text_file(m.output("constraints.csv"), io::constraints_csv(s.report.per_constraint));
  io::write_text_file(m.output("decisions.csv"), io::decisions_csv(s.report.decisions));
}

// db_fixed without an explicit alpha vector runs on the solved dual prices.
void resolve_fixed_alpha(std::vector<StrategyConfig>& configs, const DspInstance& instance,
                         const std::optional<std::vector<double>>& alpha, const Common& common) {
  std::optional<std::vector<double>> solved = alpha;
  for (auto& c : configs) {
    if (c.kind != StrategyKind::kDbFixed || !c.alpha.empty()) continue;
    if (!solved) solved = sgd_solve(DspChoiceModel(instance), sgd_options(common)).alpha;
    c.alpha = *solved;
  }
}

std::string strategy_label(const StrategyConfig& c) {
  return c.label.value_or(std::string(to_string(c.kind)));
}

void check_labels(const std::vector<StrategyConfig>& configs) {
  std::set<std::string> seen;
  for (const auto& c : configs) {
    const std::string label = strategy_label(c);
    if (label.empty() || label.find_first_of("/\\") != std::string::npos) {
      throw Error(Errc::kInvalidConfig, "strategy label '" + label + "' is not a file name");
    }
    if (!seen.insert(label).second) {
      throw Error(Errc::kInvalidConfig, "duplicate strategy label '" + label + "'");
    }
  }
}

Json strategy_summary(const StrategyRun& run, const StrategyConfig& config,
                      const DspInstance& instance, const std::string& file) {
  const std::optional<double> target =
      config.target_roi ? config.target_roi : instance_target_roi(instance);
  double cost = 0.0;
  std::size_t wins = 0;
  std::size_t bids = 0;
  double deviation = 0.0;
  std::size_t active = 0;
  for (const auto& e : run.epochs) {
    cost += e.cost;
    wins += e.wins;
    bids += e.bids;
    if (target && e.cost > 0.0) {
      deviation += std::fabs(e.actual_roi - *target);
      ++active;
    }
  }
  Json j;
  j["name"] = run.name;
  j["strategy"] = to_string(config.kind);
  j["epochs_file"] = file;
  j["target_roi"] = target ? Json(*target) : Json(nullptr);
  j["total_revenue"] = total_revenue(run);
  j["total_cost"] = cost;
  j["aggregate_roi"] = aggregate_roi(run);
  j["bids"] = bids;
  j["wins"] = wins;
  j["mean_abs_roi_deviation"] =
      active > 0 ? Json(deviation / static_cast<double>(active)) : Json(nullptr);
  j["final_parameter"] = run.epochs.empty() ? 0.0 : run.epochs.back().parameter;
  j["flagged_updates"] = run.flagged_updates;
  return j;
}

Json simulate_all(Manifest& m, const DspInstance& instance,
                  const std::vector<StrategyConfig>& configs, const Common& common,
                  bool single_file) {
  if (common.epochs < 1) throw Error(Errc::kInvalidConfig, "--epochs must be >= 1");
  check_labels(configs);
  std::vector<StrategyRun> runs;
  if (configs.size() == 1) {
    auto strategy = make_strategy(configs.front(), instance);
    runs.push_back(run_monte_carlo(instance, *strategy, common.epochs, common.seed)
                       .per_strategy.front());
  } else {
    runs = compare_strategies(instance, configs, common.epochs, common.seed).per_strategy;
  }
  Json j;
  j["seed"] = common.seed;
  j["epochs"] = common.epochs;
  j["n_impressions"] = instance.impressions.size();
  j["strategies"] = Json::array();
  for (std::size_t s = 0; s < runs.size(); ++s) {
    const std::string file =
        single_file ? std::string("epochs.csv") : "epochs_" + strategy_label(configs[s]) + ".csv";
    io::write_text_file(m.output(file), io::epochs_csv(runs[s], instance.num_constraints()));
    j["strategies"].push_back(strategy_summary(runs[s], configs[s], instance, file));
  }
  return j;
}

std::vector<StrategyConfig> strategies_from_json(const Json& j) {
  const Json* list = &j;
  if (j.is_object() && j.contains("strategies")) list = &j["strategies"];
  std::vector<StrategyConfig> out;
  if (list->is_array()) {
    for (const auto& item : *list) out.push_back(io::strategy_config_from_json(item));
  } else {
    out.push_back(io::strategy_config_from_json(*list));
  }
  if (out.empty()) throw Error(Errc::kInvalidConfig, "no strategies configured");
  return out;
}

std::vector<StrategyConfig> strategies_from_names(const std::vector<std::string>& names) {
  std::vector<StrategyConfig> out;
  for (const auto& n : names) {
    StrategyConfig c;
    c.kind = strategy_kind_from_string(n);
    out.push_back(c);
  }
  return out;
}

Json with_command(const char* command, Json body) {
  Json j;
  j["command"] = command;
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

// Numeric config values honour command-line flags that were given
// explicitly.
void merge_run_config(const Json& config, Common& common, const CLI::App& app) {
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  const std::string where = "run config";
  auto number = [&](const char* key) {
    if (!config[key].is_number()) throw Error(Errc::kParse, where + "." + key + ": expected a number");
    return config[key].get<double>();
  };
  auto integer = [&](const char* key) {
    if (!config[key].is_number_integer() || config[key].get<std::int64_t>() < 0) {
      throw Error(Errc::kParse, where + "." + key + ": expected a nonnegative integer");
    }
    return config[key].get<std::uint64_t>();
  };
  if (config.contains("seed") && !given("--seed")) common.seed = integer("seed");
  if (config.contains("epochs") && !given("--epochs")) common.epochs = integer("epochs");
  if (config.contains("step0") && !given("--step0")) common.step0 = number("step0");
  if (config.contains("epochs_sgd") && !given("--epochs-sgd")) {
    common.epochs_sgd = static_cast<int>(integer("epochs_sgd"));
  }
  if (config.contains("alpha0") && !given("--alpha0")) common.alpha0 = number("alpha0");
  if (config.contains("bid_cap") && !given("--bid-cap")) common.bid_cap = number("bid_cap");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Common common;
  CLI::App app{"Dual based bidding: instance generation, dual solving, simulation"};
  app.set_version_flag("--version", DBBID_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", common.seed, "Seed for instance draws, SGD shuffling and auctions")
      ->capture_default_str();
  app.add_option("--epochs", common.epochs, "Monte-Carlo epochs (feedback windows)")
      ->capture_default_str();
  app.add_option("--step0", common.step0, "SGD step0 in step0 / sqrt(1 + t / N)")
      ->capture_default_str();
  app.add_option("--epochs-sgd", common.epochs_sgd, "SGD passes over the impressions")
      ->capture_default_str();
  app.add_option("--alpha0", common.alpha0, "Initial dual price for every constraint")
      ->capture_default_str();
  app.add_option("--bid-cap", common.bid_cap, "Override the instance bid cap");
  app.add_option("--out-dir", common.out_dir, "Output directory (one manifest per directory)")
      ->capture_default_str();

  auto* gen = app.add_subcommand("gen", "Generate a mock instance");
  std::string gen_config;
  std::string gen_objective = "revenue";
  std::optional<std::size_t> gen_n;
  gen->add_option("--config", gen_config, "Mock config JSON (defaults apply to missing fields)");
  gen->add_option("--objective", gen_objective, "revenue or performance, without --config")
      ->capture_default_str();
  gen->add_option("--n", gen_n, "Number of impressions");

  auto* solve = app.add_subcommand("solve", "Solve the dual by SGD and evaluate the bids");
  std::string instance_path;
  solve->add_option("--instance", instance_path, "Instance JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo run of one strategy");
  std::string strategy_path;
  std::string strategy_name;
  std::string alpha_path;
  simulate->add_option("--instance", instance_path, "Instance JSON")->required();
  auto* sim_file = simulate->add_option("--strategy", strategy_path, "Strategy config JSON");
  simulate->add_option("--strategy-name", strategy_name,
                       "lin, ortb, db_single, db_multi or db_fixed")
      ->excludes(sim_file);
  simulate->add_option("--alpha", alpha_path, "Dual state JSON for db_fixed");

  auto* compare = app.add_subcommand("compare", "Monte-Carlo comparison on a shared stream");
  std::string strategies_path;
  std::vector<std::string> strategy_names;
  compare->add_option("--instance", instance_path, "Instance JSON")->required();
  auto* cmp_file =
      compare->add_option("--strategies", strategies_path, "JSON list of strategy configs");
  compare->add_option("--strategy-name", strategy_names, "Strategy kind, repeatable")
      ->excludes(cmp_file);
  compare->add_option("--alpha", alpha_path, "Dual state JSON for db_fixed");

  auto* fit = app.add_subcommand("fit", "Fit a landscape to won and lost auctions");
  std::string observations_path;
  std::string model = "lognormal";
  double mu0 = 0.0;
  double sigma0 = 1.0;
  fit->add_option("--observations", observations_path, "CSV outcome,bid_price,paid_cost")
      ->required();
  fit->add_option("--model", model, "lognormal, ortb or both")->capture_default_str();
  fit->add_option("--mu0", mu0, "Initial mu")->capture_default_str();
  fit->add_option("--sigma0", sigma0, "Initial sigma")->capture_default_str();

  auto* run_cmd = app.add_subcommand("run", "One-shot pipeline from a config file");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "Pipeline config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  std::optional<Manifest> manifest;
  auto flags_given = [&] {
    std::map<std::string, bool> given;
    for (const char* f : {"--seed", "--epochs", "--step0", "--epochs-sgd", "--alpha0",
                          "--bid-cap", "--out-dir"}) {
      given[f + 2] = app.count(f) > 0;
    }
    return given;
  };

  try {
    if (*gen) {
      manifest.emplace("gen", common, gen_config, flags_given());
      MockConfig config;
      if (!gen_config.empty()) {
        config = io::mock_config_from_json(io::read_json_file(gen_config));
      } else {
        config = default_mock_config(io::objective_kind_from_string(gen_objective));
      }
      if (app.count("--seed")) config.seed = common.seed;
      if (gen_n) config.n_impressions = *gen_n;
      if (common.bid_cap) config.bid_cap = *common.bid_cap;
      manifest->set_seed(config.seed);
      const DspInstance instance = gen_mock_instance(config);
      io::write_json_file(manifest->output("instance.json"), io::to_json(instance));
      io::write_json_file(manifest->output("mock_config.json"), io::to_json(config));
      out << "wrote " << instance.impressions.size() << " impressions to "
          << (fs::path(common.out_dir) / "instance.json").string() << "\n";
    } else if (*solve) {
      manifest.emplace("solve", common, instance_path, flags_given());
      const DspInstance instance = load_instance(instance_path, common);
      const SolveOutcome s = solve_instance(instance, common);
      write_solve_outputs(*manifest, s);
      const Json summary = with_command("solve", solve_summary(instance, s, common));
      io::write_json_file(manifest->output("summary.json"), summary);
      out << "primal " << io::format_number(s.report.primal_value) << " dual "
          << io::format_number(s.report.dual_value) << " relative gap "
          << io::format_number(summary["relative_gap"].get<double>()) << "\n";
    } else if (*simulate || *compare) {
      const bool single = static_cast<bool>(*simulate);
      const std::string config_path = single ? strategy_path : strategies_path;
      manifest.emplace(single ? "simulate" : "compare", common,
                       config_path.empty() ? instance_path : config_path, flags_given());
      const DspInstance instance = load_instance(instance_path, common);
      std::vector<StrategyConfig> configs;
      if (!config_path.empty()) {
        configs = strategies_from_json(io::read_json_file(config_path));
      } else if (single && !strategy_name.empty()) {
        configs = strategies_from_names({strategy_name});
      } else if (!single && !strategy_names.empty()) {
        configs = strategies_from_names(strategy_names);
      } else {
        throw Error(Errc::kInvalidConfig, "no strategy given");
      }
      if (single && configs.size() != 1) {
        throw Error(Errc::kInvalidConfig, "simulate runs exactly one strategy; use compare");
      }
      if (!single && configs.size() < 2) {
        throw Error(Errc::kInvalidConfig, "comparison needs at least two strategies");
      }
      std::optional<std::vector<double>> alpha;
      if (!alpha_path.empty()) alpha = io::dual_state_from_json(io::read_json_file(alpha_path)).alpha;
      resolve_fixed_alpha(configs, instance, alpha, common);
      const Json body = simulate_all(*manifest, instance, configs, common, single);
      io::write_json_file(manifest->output("summary.json"),
                          with_command(single ? "simulate" : "compare", body));
      for (const auto& s : body["strategies"]) {
        out << s["name"].get<std::string>() << ": revenue "
            << io::format_number(s["total_revenue"].get<double>()) << " roi "
            << io::format_number(s["aggregate_roi"].get<double>()) << "\n";
      }
    } else if (*fit) {
      manifest.emplace("fit", common, observations_path, flags_given());
      const auto obs = io::read_observations_csv(observations_path);
      Json j;
      j["command"] = "fit";
      j["n_observations"] = obs.size();
      if (model != "lognormal" && model != "ortb" && model != "both") {
        throw Error(Errc::kInvalidConfig, "--model must be lognormal, ortb or both");
      }
      if (model == "lognormal" || model == "both") {
        const LandscapePrior init{mu0, sigma0};
        validate(init);
        const FitResult r = fit_censored(obs, init);
        j["lognormal"] = io::to_json(r);
        out << "mu " << io::format_number(r.prior.mu) << " sigma "
            << io::format_number(r.prior.sigma) << (r.converged ? "" : " (not converged)")
            << "\n";
      }
      if (model == "ortb" || model == "both") {
        const OrtbFitResult r = ortb_fit_c(obs);
        j["ortb"] = io::to_json(r);
        out << "c " << io::format_number(r.c) << "\n";
      }
      io::write_json_file(manifest->output("fit.json"), j);
    } else if (*run_cmd) {
      const Json config = io::read_json_file(run_config);
      if (!config.is_object()) throw Error(Errc::kParse, "run config: expected an object");
      merge_run_config(config, common, app);
      manifest.emplace("run", common, run_config, flags_given());
      const fs::path base = fs::path(run_config).parent_path();
      DspInstance instance;
      if (config.contains("instance") && config.contains("mock")) {
        throw Error(Errc::kInvalidConfig, "run config names both 'instance' and 'mock'");
      }
      if (config.contains("instance")) {
        if (!config["instance"].is_string()) {
          throw Error(Errc::kParse, "run config.instance: expected a path");
        }
        fs::path p = config["instance"].get<std::string>();
        if (p.is_relative()) p = base / p;
        instance = load_instance(p.string(), common);
      } else {
        MockConfig mock = io::mock_config_from_json(config.value("mock", Json::object()));
        if (!config.contains("mock") || !config["mock"].contains("seed")) mock.seed = common.seed;
        if (common.bid_cap) mock.bid_cap = *common.bid_cap;
        instance = gen_mock_instance(mock);
        io::write_json_file(manifest->output("instance.json"), io::to_json(instance));
      }
      Json summary;
      summary["command"] = "run";
      summary["seed"] = common.seed;
      summary["solve"] = nullptr;
      summary["simulation"] = nullptr;
      std::optional<std::vector<double>> alpha;
      if (config.value("solve", true)) {
        const SolveOutcome s = solve_instance(instance, common);
        write_solve_outputs(*manifest, s);
        summary["solve"] = solve_summary(instance, s, common);
        alpha = s.state.alpha;
      }
      if (config.contains("strategies")) {
        std::vector<StrategyConfig> configs = strategies_from_json(config["strategies"]);
        resolve_fixed_alpha(configs, instance, alpha, common);
        summary["simulation"] = simulate_all(*manifest, instance, configs, common, false);
      }
      io::write_json_file(manifest->output("summary.json"), summary);
      out << "wrote " << common.out_dir << "\n";
    }
    manifest->finish();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (manifest) {
      try {
        manifest->fail(e.what());
      } catch (const Error&) {
      }
    }
    return is_numeric(e.code()) ? kExitNumeric : kExitInput;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    if (manifest) manifest->fail(e.what());
    return kExitInput;
  }
}

}  // namespace dbbid::cli
