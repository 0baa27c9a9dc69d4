#include "dbbid/mmkp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "dbbid/error.hpp"

namespace dbbid {
namespace {

struct Best {
  std::optional<std::size_t> user;
  double sub_choice = 0.0;
  double score = -std::numeric_limits<double>::infinity();
};

Best dominating_user(const ChoiceModel& model, std::size_t item,
                     std::span<const double> alpha, const DecideOptions& options) {
  Best best;
  std::vector<std::size_t> tied;
  for (std::size_t j = 0; j < model.num_users(); ++j) {
    const double s = model.best_score(item, j, alpha);
    if (!best.user || s > best.score) {
      best.user = j;
      best.score = s;
      tied.assign(1, j);
    } else if (s == best.score) {
      tied.push_back(j);
    }
  }
  if (options.tie_break == TieBreak::kRandom && tied.size() > 1) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(item)};
    std::mt19937_64 rng(seq);
    best.user = tied[std::uniform_int_distribution<std::size_t>(0, tied.size() - 1)(rng)];
  }
  if (best.user) best.sub_choice = model.best_subchoice(item, *best.user, alpha);
  return best;
}

}  // namespace

double ChoiceModel::best_score(std::size_t item, std::size_t user,
                               std::span<const double> alpha) const {
  return score_F(*this, item, user, best_subchoice(item, user, alpha), alpha);
}

double score_F(const ChoiceModel& model, std::size_t item, std::size_t user,
               double sub_choice, std::span<const double> alpha) {
  double f = model.gain(item, user, sub_choice);
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (alpha[k] != 0.0) f -= alpha[k] * model.consumption(item, user, k, sub_choice);
  }
  return f;
}

AllocationDecision decide(const ChoiceModel& model, std::size_t item,
                          std::span<const double> alpha, const DecideOptions& options) {
  const Best best = dominating_user(model, item, alpha, options);
  AllocationDecision out;
  out.best_score = best.score;
  if (best.user && best.score >= 0.0) {
    out.chosen_user = best.user;
    out.sub_choice = best.sub_choice;
  }
  return out;
}

double beta(const ChoiceModel& model, std::size_t item, std::span<const double> alpha) {
  double b = 0.0;
  for (std::size_t j = 0; j < model.num_users(); ++j) {
    b = std::max(b, model.best_score(item, j, alpha));
  }
  return b;
}

double dual_objective(const ChoiceModel& model, std::span<const double> alpha) {
  const auto limits = model.limits();
  double value = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) value += alpha[k] * limits[k];
  for (std::size_t i = 0; i < model.num_items(); ++i) value += beta(model, i, alpha);
  return value;
}

DualState sgd_solve(const ChoiceModel& model, const SgdOptions& options) {
  const std::size_t n = model.num_items();
  const std::size_t num_k = model.num_constraints();
  if (!(options.step0 > 0.0)) {
    throw Error(Errc::kInvalidConfig, "SGD step0 must be positive");
  }
  if (options.epochs < 0) {
    throw Error(Errc::kInvalidConfig, "SGD epochs must be >= 0");
  }

  DualState state;
  if (options.initial) {
    if (options.initial->size() != num_k) {
      throw Error(Errc::kInvalidConfig, "initial alpha has " +
                                            std::to_string(options.initial->size()) +
                                            " entries, expected " + std::to_string(num_k));
    }
    state.alpha = *options.initial;
  } else {
    state.alpha.assign(num_k, options.initial_alpha);
  }
  for (double& a : state.alpha) a = std::max(0.0, a);
  if (n == 0) return state;

  const auto limits = model.limits();
  const double initial_dual = dual_objective(model, state.alpha);
  state.dual_trace.push_back(initial_dual);
  const double blowup = options.divergence_factor * std::max(1.0, std::abs(initial_dual));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.shuffle_seed);
  const double inv_n = 1.0 / static_cast<double>(n);

  std::size_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t i : order) {
      const double eta =
          options.step0 / std::sqrt(1.0 + static_cast<double>(t) * inv_n);
      const Best best = dominating_user(model, i, state.alpha, {});
      const bool active = best.user && best.score > 0.0;
      for (std::size_t k = 0; k < num_k; ++k) {
        double g = limits[k] * inv_n;
        if (active) g -= model.consumption(i, *best.user, k, best.sub_choice);
        state.alpha[k] = std::max(0.0, state.alpha[k] - eta * g);
      }
      ++t;
    }
    const double value = dual_objective(model, state.alpha);
    state.dual_trace.push_back(value);
    if (!std::isfinite(value) || value > blowup) {
      state.iterations = t;
      throw Error(Errc::kDivergence,
                  "dual value " + std::to_string(value) + " after epoch " +
                      std::to_string(epoch) + " exceeds the divergence threshold; "
                      "reduce step0");
    }
  }
  state.iterations = t;
  return state;
}

PrimalValue primal_value_of_strategy(const ChoiceModel& model, std::span<const double> alpha,
                                     const DecideOptions& options) {
  PrimalValue out;
  out.consumption.assign(model.num_constraints(), 0.0);
  for (std::size_t i = 0; i < model.num_items(); ++i) {
    const AllocationDecision d = decide(model, i, alpha, options);
    if (!d.chosen_user) continue;
    out.objective += model.gain(i, *d.chosen_user, *d.sub_choice);
    for (std::size_t k = 0; k < out.consumption.size(); ++k) {
      out.consumption[k] += model.consumption(i, *d.chosen_user, k, *d.sub_choice);
    }
  }
  return out;
}

}  // namespace dbbid
