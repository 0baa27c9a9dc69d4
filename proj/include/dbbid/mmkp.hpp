#pragma once

// Augmented multi-choice multi-dimensional knapsack: N items, M users and K
// resources. Giving item i to user j with sub-choice v earns gain(i, j, v)
// and consumes consumption(i, j, k, v) of resource k, whose limit is B[k].
//
// For a dual price vector alpha >= 0 the score of a sub-choice is
//   F_ij(v; alpha) = gain - sum_k alpha[k] * consumption_k,
// each user proposes its best sub-choice, and the item goes to the user
// with the highest nonnegative best score.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dbbid {

class ChoiceModel {
 public:
  virtual ~ChoiceModel() = default;

  virtual std::size_t num_items() const = 0;
  virtual std::size_t num_users() const = 0;
  virtual std::size_t num_constraints() const = 0;
  virtual std::span<const double> limits() const = 0;

  virtual double gain(std::size_t item, std::size_t user, double sub_choice) const = 0;
  virtual double consumption(std::size_t item, std::size_t user, std::size_t k,
                             double sub_choice) const = 0;

  // argmax over sub-choices of F_ij(.; alpha).
  virtual double best_subchoice(std::size_t item, std::size_t user,
                                std::span<const double> alpha) const = 0;

  // Must equal score_F at best_subchoice; overridable for closed forms.
  virtual double best_score(std::size_t item, std::size_t user,
                            std::span<const double> alpha) const;
};

double score_F(const ChoiceModel& model, std::size_t item, std::size_t user,
               double sub_choice, std::span<const double> alpha);

enum class TieBreak { kLowestIndex, kRandom };

struct DecideOptions {
  TieBreak tie_break = TieBreak::kLowestIndex;
  std::uint64_t seed = 0;  // used by kRandom only
};

struct AllocationDecision {
  std::optional<std::size_t> chosen_user;  // set iff best_score >= 0
  std::optional<double> sub_choice;
  double best_score = 0.0;  // -inf when there are no users
};

AllocationDecision decide(const ChoiceModel& model, std::size_t item,
                          std::span<const double> alpha, const DecideOptions& options = {});

// max(0, max_j S_ij(alpha)).
double beta(const ChoiceModel& model, std::size_t item, std::span<const double> alpha);

// sum_k alpha[k] B[k] + sum_i beta_i(alpha).
double dual_objective(const ChoiceModel& model, std::span<const double> alpha);

struct DualState {
  std::vector<double> alpha;
  std::size_t iterations = 0;       // per-item SGD steps taken
  std::vector<double> dual_trace;   // dual value at start and after each epoch
};

struct SgdOptions {
  double step0 = 0.2;  // eta_t = step0 / sqrt(1 + t / N)
  int epochs = 1000;
  std::uint64_t shuffle_seed = 0;
  double initial_alpha = 1.0;
  std::optional<std::vector<double>> initial;  // overrides initial_alpha
  double divergence_factor = 1e6;
};

// Projected stochastic subgradient descent on sum_i G_i(alpha) with
// G_i = sum_k alpha[k] B[k] / N + beta_i(alpha). One step per item, items
// visited in a freshly shuffled order each epoch.
// Throws Error(kDivergence) when the dual value exceeds divergence_factor
// times max(1, |initial dual value|).
DualState sgd_solve(const ChoiceModel& model, const SgdOptions& options = {});

struct PrimalValue {
  double objective = 0.0;
  std::vector<double> consumption;
};

// Runs decide on every item and totals the chosen gains and consumptions.
PrimalValue primal_value_of_strategy(const ChoiceModel& model, std::span<const double> alpha,
                                     const DecideOptions& options = {});

}  // namespace dbbid
