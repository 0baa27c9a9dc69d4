#pragma once

// Bidding landscape: distribution of the highest competing bid for one
// impression, modelled as log-normal. Everything downstream touches the
// distribution only through pdf / win_prob / expected_cost / mean.

#include <cstddef>
#include <optional>
#include <span>

namespace dbbid {

struct LandscapePrior {
  double mu = 0.0;     // location of ln(x)
  double sigma = 1.0;  // scale of ln(x), > 0
};

// Throws Error(kInvalidRange) unless mu is finite and sigma is finite and > 0.
void validate(const LandscapePrior& prior);

// Standard normal CDF and density.
double normal_cdf(double z);
double normal_pdf(double z);

// Density of the competing bid at x >= 0 (0 at x = 0).
double pdf(const LandscapePrior& prior, double x);

// Probability of winning with bid bp: P(competing bid < bp).
double win_prob(const LandscapePrior& prior, double bp);

// Expected second-price payment with bid bp, i.e. the partial first moment
// E[x; x < bp] = exp(mu + sigma^2/2) * Phi((ln bp - mu - sigma^2) / sigma).
double expected_cost(const LandscapePrior& prior, double bp);

double mean(const LandscapePrior& prior);

enum class Outcome { kWon, kLost };

struct BidObservation {
  Outcome outcome = Outcome::kLost;
  double bid_price = 0.0;
  std::optional<double> paid_cost;  // set iff outcome == kWon

  static BidObservation won(double bid_price, double paid_cost) {
    return {Outcome::kWon, bid_price, paid_cost};
  }
  static BidObservation lost(double bid_price) {
    return {Outcome::kLost, bid_price, std::nullopt};
  }
};

// Throws Error(kInvalidObservation) when the observation breaks its
// invariants (negative price, cost above bid, cost presence mismatch).
void validate(const BidObservation& obs);

struct FitOptions {
  // Applied to the gradient of the per-observation mean log-likelihood.
  double gradient_tolerance = 1e-8;
  int max_iterations = 10000;
};

struct FitResult {
  LandscapePrior prior;
  bool converged = false;  // false: iteration cap hit, best iterate returned
  int iterations = 0;
  double log_likelihood = 0.0;  // total, not averaged
  double gradient_norm = 0.0;
};

// Won observations contribute log pdf(paid_cost), lost ones
// log(1 - CDF(bid_price)).
double censored_log_likelihood(std::span<const BidObservation> observations,
                               const LandscapePrior& prior);

// Maximum-likelihood (mu, sigma) from a mix of won and lost auctions.
// Gradient ascent with backtracking on (mu, log sigma).
// Throws kEmptyObservations, kNoWinObservations or kInvalidObservation.
// A won observation must have paid_cost > 0 (log pdf is -inf at 0).
FitResult fit_censored(std::span<const BidObservation> observations,
                       const LandscapePrior& init, const FitOptions& options = {});

}  // namespace dbbid
