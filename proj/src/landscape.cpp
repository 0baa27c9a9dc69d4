#include "dbbid/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dbbid/error.hpp"

namespace dbbid {
namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

// log(1 - Phi(z)), stable in the far right tail.
double log_normal_survival(double z) {
  if (z < 30.0) {
    return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  }
  const double inv2 = 1.0 / (z * z);
  return -0.5 * z * z - std::log(z) - kLogSqrtTwoPi +
         std::log1p(-inv2 + 3.0 * inv2 * inv2);
}

// phi(z) / (1 - Phi(z)).
double normal_hazard(double z) {
  return std::exp(-0.5 * z * z - kLogSqrtTwoPi - log_normal_survival(z));
}

struct Objective {
  double value = 0.0;  // mean log-likelihood
  double d_mu = 0.0;
  double d_log_sigma = 0.0;

  double gradient_norm() const { return std::hypot(d_mu, d_log_sigma); }
};

Objective evaluate_mean(std::span<const BidObservation> observations, double mu,
                        double log_sigma) {
  const double sigma = std::exp(log_sigma);
  Objective out;
  for (const auto& obs : observations) {
    if (obs.outcome == Outcome::kWon) {
      const double log_x = std::log(*obs.paid_cost);
      const double z = (log_x - mu) / sigma;
      out.value += -log_x - log_sigma - kLogSqrtTwoPi - 0.5 * z * z;
      out.d_mu += z / sigma;
      out.d_log_sigma += z * z - 1.0;
    } else {
      if (obs.bid_price <= 0.0) continue;  // survival is 1, no information
      const double z = (std::log(obs.bid_price) - mu) / sigma;
      const double h = normal_hazard(z);
      out.value += log_normal_survival(z);
      out.d_mu += h / sigma;
      out.d_log_sigma += h * z;
    }
  }
  const double n = static_cast<double>(observations.size());
  out.value /= n;
  out.d_mu /= n;
  out.d_log_sigma /= n;
  return out;
}

}  // namespace

void validate(const LandscapePrior& prior) {
  if (!std::isfinite(prior.mu) || !std::isfinite(prior.sigma) || prior.sigma <= 0.0) {
    throw Error(Errc::kInvalidRange,
                "landscape prior needs finite mu and sigma > 0 (got mu=" +
                    std::to_string(prior.mu) + ", sigma=" + std::to_string(prior.sigma) +
                    ")");
  }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z - kLogSqrtTwoPi); }

double pdf(const LandscapePrior& prior, double x) {
  if (x <= 0.0) return 0.0;
  const double z = (std::log(x) - prior.mu) / prior.sigma;
  return normal_pdf(z) / (prior.sigma * x);
}

double win_prob(const LandscapePrior& prior, double bp) {
  if (bp <= 0.0) return 0.0;
  if (std::isinf(bp)) return 1.0;
  return normal_cdf((std::log(bp) - prior.mu) / prior.sigma);
}

double expected_cost(const LandscapePrior& prior, double bp) {
  if (bp <= 0.0) return 0.0;
  if (std::isinf(bp)) return mean(prior);
  const double s2 = prior.sigma * prior.sigma;
  return mean(prior) * normal_cdf((std::log(bp) - prior.mu - s2) / prior.sigma);
}

double mean(const LandscapePrior& prior) {
  return std::exp(prior.mu + 0.5 * prior.sigma * prior.sigma);
}

void validate(const BidObservation& obs) {
  if (!std::isfinite(obs.bid_price) || obs.bid_price < 0.0) {
    throw Error(Errc::kInvalidObservation, "bid_price must be finite and >= 0");
  }
  if (obs.outcome == Outcome::kWon) {
    if (!obs.paid_cost) {
      throw Error(Errc::kInvalidObservation, "won observation without paid_cost");
    }
    if (!std::isfinite(*obs.paid_cost) || *obs.paid_cost < 0.0 ||
        *obs.paid_cost > obs.bid_price) {
      throw Error(Errc::kInvalidObservation, "paid_cost must lie in [0, bid_price]");
    }
  } else if (obs.paid_cost) {
    throw Error(Errc::kInvalidObservation, "lost observation carries a paid_cost");
  }
}

double censored_log_likelihood(std::span<const BidObservation> observations,
                               const LandscapePrior& prior) {
  double total = 0.0;
  for (const auto& obs : observations) {
    if (obs.outcome == Outcome::kWon) {
      const double x = *obs.paid_cost;
      if (x <= 0.0) return -std::numeric_limits<double>::infinity();
      const double z = (std::log(x) - prior.mu) / prior.sigma;
      total += -std::log(x) - std::log(prior.sigma) - kLogSqrtTwoPi - 0.5 * z * z;
    } else if (obs.bid_price > 0.0) {
      total += log_normal_survival((std::log(obs.bid_price) - prior.mu) / prior.sigma);
    }
  }
  return total;
}

FitResult fit_censored(std::span<const BidObservation> observations,
                       const LandscapePrior& init, const FitOptions& options) {
  if (observations.empty()) {
    throw Error(Errc::kEmptyObservations, "no observations to fit");
  }
  bool any_win = false;
  for (const auto& obs : observations) {
    validate(obs);
    if (obs.outcome == Outcome::kWon) {
      if (*obs.paid_cost <= 0.0) {
        throw Error(Errc::kInvalidObservation,
                    "log-normal fit needs paid_cost > 0 for won auctions");
      }
      any_win = true;
    }
  }
  if (!any_win) {
    throw Error(Errc::kNoWinObservations,
                "location is unidentifiable from lost auctions alone");
  }
  validate(init);

  double mu = init.mu;
  double log_sigma = std::log(init.sigma);
  Objective current = evaluate_mean(observations, mu, log_sigma);
  double step = 1.0;
  FitResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double gnorm = current.gradient_norm();
    if (gnorm < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    const double g2 = gnorm * gnorm;
    bool accepted = false;
    while (step > 1e-20) {
      const double cand_mu = mu + step * current.d_mu;
      const double cand_ls = log_sigma + step * current.d_log_sigma;
      const Objective cand = evaluate_mean(observations, cand_mu, cand_ls);
      const bool armijo = cand.value >= current.value + 1e-4 * step * g2;
      // Near the optimum the ascent is below the rounding noise of the mean;
      // fall back to accepting steps that shrink the gradient.
      const bool noise_floor =
          cand.value >= current.value - 1e-14 * (1.0 + std::abs(current.value)) &&
          cand.gradient_norm() < gnorm;
      if (std::isfinite(cand.value) && (armijo || noise_floor)) {
        mu = cand_mu;
        log_sigma = cand_ls;
        current = cand;
        step = std::min(step * 2.0, 1e3);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no progress possible at machine precision
  }
  result.prior = {mu, std::exp(log_sigma)};
  result.iterations = iter;
  result.gradient_norm = current.gradient_norm();
  if (!result.converged && result.gradient_norm < options.gradient_tolerance) {
    result.converged = true;
  }
  result.log_likelihood = censored_log_likelihood(observations, result.prior);
  return result;
}

}  // namespace dbbid
