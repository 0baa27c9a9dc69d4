#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "dbbid/error.hpp"
#include "dbbid/landscape.hpp"
#include "../oracles.hpp"

using namespace dbbid;

namespace {

std::vector<double> lognormal_sample(double mu, double sigma, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> out(n);
  for (double& x : out) x = std::exp(mu + sigma * z(rng));
  return out;
}

}  // namespace

TEST_CASE("pdf values") {
  CHECK(pdf({0.0, 1.0}, 0.0) == 0.0);
  CHECK(pdf({0.0, 1.0}, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
  // Central difference of the CDF.
  const LandscapePrior p{0.5, 0.25};
  const double x = std::exp(0.5);
  const double h = 1e-5;
  const double fd = (win_prob(p, x + h) - win_prob(p, x - h)) / (2.0 * h);
  CHECK(pdf(p, x) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("win_prob values") {
  CHECK(win_prob({0.0, 1.0}, 0.0) == 0.0);
  CHECK(win_prob({0.0, 1.0}, 1.0) == doctest::Approx(0.5));
  CHECK(win_prob({1.0, 0.5}, 3.0) == doctest::Approx(oracle::win_prob(1.0, 0.5, 3.0)).epsilon(1e-10));
  CHECK(win_prob({0.0, 1.0}, 1e12) == doctest::Approx(1.0));
}

TEST_CASE("expected_cost values") {
  CHECK(expected_cost({0.0, 1.0}, 0.0) == 0.0);
  CHECK(expected_cost({0.0, 1.0}, 1e12) == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  CHECK(oracle::expected_cost(0.0, 1.0, 1e6) == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
  CHECK(expected_cost({0.0, 1.0}, 1.0) ==
        doctest::Approx(oracle::expected_cost(0.0, 1.0, 1.0)).epsilon(1e-10));
}

TEST_CASE("mean") {
  CHECK(mean({0.0, 1.0}) == doctest::Approx(oracle::expected_cost(0.0, 1.0, 1e6)).epsilon(1e-9));
  CHECK(mean({0.0, 1e-9}) == doctest::Approx(1.0));
  CHECK(mean({std::log(2.0), 1e-9}) == doctest::Approx(2.0));
}

TEST_CASE("pdf integrates to one") {
  for (const LandscapePrior p : {LandscapePrior{0.0, 1.0}, LandscapePrior{-3.0, 0.3},
                                 LandscapePrior{2.0, 1.5}}) {
    // In log space; the linear-space mass of sigma = 1.5 is too spread out.
    auto f = [&](double u) { return pdf(p, std::exp(u)) * std::exp(u); };
    const double total = oracle::integrate(f, p.mu - 40.0 * p.sigma, p.mu) +
                         oracle::integrate(f, p.mu, p.mu + 40.0 * p.sigma);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("closed forms against quadrature on a random grid") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    const double mu = oracle::uniform(rng, -4.0, 2.0);
    const double sigma = oracle::uniform(rng, 0.1, 1.5);
    const double bp = std::exp(mu + sigma * oracle::uniform(rng, -3.0, 3.0));
    const LandscapePrior p{mu, sigma};
    CHECK(std::fabs(win_prob(p, bp) - oracle::win_prob(mu, sigma, bp)) <= 1e-8);
    CHECK(oracle::rel_err(expected_cost(p, bp), oracle::expected_cost(mu, sigma, bp)) <= 1e-6);
  }
}

TEST_CASE("monotone in the bid price") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const LandscapePrior p{oracle::uniform(rng, -4.0, 2.0), oracle::uniform(rng, 0.05, 2.0)};
    const double a = oracle::uniform(rng, 0.0, 10.0);
    const double b = a + oracle::uniform(rng, 0.0, 10.0);
    CHECK(win_prob(p, a) <= win_prob(p, b));
    CHECK(expected_cost(p, a) <= expected_cost(p, b));
  }
}

TEST_CASE("prior validation") {
  CHECK_THROWS_AS(validate(LandscapePrior{0.0, 0.0}), Error);
  CHECK_THROWS_AS(validate(LandscapePrior{NAN, 1.0}), Error);
  CHECK_NOTHROW(validate(LandscapePrior{-1.0, 0.2}));
}

TEST_CASE("observation validation") {
  CHECK_NOTHROW(validate(BidObservation::won(1.0, 0.5)));
  CHECK_THROWS_AS(validate(BidObservation::won(1.0, 1.5)), Error);
  CHECK_THROWS_AS(validate(BidObservation::lost(-1.0)), Error);
  BidObservation bad = BidObservation::lost(1.0);
  bad.paid_cost = 0.2;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("fit errors") {
  std::vector<BidObservation> none;
  try {
    fit_censored(none, {0.0, 1.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kEmptyObservations);
  }
  std::vector<BidObservation> lost{BidObservation::lost(1.0), BidObservation::lost(2.0)};
  try {
    fit_censored(lost, {0.0, 1.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kNoWinObservations);
  }
  std::vector<BidObservation> zero_cost{BidObservation::won(1.0, 0.0)};
  CHECK_THROWS_AS(fit_censored(zero_cost, {0.0, 1.0}), Error);
}

TEST_CASE("uncensored fit equals the analytic MLE") {
  const auto xs = lognormal_sample(0.3, 0.8, 10000, 21);
  std::vector<BidObservation> obs;
  double s1 = 0.0;
  for (double x : xs) {
    obs.push_back(BidObservation::won(x * 1.5, x));
    s1 += std::log(x);
  }
  const double mu_hat = s1 / static_cast<double>(xs.size());
  double s2 = 0.0;
  for (double x : xs) s2 += (std::log(x) - mu_hat) * (std::log(x) - mu_hat);
  const double sigma_hat = std::sqrt(s2 / static_cast<double>(xs.size()));

  const FitResult r = fit_censored(obs, {0.0, 1.0});
  CHECK(r.converged);
  CHECK(std::fabs(r.prior.mu - mu_hat) <= 1e-6);
  CHECK(std::fabs(r.prior.sigma - sigma_hat) <= 1e-6);
  CHECK(std::fabs(r.prior.mu - 0.3) <= 0.05);
  CHECK(std::fabs(r.prior.sigma - 0.8) <= 0.05);
}

TEST_CASE("censored fit recovers the generator") {
  // Bids at the generator median censor half the sample.
  const double mu = 0.3;
  const double sigma = 0.8;
  const auto xs = lognormal_sample(mu, sigma, 20000, 33);
  std::mt19937_64 rng(34);
  std::vector<BidObservation> obs;
  std::size_t lost = 0;
  for (double x : xs) {
    const double bid = std::exp(mu + oracle::uniform(rng, -1.0, 1.0));
    if (bid > x) {
      obs.push_back(BidObservation::won(bid, x));
    } else {
      obs.push_back(BidObservation::lost(bid));
      ++lost;
    }
  }
  const double share = static_cast<double>(lost) / static_cast<double>(obs.size());
  CHECK(std::fabs(share - 0.5) < 0.05);
  const FitResult r = fit_censored(obs, {0.0, 1.0});
  CHECK(r.converged);
  CHECK(std::fabs(r.prior.mu - mu) <= 0.1);
  CHECK(std::fabs(r.prior.sigma - sigma) <= 0.1);
  // The maximiser beats the truth.
  CHECK(r.log_likelihood >= censored_log_likelihood(obs, {mu, sigma}) - 1e-6);
  CHECK(r.log_likelihood == doctest::Approx(censored_log_likelihood(obs, r.prior)));
}

TEST_CASE("log-likelihood against a direct evaluation") {
  std::vector<BidObservation> obs{BidObservation::won(2.0, 1.2), BidObservation::lost(0.7),
                                  BidObservation::lost(3.0)};
  const LandscapePrior p{0.1, 0.9};
  const double want = std::log(oracle::lognormal_pdf(0.1, 0.9, 1.2)) +
                      std::log(1.0 - oracle::win_prob(0.1, 0.9, 0.7)) +
                      std::log(1.0 - oracle::win_prob(0.1, 0.9, 3.0));
  CHECK(censored_log_likelihood(obs, p) == doctest::Approx(want).epsilon(1e-10));
}
