#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dbbid/dsp.hpp"
#include "oracles.hpp"

namespace fixture {

// P4P instance with ads 1..m (cpp 1, 2, ...), priors and PPI drawn from
// moderate ranges.
inline dbbid::DspInstance p4p_instance(std::uint64_t seed, std::size_t n, std::size_t m,
                                       std::vector<dbbid::ConstraintSpec> constraints,
                                       dbbid::ObjectiveKind objective =
                                           dbbid::ObjectiveKind::kRevenue) {
  using namespace dbbid;
  std::mt19937_64 rng(seed);
  DspInstance inst;
  inst.mode = PaymentMode::kP4P;
  inst.objective = {PaymentMode::kP4P, objective};
  for (std::size_t j = 0; j < m; ++j) {
    inst.ads.push_back({static_cast<AdId>(j + 1), {1.0 + static_cast<double>(j), std::nullopt}});
  }
  inst.constraints = std::move(constraints);
  for (std::size_t i = 0; i < n; ++i) {
    Impression imp;
    imp.id = static_cast<std::int64_t>(i);
    imp.prior = {oracle::uniform(rng, -3.0, -1.5), oracle::uniform(rng, 0.3, 0.9)};
    for (std::size_t j = 0; j < m; ++j) imp.ppi.push_back(oracle::uniform(rng, 0.01, 0.1));
    inst.impressions.push_back(imp);
  }
  validate(inst);
  return inst;
}

inline std::vector<dbbid::AdId> all_ads(std::size_t m) {
  std::vector<dbbid::AdId> ids;
  for (std::size_t j = 0; j < m; ++j) ids.push_back(static_cast<dbbid::AdId>(j + 1));
  return ids;
}

}  // namespace fixture
