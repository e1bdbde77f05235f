// Conditional-error Monte Carlo: the average of Pe(rho z) over channel
// draws, with batch-means confidence intervals.
//
// Batch k always uses Rng::substream(seed, k) and batch results are reduced
// in index order, so a run is bit-identical for any thread count.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tauber/channels.hpp"
#include "tauber/error_models.hpp"
#include "tauber/rng.hpp"

namespace tauber {

using Sampler = std::function<double(Rng&)>;

struct McConfig {
  std::uint64_t seed = 1;
  std::uint64_t draws = 10'000'000;
  unsigned batches = 20;
  double confidence = 0.95;
  unsigned threads = 0;  // 0: hardware concurrency
  // Share of each batch forced into z < 50 / rho by inverse-CDF sampling
  // (channel overload only). 0 disables stratification.
  double importance_fraction = 0.0;

  void validate() const;
};

struct McResult {
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
  std::uint64_t draws = 0;
  std::uint64_t seed = 0;
};

McResult mc_average_error(const ErrorRateModel& model, const Sampler& sampler, double rho,
                          const McConfig& cfg);

/// Channel overload; honours cfg.importance_fraction.
McResult mc_average_error(const ErrorRateModel& model, const ChannelModel& ch, double rho,
                          const McConfig& cfg);

struct McCurvePoint {
  double snr_db = 0.0;
  McResult result;
};

/// One estimate per grid point. With common random numbers the same draws
/// are reused at every SNR; otherwise point i uses seed splitmix64(seed + i).
std::vector<McCurvePoint> mc_curve(const ErrorRateModel& model, const Sampler& sampler,
                                   std::span<const double> snr_grid_db, const McConfig& cfg,
                                   bool common_random_numbers = true);

}  // namespace tauber
