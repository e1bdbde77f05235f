#include "tauber/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "tauber/numerics.hpp"

namespace tauber {

namespace {

// One batch fills `out` with per-SNR means.
using BatchFn = std::function<void(Rng&, std::uint64_t n, std::vector<double>& out)>;

unsigned worker_count(const McConfig& cfg) {
  unsigned t = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  return std::max(1u, std::min(t, cfg.batches));
}

std::uint64_t batch_size(const McConfig& cfg, unsigned k) {
  return cfg.draws / cfg.batches + (k < cfg.draws % cfg.batches ? 1 : 0);
}

// Runs every batch and returns means[batch][point].
std::vector<std::vector<double>> run_batches(const McConfig& cfg, std::size_t points,
                                             const BatchFn& fn) {
  std::vector<std::vector<double>> means(cfg.batches, std::vector<double>(points, 0.0));
  std::atomic<unsigned> next{0};
  auto worker = [&] {
    for (unsigned k = next++; k < cfg.batches; k = next++) {
      Rng rng = Rng::substream(cfg.seed, k);
      fn(rng, batch_size(cfg, k), means[k]);
    }
  };
  const unsigned threads = worker_count(cfg);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return means;
}

// Weighted mean of batch means plus a Student-t half width. Both sums are
// taken relative to the first batch so identical batches reduce exactly.
McResult reduce(const McConfig& cfg, const std::vector<std::vector<double>>& means,
                std::size_t point) {
  const unsigned b = cfg.batches;
  const double ref = means[0][point];
  double shifted = 0.0;
  for (unsigned k = 0; k < b; ++k)
    shifted += static_cast<double>(batch_size(cfg, k)) * (means[k][point] - ref);
  const double mean = ref + shifted / static_cast<double>(cfg.draws);

  double ss = 0.0;
  for (unsigned k = 0; k < b; ++k) ss += (means[k][point] - mean) * (means[k][point] - mean);
  const double sd = std::sqrt(ss / (b - 1));
  const boost::math::students_t_distribution<double> t(b - 1);
  const double q = boost::math::quantile(t, 0.5 + cfg.confidence / 2.0);
  return {mean, q * sd / std::sqrt(static_cast<double>(b)), cfg.draws, cfg.seed};
}

// Mean of a stream relative to its first value.
struct ShiftedMean {
  double ref = 0.0;
  double sum = 0.0;
  std::uint64_t n = 0;

  void add(double v) {
    if (n == 0) ref = v;
    sum += v - ref;
    ++n;
  }
  double value() const { return n ? ref + sum / static_cast<double>(n) : 0.0; }
};

}  // namespace

void McConfig::validate() const {
  if (batches < 2) throw std::invalid_argument("McConfig: need at least 2 batches");
  if (draws < batches) throw std::invalid_argument("McConfig: draws must be at least batches");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("McConfig: confidence must lie in (0, 1)");
  if (!(importance_fraction >= 0.0 && importance_fraction < 1.0))
    throw std::invalid_argument("McConfig: importance_fraction must lie in [0, 1)");
}

McResult mc_average_error(const ErrorRateModel& model, const Sampler& sampler, double rho,
                          const McConfig& cfg) {
  if (!(rho > 0.0)) throw std::domain_error("mc_average_error: rho must be positive");
  const double db = linear_to_db(rho);
  return mc_curve(model, sampler, std::span<const double>(&db, 1), cfg, true).front().result;
}

McResult mc_average_error(const ErrorRateModel& model, const ChannelModel& ch, double rho,
                          const McConfig& cfg) {
  cfg.validate();
  if (!(rho > 0.0)) throw std::domain_error("mc_average_error: rho must be positive");
  if (!ch.sampler) throw std::invalid_argument("mc_average_error: channel has no sampler");
  // The deep-fade stratum must hold nearly all of the average: above u = rho z
  // the remaining share is about Gamma(d, u) / Gamma(d) for an exponential
  // Pe, which is 4% at u = 5 for d = 2 but negligible at u = 50.
  const double z0 = 50.0 / rho;
  const double p0 = cfg.importance_fraction > 0.0 ? ch.cdf(z0) : 0.0;
  if (!(p0 > 0.0 && p0 < 0.5))
    return mc_average_error(model, Sampler(ch.sampler), rho, cfg);

  // Two strata: z < z0 by inverse CDF, z >= z0 by rejection from the sampler.
  const BatchFn fn = [&](Rng& rng, std::uint64_t n, std::vector<double>& out) {
    const auto n_low = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(cfg.importance_fraction * n));
    const std::uint64_t n_high = std::max<std::uint64_t>(1, n - std::min(n, n_low));
    ShiftedMean low, high;
    for (std::uint64_t i = 0; i < n_low; ++i) low.add(model(rho * cdf_quantile(ch, rng.uniform() * p0)));
    for (std::uint64_t i = 0; i < n_high;) {
      const double z = ch.sampler(rng);
      if (z < z0) continue;
      high.add(model(rho * z));
      ++i;
    }
    out[0] = p0 * low.value() + (1.0 - p0) * high.value();
  };
  return reduce(cfg, run_batches(cfg, 1, fn), 0);
}

std::vector<McCurvePoint> mc_curve(const ErrorRateModel& model, const Sampler& sampler,
                                   std::span<const double> snr_grid_db, const McConfig& cfg,
                                   bool common_random_numbers) {
  cfg.validate();
  if (!sampler) throw std::invalid_argument("mc_curve: empty sampler");
  std::vector<double> rhos;
  for (double db : snr_grid_db) rhos.push_back(db_to_linear(db));
  std::vector<McCurvePoint> out;
  out.reserve(rhos.size());

  if (common_random_numbers) {
    const BatchFn fn = [&](Rng& rng, std::uint64_t n, std::vector<double>& means) {
      std::vector<ShiftedMean> acc(rhos.size());
      for (std::uint64_t i = 0; i < n; ++i) {
        const double z = sampler(rng);
        for (std::size_t j = 0; j < rhos.size(); ++j) acc[j].add(model(rhos[j] * z));
      }
      for (std::size_t j = 0; j < rhos.size(); ++j) means[j] = acc[j].value();
    };
    const auto means = run_batches(cfg, rhos.size(), fn);
    for (std::size_t j = 0; j < rhos.size(); ++j)
      out.push_back({snr_grid_db[j], reduce(cfg, means, j)});
    return out;
  }

  for (std::size_t j = 0; j < rhos.size(); ++j) {
    McConfig point_cfg = cfg;
    point_cfg.seed = splitmix64(cfg.seed + j);
    const double rho = rhos[j];
    const BatchFn fn = [&](Rng& rng, std::uint64_t n, std::vector<double>& means) {
      ShiftedMean acc;
      for (std::uint64_t i = 0; i < n; ++i) acc.add(model(rho * sampler(rng)));
      means[0] = acc.value();
    };
    out.push_back({snr_grid_db[j], reduce(point_cfg, run_batches(point_cfg, 1, fn), 0)});
  }
  return out;
}

}  // namespace tauber
