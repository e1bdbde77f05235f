#include "tauber/combining.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "tauber/regvar.hpp"

namespace tauber {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::mrc: return "mrc";
    case Scheme::egc: return "egc";
    case Scheme::sc: return "sc";
  }
  return "?";
}

Scheme parse_scheme(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "mrc") return Scheme::mrc;
  if (t == "egc") return Scheme::egc;
  if (t == "sc") return Scheme::sc;
  throw SpecError("unknown combining scheme '" + std::string(text) + "' (expected mrc, egc or sc)");
}

CombinedChannel combine(Scheme scheme, std::vector<ChannelModel> branches) {
  if (branches.empty()) throw std::invalid_argument("combine: need at least one branch");
  for (const auto& b : branches)
    if (!b.finite_exponent()) throw RapidlyVaryingError("combine (branch " + b.name + ")");

  CombinedChannel cc;
  cc.scheme = scheme;
  const double n = static_cast<double>(branches.size());
  double d_sum = 0.0;
  for (const auto& b : branches) d_sum += b.variation_exponent;
  cc.exponent = d_sum;

  // Log-space prefactor: branch counts of a few dozen overflow Gamma otherwise.
  double log_pref = 0.0;
  double arg_scale = 1.0;
  switch (scheme) {
    case Scheme::mrc:
      for (const auto& b : branches) log_pref += std::lgamma(b.variation_exponent + 1.0);
      log_pref -= std::lgamma(d_sum + 1.0);
      break;
    case Scheme::egc:
      for (const auto& b : branches) log_pref += std::lgamma(2.0 * b.variation_exponent + 1.0);
      log_pref -= std::lgamma(2.0 * d_sum + 1.0);
      arg_scale = n;
      break;
    case Scheme::sc: break;
  }
  cc.prefactor = std::exp(log_pref);

  auto shared = std::make_shared<const std::vector<ChannelModel>>(branches);
  const double pref = cc.prefactor;
  cc.cdf = [shared, pref, arg_scale](double z) {
    if (!(z > 0.0)) return 0.0;
    double p = pref;
    for (const auto& b : *shared) p *= b.cdf(arg_scale * z);
    return std::min(p, 1.0);
  };
  switch (scheme) {
    case Scheme::mrc:
      cc.sampler = [shared](Rng& rng) {
        double s = 0.0;
        for (const auto& b : *shared) s += b.sampler(rng);
        return s;
      };
      break;
    case Scheme::egc:
      cc.sampler = [shared, n](Rng& rng) {
        double s = 0.0;
        for (const auto& b : *shared) s += std::sqrt(b.sampler(rng));
        return s * s / n;
      };
      break;
    case Scheme::sc:
      cc.sampler = [shared](Rng& rng) {
        double s = 0.0;
        for (const auto& b : *shared) s = std::max(s, b.sampler(rng));
        return s;
      };
      break;
  }
  cc.label = to_string(scheme) + "[";
  for (std::size_t i = 0; i < branches.size(); ++i)
    cc.label += (i ? "," : "") + branches[i].name;
  cc.label += "]";
  cc.branches = std::move(branches);
  return cc;
}

AsymptoticEstimate combined_asymptote(const ErrorRateModel& model, const CombinedChannel& cc) {
  return asymptote(model, cc.view());
}

McResult combined_exact_average(const ErrorRateModel& model, const CombinedChannel& cc,
                                double rho, const McConfig& cfg) {
  return mc_average_error(model, cc.sampler, rho, cfg);
}

namespace {

// H_k(t) = int_0^t g_k(x) H_{k-1}(t - x) dx, with H_1 the base CDF.
double convolve(const std::vector<RealFn>& densities, const RealFn& base, std::size_t level, double t,
                double rel_tol) {
  if (!(t > 0.0)) return 0.0;
  if (level == 0) return base(t);
  const RealFn& g = densities[level - 1];
  const RealFn integrand = [&](double x) {
    const double w = g(x);
    if (w == 0.0) return 0.0;
    return w * convolve(densities, base, level - 1, t - x, rel_tol);
  };
  QuadratureSpec spec;
  spec.rel_tol = rel_tol;
  spec.abs_tol = 1e-300;
  // The inner result is used even if the error target was not met; the
  // residual is far below the outer tolerance.
  return std::clamp(integrate(integrand, 0.0, t, spec).value, 0.0, 1.0);
}

std::vector<const ChannelModel*> sorted_by_exponent(const CombinedChannel& cc) {
  std::vector<const ChannelModel*> order;
  for (const auto& b : cc.branches) order.push_back(&b);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
    return a->variation_exponent < b->variation_exponent;
  });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (!order[i]->pdf)
      throw std::invalid_argument("combined_exact_cdf: branch " + order[i]->name + " has no PDF");
  return order;
}

}  // namespace

double combined_exact_cdf(const CombinedChannel& cc, double z, double rel_tol) {
  if (!(z > 0.0)) return 0.0;
  if (cc.scheme == Scheme::sc) {
    double p = 1.0;
    for (const auto& b : cc.branches) p *= b.cdf(z);
    return p;
  }
  const auto order = sorted_by_exponent(cc);
  std::vector<RealFn> densities;
  if (cc.scheme == Scheme::mrc) {
    for (std::size_t i = 1; i < order.size(); ++i) densities.push_back(order[i]->pdf);
    return convolve(densities, order[0]->cdf, densities.size(), z, rel_tol);
  }
  // EGC: amplitudes y_n = sqrt z_n with density 2 y f_n(y^2); the event
  // z_c <= z is sum y_n <= sqrt(N z).
  for (std::size_t i = 1; i < order.size(); ++i) {
    const RealFn pdf = order[i]->pdf;
    densities.push_back([pdf](double y) { return y > 0.0 ? 2.0 * y * pdf(y * y) : 0.0; });
  }
  const RealFn base_cdf = order[0]->cdf;
  const RealFn base = [base_cdf](double y) { return base_cdf(y * y); };
  const double t = std::sqrt(static_cast<double>(cc.branches.size()) * z);
  return convolve(densities, base, densities.size(), t, rel_tol);
}

double mrc_laplace(const CombinedChannel& cc, double s) {
  double p = 1.0;
  for (const auto& b : cc.branches) p *= b.laplace ? b.laplace(s) : laplace_stieltjes(b.cdf, s);
  return p;
}

double combined_exact_average_quadrature(const ErrorRateModel& model, const CombinedChannel& cc,
                                         double rho, double rel_tol) {
  if (cc.scheme == Scheme::mrc && model.kind() != ErrorClass::bound_only) {
    const RealFn lap = [&](double s) { return mrc_laplace(cc, s); };
    return exact_average_from_laplace(model, lap, rho, rel_tol);
  }
  const RealFn cdf = [&](double z) { return combined_exact_cdf(cc, z, rel_tol * 1e-2); };
  return exact_average_from_cdf(model, cdf, rho, rel_tol);
}

}  // namespace tauber
