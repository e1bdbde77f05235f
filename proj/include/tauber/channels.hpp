// Fading-channel power-gain distributions.
//
// A channel is described by the distribution of the power gain z (the
// instantaneous SNR is rho * z). Every model exposes its CDF, PDF and a
// sampler, together with the variation exponent d of the CDF at the origin
// and the leading small-z term z^d l(z).
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tauber/numerics.hpp"
#include "tauber/rng.hpp"

namespace tauber {

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation needs a power-law CDF but the channel varies
/// rapidly at the origin (d = infinity).
class RapidlyVaryingError : public std::domain_error {
 public:
  explicit RapidlyVaryingError(const std::string& who)
      : std::domain_error(who + ": rapidly varying channel (d = infinity), error rate decays "
                                "faster than any power law") {}
};

/// Parsed `family:key=value,key=value` descriptor.
struct ChannelSpec {
  std::string family;
  std::map<std::string, double> params;

  static ChannelSpec parse(std::string_view text);
  std::string to_string() const;
};

/// Splits a comma-separated branch list such as
/// `nakagami:m=0.5,nakagami:m=1,gk:m=2,k=1,rayleigh`. A token without ':'
/// that contains '=' continues the parameter list of the previous branch.
std::vector<ChannelSpec> parse_branch_list(std::string_view text);

/// Label, exponent and CDF: the part of a channel the asymptotic engine uses.
struct CdfView {
  std::string label;
  double exponent = kInf;
  RealFn cdf;
  bool divergent_slowly_varying = false;
};

struct ChannelModel {
  std::string name;
  RealFn cdf;
  RealFn pdf;  // may be empty
  std::function<double(Rng&)> sampler;
  double variation_exponent = kInf;
  RealFn leading_term;  // z^d l(z); empty when d is infinite
  RealFn laplace;       // closed-form Laplace-Stieltjes transform, may be empty
  bool divergent_slowly_varying = false;  // l(z) -> infinity at 0
  double mean_power = 1.0;

  bool finite_exponent() const { return std::isfinite(variation_exponent); }
  double sample(Rng& rng) const { return sampler(rng); }
  CdfView view() const { return {name, variation_exponent, cdf, divergent_slowly_varying}; }
};

/// Builds a model from the catalog: rayleigh, nakagami(m), weibull(k),
/// gk(m,k), lognormal(sigma_db[,mu_db]), rician(K), hoyt(q). Every family
/// also accepts `omega` to scale the power gain.
ChannelModel make_channel(const ChannelSpec& spec);
ChannelModel make_channel(std::string_view descriptor);

/// z^d l(z) for the channel's analytically derived l.
double cdf_asymptote(const ChannelModel& ch, double z);

std::vector<double> sample_gain(const ChannelModel& ch, Rng& rng, std::size_t n);

/// Inverse CDF by bisection on log z.
double cdf_quantile(const ChannelModel& ch, double p);

}  // namespace tauber
