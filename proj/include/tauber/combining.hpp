// Diversity combining over independent, possibly non-identical branches.
//
// The combined exponent is the sum of the branch exponents for all three
// schemes. The combined CDF evaluators are
//
//   MRC: Gamma(sum d + 1)^-1  prod Gamma(d_n + 1)  prod F_n(z)
//   EGC: Gamma(2 sum d + 1)^-1 prod Gamma(2 d_n + 1) prod F_n(N z)
//   SC:  prod F_n(z)  (exact)
//
// with z_c = sum z_n, (sum sqrt z_n)^2 / N and max z_n respectively.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tauber/asymptotics.hpp"
#include "tauber/channels.hpp"
#include "tauber/montecarlo.hpp"

namespace tauber {

enum class Scheme { mrc, egc, sc };

std::string to_string(Scheme s);
Scheme parse_scheme(std::string_view text);

struct CombinedChannel {
  Scheme scheme = Scheme::mrc;
  std::vector<ChannelModel> branches;
  double exponent = 0.0;   // d_c
  double prefactor = 1.0;  // the Gamma ratio in front of the branch product
  RealFn cdf;              // combined asymptotic CDF
  Sampler sampler;
  std::string label;

  CdfView view() const { return {label, exponent, cdf, false}; }
  double sample(Rng& rng) const { return sampler(rng); }
};

/// Throws RapidlyVaryingError if any branch has infinite exponent.
CombinedChannel combine(Scheme scheme, std::vector<ChannelModel> branches);

AsymptoticEstimate combined_asymptote(const ErrorRateModel& model, const CombinedChannel& cc);

/// Monte Carlo average of Pe(rho z_c) over combined draws.
McResult combined_exact_average(const ErrorRateModel& model, const CombinedChannel& cc,
                                double rho, const McConfig& cfg = {});

/// Exact combined CDF: SC by product, MRC and EGC by numerical convolution
/// (EGC in the amplitude domain y = sqrt z). Branches need a PDF except the
/// one with the smallest exponent.
double combined_exact_cdf(const CombinedChannel& cc, double z, double rel_tol = 1e-11);

/// Laplace-Stieltjes transform of the MRC sum: the product of the branch
/// transforms (closed form when available, numerical otherwise).
double mrc_laplace(const CombinedChannel& cc, double s);

/// Deterministic oracle for the combined average: MRC through the product
/// transform, SC and EGC through the exact CDF.
double combined_exact_average_quadrature(const ErrorRateModel& model, const CombinedChannel& cc,
                                         double rho, double rel_tol = 1e-9);

}  // namespace tauber
