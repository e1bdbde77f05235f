// High-SNR asymptotic average error rates.
//
// For an exponential model beta exp(-alpha x) and a channel CDF with
// variation exponent d at the origin,
//
//     E[Pe(rho z)] ~ beta Gamma(d + 1) F(1 / (alpha rho)),
//
// and for an exponential mixture (theta_t, g1, g2),
//
//     E[Pe(rho z)] ~ Gamma(d + 1) (int_0^theta_t g2 g1^d) F(1 / rho).
//
// Both are reported as C1 F(C2 / rho) ~ A F(1 / rho) with A = C1 C2^d.
#pragma once

#include <array>
#include <span>
#include <vector>

#include "tauber/channels.hpp"
#include "tauber/error_models.hpp"
#include "tauber/numerics.hpp"

namespace tauber {

struct AsymptoticEstimate {
  double exponent = 0.0;
  double multiplier = 0.0;  // C1
  double scale = 1.0;       // C2
  double coefficient = 0.0; // A = C1 C2^d
  CdfView channel;

  /// C1 F(C2 / rho)
  double operator()(double rho) const { return multiplier * channel.cdf(scale / rho); }
  /// A F(1 / rho), asymptotically equal to operator().
  double collapsed(double rho) const { return coefficient * channel.cdf(1.0 / rho); }
};

AsymptoticEstimate asymptote_exponential(const ErrorRateModel& model, const CdfView& ch);
AsymptoticEstimate asymptote_mixture(const ErrorRateModel& model, const CdfView& ch);
AsymptoticEstimate asymptote_combination(const ErrorRateModel& model, const CdfView& ch);
/// Dispatches on the model class. Bound-only models have no closed-form
/// constant and are rejected.
AsymptoticEstimate asymptote(const ErrorRateModel& model, const CdfView& ch);
inline AsymptoticEstimate asymptote(const ErrorRateModel& model, const ChannelModel& ch) {
  return asymptote(model, ch.view());
}

/// Relative tolerance used by the exact-average oracles.
inline constexpr double kExactRelTol = 1e-10;

/// E[Pe(rho z)] by quadrature against the channel PDF (falls back to the
/// CDF route when the channel has no PDF).
double exact_average(const ErrorRateModel& model, const ChannelModel& ch, double rho,
                     double rel_tol = kExactRelTol);
/// E[Pe(rho z)] = int_0^inf F(u / rho) (-Pe'(u)) du.
double exact_average_from_cdf(const ErrorRateModel& model, const RealFn& cdf, double rho,
                              double rel_tol = kExactRelTol);
/// E[Pe(rho z)] through the Laplace-Stieltjes transform L of the channel:
/// beta L(alpha rho) for exponentials, int g2 L(rho / g1) for mixtures.
double exact_average_from_laplace(const ErrorRateModel& model, const RealFn& laplace, double rho,
                                  double rel_tol = kExactRelTol);

struct BoundsTriple {
  double lower = 0.0;
  double exact = 0.0;
  double upper = 0.0;
};

/// lower = Pe(eta) F(eta / rho), upper = E[beta exp(-alpha rho z)] with the
/// model's exponential witness, exact = exact_average.
BoundsTriple bounds_check(const ErrorRateModel& model, const ChannelModel& ch, double rho,
                          double eta = 1.0);

/// Horizontal gap (dB) between two asymptotes of equal exponent over the
/// same channel: (10 / d) log10(A1 / A2).
double snr_offset_db(const AsymptoticEstimate& e1, const AsymptoticEstimate& e2);

/// PDF-based comparator: f(z) ~ a z^(d-1) gives (G rho)^(-d).
struct WangEstimate {
  double diversity_order = 0.0;
  double array_gain = 0.0;
  double pdf_prefactor = 0.0;

  double operator()(double rho) const { return std::pow(array_gain * rho, -diversity_order); }
};

/// Q-function convention: Pe(x) = Q(sqrt(alpha x)) with the gain
/// G = alpha ((2^(d-1) a Gamma(d + 1/2)) / (beta sqrt(pi) d))^(-1/d).
/// BPSK corresponds to alpha = 2, beta = 1.
WangEstimate wang_estimate(double a, double d, double alpha, double beta);
/// Same comparator for Pe(x) = beta exp(-alpha x): the leading PDF term
/// integrates to beta a Gamma(d) (alpha rho)^(-d).
WangEstimate wang_estimate_exponential(double a, double d, double alpha, double beta);

struct DiversityOrderReport {
  SlopeFit fit;                  // of log Pe against log rho
  double estimate = 0.0;         // -fit.slope
  double ratio_estimate = 0.0;   // mean of -log2(Pe(2 rho) / Pe(rho))
  std::array<double, 3> window_estimates{};  // low, middle, high SNR thirds
  bool converged = true;         // window estimates within kDriftLimit
};

inline constexpr double kDriftLimit = 0.2;

/// Empirical diversity order of a curve of (rho, average error rate).
DiversityOrderReport empirical_diversity_order(std::span<const Point> curve);

/// (rho, value(rho)) on a dB grid with `per_decade` points per decade.
std::vector<Point> sample_snr_window(const RealFn& value_at_rho, double lo_db, double hi_db,
                                     int per_decade = 20);

/// value(rho) for each dB grid point, returned as (snr_db, value). Work is
/// split across `threads` workers; the output does not depend on it.
std::vector<Point> curve_over_db(const RealFn& value_at_rho, std::span<const double> snr_db,
                                 unsigned threads = 1);

}  // namespace tauber
