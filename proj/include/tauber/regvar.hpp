// Regular-variation analysis of black-box distributions: variation
// exponent estimation at the origin, numerical Laplace-Stieltjes
// transforms, and the CDF/transform exponent consistency check.
#pragma once

#include <array>
#include <string>
#include <utility>

#include "tauber/channels.hpp"
#include "tauber/numerics.hpp"

namespace tauber {

enum class ExponentMethod { cdf_slope, pdf_slope, ratio_limit, transform_slope };

std::string to_string(ExponentMethod m);

struct ExponentReport {
  double estimate = 0.0;   // +infinity when rapidly varying
  double stderr_ = 0.0;
  ExponentMethod method = ExponentMethod::cdf_slope;
  std::pair<double, double> window{0.0, 0.0};
  double ratio_estimate = 0.0;
  // Local slopes on the upper, middle and lower thirds of the window; the
  // drift between them is what triggers the rapid-variation verdict.
  std::array<double, 3> window_slopes{};
  bool rapidly_varying = false;
};

struct ExponentOptions {
  int points = 40;
  double tau = 2.0;
  double drift_threshold = 0.5;
};

/// Estimates d in F(z) ~ z^d l(z) from log-log slope on `window` (both
/// ends small). Throws std::domain_error when F vanishes on the window
/// even after one widening.
ExponentReport exponent_from_cdf(const RealFn& cdf, std::pair<double, double> window,
                                 const ExponentOptions& opt = {});

/// Same from the density: slope of log f plus one.
ExponentReport exponent_from_pdf(const RealFn& pdf, std::pair<double, double> window,
                                 const ExponentOptions& opt = {});

/// L(s) = int e^{-s z} dF(z) = int_0^inf e^{-u} F(u / s) du.
double laplace_stieltjes(const RealFn& cdf, double s, double rel_tol = 1e-10);

struct TauberianReport {
  ExponentReport cdf_side;
  double transform_exponent = 0.0;
  double transform_stderr = 0.0;
  double tolerance = 0.02;
  bool exponents_agree = false;
  bool ratio_checked = false;
  double ratio = 0.0;  // L(s) / (Gamma(d + 1) F(1/s)) at s = 1e6
  bool ratio_ok = true;
  bool pass = false;
};

/// Compares the CDF exponent on z in [1e-7, 1e-4] with the transform
/// exponent on s in [1e4, 1e7].
TauberianReport tauberian_check(const ChannelModel& ch);

}  // namespace tauber
