// Special functions, adaptive quadrature and curve utilities shared by the
// rest of the library. Everything here is a pure function of its arguments.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tauber {

using RealFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;

// ---------------------------------------------------------------------------
// Special functions

/// Gamma function. Throws std::domain_error for x <= 0 and
/// std::overflow_error when the result is not representable.
double gamma_fn(double x);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double lower_incomplete_gamma_regularized(double a, double x);

/// Modified Bessel function of the second kind K_nu(x), x > 0.
double bessel_k(double nu, double x);

/// exp(-x) * I_0(x) for x >= 0, finite for every argument.
double bessel_i0_scaled(double x);

/// Gaussian tail probability Q(x).
double q_fn(double x);

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-300;
  int max_subdivisions = 2000;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

/// Raised by integrate_or_throw when the subdivision budget runs out.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadratureResult best)
      : std::runtime_error(what), best_(best) {}
  const QuadratureResult& best() const noexcept { return best_; }

 private:
  QuadratureResult best_;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [lo, hi].
/// hi may be +infinity, in which case x = lo + t/(1-t) maps [0,1) onto the
/// range. Endpoints are never evaluated, so integrable endpoint
/// singularities are allowed. Non-convergence is reported in the result,
/// not thrown.
QuadratureResult integrate(const RealFn& f, double lo, double hi,
                           const QuadratureSpec& spec = {});

/// Integrates over consecutive pieces [p0,p1], [p1,p2], ... and sums.
/// The last point may be +infinity.
QuadratureResult integrate_pieces(const RealFn& f, std::span<const double> points,
                                  const QuadratureSpec& spec = {});

/// Same as integrate() but throws QuadratureError on non-convergence.
double integrate_or_throw(const RealFn& f, double lo, double hi,
                          const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Curve utilities

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  std::pair<double, double> range{0.0, 0.0};
};

/// Least-squares slope of log y against log x.
SlopeFit loglog_slope(std::span<const Point> points);

/// Points (x, f(x)) on n log-spaced abscissae spanning [lo, hi].
std::vector<Point> sample_log_grid(const RealFn& f, double lo, double hi, int n);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int n);

/// SNR (dB) at which a decreasing curve, interpolated linearly in
/// (dB, log10 value), crosses `target`. Curve points are (snr_db, value).
double crossing_snr(std::span<const Point> curve, double target);

/// Refines the crossing of a decreasing function of SNR (dB) with `target`
/// inside [lo_db, hi_db] by regula falsi in (dB, log10 value) space.
double solve_crossing_db(const RealFn& value_at_db, double target, double lo_db,
                         double hi_db, double tol_db = 1e-6);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace tauber
