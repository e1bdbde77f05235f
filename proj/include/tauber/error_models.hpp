// Instantaneous error-rate functions Pe(x), x = rho * z, organised by the
// exponential structure they admit:
//
//   bound_only   Pe(x) <= beta exp(-alpha x)                (witness only)
//   exponential  Pe(x)  = beta exp(-alpha x)
//   mixture      Pe(x)  = int_0^theta_t g2(t) exp(-x / g1(t)) dt
//   combination  Pe(x)  = sum_j a_j Pe_j(x), Pe_j exponential or mixture
//
// Each class implies the one above it; every model carries an
// exponential-bound witness.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tauber/numerics.hpp"

namespace tauber {

struct ExpBound {
  double alpha = 1.0;
  double beta = 1.0;
};

struct ExpMixture {
  double theta_t = kPi / 2.0;
  RealFn g1;
  RealFn g2;
  std::string label;
  // Interior points where the integrand may have kinks; the integration
  // range is split there.
  std::vector<double> breakpoints;

  /// int_0^theta_t g2(t) exp(-x / g1(t)) dt
  double evaluate(double x, double rel_tol = 1e-12) const;
  /// int_0^theta_t g2(t) g1(t)^d dt
  double moment(double d, double rel_tol = 1e-12) const;
};

enum class ErrorClass { bound_only, exponential, mixture, combination };

std::string_view to_string(ErrorClass c);

class ErrorRateModel;

struct CombinationTerm {
  double coefficient = 0.0;
  std::shared_ptr<const ErrorRateModel> component;
};

class ErrorRateModel {
 public:
  static ErrorRateModel exponential(double alpha, double beta, std::string label);
  /// `direct` and `neg_slope` are optional closed forms; quadrature of the
  /// mixture is used when they are empty.
  static ErrorRateModel mixture(ExpMixture mix, ExpBound witness, RealFn direct = {},
                                RealFn neg_slope = {});
  static ErrorRateModel combination(std::vector<CombinationTerm> terms, ExpBound witness,
                                    std::string label, RealFn direct = {}, RealFn neg_slope = {});
  static ErrorRateModel bound_only(RealFn pe, ExpBound witness, std::string label);

  /// Pe(x)
  double operator()(double x) const;
  /// -dPe/dx, the density against which F(x / rho) integrates to the
  /// average error rate. Not available for bound_only models.
  double neg_slope(double x) const;
  bool has_neg_slope() const;

  ErrorClass kind() const { return kind_; }
  const std::string& label() const { return label_; }
  const ExpBound& witness() const { return witness_; }
  /// (alpha, beta) of an exponential model.
  const ExpBound& exponential_params() const;
  const ExpMixture& mixture_form() const;
  std::span<const CombinationTerm> terms() const { return terms_; }

  /// Exponential models rewritten as a one-point mixture
  /// (g1 = 1/alpha, g2 = 2 beta / pi on [0, pi/2]).
  ExpMixture as_mixture() const;

 private:
  ErrorClass kind_ = ErrorClass::bound_only;
  std::string label_;
  ExpBound witness_;
  ExpBound exp_params_;
  ExpMixture mixture_;
  std::vector<CombinationTerm> terms_;
  RealFn direct_;
  RealFn neg_slope_;
};

ErrorRateModel dpsk_ber();
ErrorRateModel bpsk_ber();
ErrorRateModel mpsk_ser(int m);
ErrorRateModel mqam_ser(int m);
/// User-supplied mixture; validates theta_t in (0, pi) and the
/// nonnegativity of g1 and g2 on a sample grid.
ErrorRateModel custom_mixture(double theta_t, RealFn g1, RealFn g2, ExpBound witness,
                              std::string label = "custom");

/// Parses `dpsk`, `bpsk`, `mpsk:M=8`, `mqam:M=16`.
ErrorRateModel make_modulation(std::string_view descriptor);

}  // namespace tauber
