#include "tauber/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace tauber {

namespace {

void require_finite(const CdfView& ch, const char* who) {
  if (!std::isfinite(ch.exponent)) throw RapidlyVaryingError(who);
  if (!(ch.exponent > 0.0)) throw std::domain_error(std::string(who) + ": exponent must be positive");
  if (!ch.cdf) throw std::invalid_argument(std::string(who) + ": channel has no CDF");
}

AsymptoticEstimate make_estimate(double d, double c1, double c2, const CdfView& ch) {
  AsymptoticEstimate e;
  e.exponent = d;
  e.multiplier = c1;
  e.scale = c2;
  e.coefficient = c1 * std::pow(c2, d);
  e.channel = ch;
  return e;
}

// Split points for integrals in u = rho z: the error-rate scale u ~ 1 and
// the channel scale z ~ 1.
std::vector<double> u_breakpoints(double rho) {
  std::vector<double> pts{0.0, 1.0, 10.0, 50.0};
  // Half-decade lattice from 0.1 rho: at low SNR the channel mass sits near
  // u = rho and a single wide piece would sample only its vanishing tail.
  for (double u = 0.1 * rho; u < 50.0; u *= std::sqrt(10.0)) pts.push_back(u);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.push_back(kInf);
  return pts;
}

double checked(const QuadratureResult& r, const char* who) {
  if (!r.converged)
    throw QuadratureError(std::string(who) + ": quadrature did not converge", r);
  return r.value;
}

QuadratureSpec with_tol(double rel_tol) {
  QuadratureSpec s;
  s.rel_tol = rel_tol;
  s.max_subdivisions = 4000;
  return s;
}

}  // namespace

AsymptoticEstimate asymptote_exponential(const ErrorRateModel& model, const CdfView& ch) {
  require_finite(ch, "asymptote_exponential");
  const ExpBound& p = model.exponential_params();
  const double d = ch.exponent;
  return make_estimate(d, p.beta * gamma_fn(d + 1.0), 1.0 / p.alpha, ch);
}

AsymptoticEstimate asymptote_mixture(const ErrorRateModel& model, const CdfView& ch) {
  require_finite(ch, "asymptote_mixture");
  const double d = ch.exponent;
  const double moment = model.mixture_form().moment(d);
  return make_estimate(d, gamma_fn(d + 1.0) * moment, 1.0, ch);
}

AsymptoticEstimate asymptote_combination(const ErrorRateModel& model, const CdfView& ch) {
  require_finite(ch, "asymptote_combination");
  if (model.kind() != ErrorClass::combination)
    throw std::invalid_argument("asymptote_combination: not a linear-combination model");
  // Signed rule: A = sum_j a_j C1j C2j^d, collapsed onto C2 = 1.
  double total = 0.0;
  for (const auto& t : model.terms()) total += t.coefficient * asymptote(*t.component, ch).coefficient;
  if (!(total > 0.0))
    throw std::domain_error("asymptote_combination: nonpositive total coefficient, invalid model");
  return make_estimate(ch.exponent, total, 1.0, ch);
}

AsymptoticEstimate asymptote(const ErrorRateModel& model, const CdfView& ch) {
  switch (model.kind()) {
    case ErrorClass::exponential: return asymptote_exponential(model, ch);
    case ErrorClass::mixture: return asymptote_mixture(model, ch);
    case ErrorClass::combination: return asymptote_combination(model, ch);
    case ErrorClass::bound_only: break;
  }
  throw std::invalid_argument(
      "asymptote: bound-only models have no closed-form constant; use bounds_check or "
      "empirical_diversity_order");
}

// ---------------------------------------------------------------------------

double exact_average(const ErrorRateModel& model, const ChannelModel& ch, double rho,
                     double rel_tol) {
  if (!(rho > 0.0)) throw std::domain_error("exact_average: rho must be positive");
  if (!ch.pdf) return exact_average_from_cdf(model, ch.cdf, rho, rel_tol);
  const RealFn integrand = [&](double u) {
    const double p = ch.pdf(u / rho);
    if (p == 0.0) return 0.0;
    return model(u) * p / rho;
  };
  const auto pts = u_breakpoints(rho);
  return checked(integrate_pieces(integrand, pts, with_tol(rel_tol)), "exact_average");
}

double exact_average_from_cdf(const ErrorRateModel& model, const RealFn& cdf, double rho,
                              double rel_tol) {
  if (!(rho > 0.0)) throw std::domain_error("exact_average_from_cdf: rho must be positive");
  if (!model.has_neg_slope())
    throw std::invalid_argument("exact_average_from_cdf: model has no derivative");
  const RealFn integrand = [&](double u) {
    const double f = cdf(u / rho);
    if (f == 0.0) return 0.0;
    return f * model.neg_slope(u);
  };
  const auto pts = u_breakpoints(rho);
  return checked(integrate_pieces(integrand, pts, with_tol(rel_tol)), "exact_average_from_cdf");
}

double exact_average_from_laplace(const ErrorRateModel& model, const RealFn& laplace, double rho,
                                  double rel_tol) {
  if (!(rho > 0.0)) throw std::domain_error("exact_average_from_laplace: rho must be positive");
  switch (model.kind()) {
    case ErrorClass::exponential: {
      const ExpBound& p = model.exponential_params();
      return p.beta * laplace(p.alpha * rho);
    }
    case ErrorClass::mixture: {
      const ExpMixture& mix = model.mixture_form();
      // int g2(t) L(rho / g1(t)) dt, i.e. the mixture with exp(-x/g1)
      // replaced by the transform.
      const RealFn integrand = [&](double t) {
        const double a = mix.g1(t);
        const double w = mix.g2(t);
        if (w == 0.0 || a <= 0.0) return 0.0;
        return w * laplace(rho / a);
      };
      std::vector<double> pts{0.0};
      for (double b : mix.breakpoints)
        if (b > 0.0 && b < mix.theta_t) pts.push_back(b);
      pts.push_back(mix.theta_t);
      return checked(integrate_pieces(integrand, pts, with_tol(rel_tol)),
                     "exact_average_from_laplace");
    }
    case ErrorClass::combination: {
      double s = 0.0;
      for (const auto& t : model.terms())
        s += t.coefficient * exact_average_from_laplace(*t.component, laplace, rho, rel_tol);
      return s;
    }
    case ErrorClass::bound_only: break;
  }
  throw std::invalid_argument("exact_average_from_laplace: bound-only model");
}

BoundsTriple bounds_check(const ErrorRateModel& model, const ChannelModel& ch, double rho,
                          double eta) {
  if (!(eta > 0.0)) throw std::domain_error("bounds_check: eta must be positive");
  const ExpBound& w = model.witness();
  BoundsTriple t;
  t.lower = model(eta) * ch.cdf(eta / rho);
  t.exact = exact_average(model, ch, rho);
  t.upper = exact_average(ErrorRateModel::exponential(w.alpha, w.beta, "witness"), ch, rho);
  return t;
}

double snr_offset_db(const AsymptoticEstimate& e1, const AsymptoticEstimate& e2) {
  const double d = e1.exponent;
  if (std::abs(e1.exponent - e2.exponent) > 1e-12 * std::max(1.0, d))
    throw std::invalid_argument("snr_offset_db: estimates have different exponents");
  if (e1.channel.label != e2.channel.label)
    throw std::invalid_argument("snr_offset_db: estimates refer to different channels");
  return 10.0 / d * std::log10(e1.coefficient / e2.coefficient);
}

WangEstimate wang_estimate(double a, double d, double alpha, double beta) {
  if (!(a > 0.0 && d > 0.0 && alpha > 0.0 && beta > 0.0))
    throw std::invalid_argument("wang_estimate: all parameters must be positive");
  const double inner = std::pow(2.0, d - 1.0) * a * gamma_fn(d + 0.5) / (beta * std::sqrt(kPi) * d);
  return {d, alpha * std::pow(inner, -1.0 / d), a};
}

WangEstimate wang_estimate_exponential(double a, double d, double alpha, double beta) {
  if (!(a > 0.0 && d > 0.0 && alpha > 0.0 && beta > 0.0))
    throw std::invalid_argument("wang_estimate_exponential: all parameters must be positive");
  return {d, alpha * std::pow(beta * a * gamma_fn(d), -1.0 / d), a};
}

DiversityOrderReport empirical_diversity_order(std::span<const Point> curve) {
  if (curve.size() < 3) throw std::invalid_argument("empirical_diversity_order: need 3+ points");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (!(curve[i].x > curve[i - 1].x))
      throw std::invalid_argument("empirical_diversity_order: rho must be increasing");
  DiversityOrderReport r;
  r.fit = loglog_slope(curve);
  r.estimate = -r.fit.slope;

  // Pairwise tau = 2 ratios, with Pe(2 rho) interpolated log-linearly.
  double sum = 0.0;
  int count = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double target = 2.0 * curve[i].x;
    if (target > curve.back().x) break;
    while (j + 1 < curve.size() && curve[j + 1].x < target) ++j;
    const std::size_t k = std::min(j + 1, curve.size() - 1);
    double log_y = std::log(curve[k].y);
    if (k > 0 && curve[k].x != target) {
      const std::size_t lo = k - 1;
      const double t = (std::log(target) - std::log(curve[lo].x)) /
                       (std::log(curve[k].x) - std::log(curve[lo].x));
      log_y = std::log(curve[lo].y) + t * (std::log(curve[k].y) - std::log(curve[lo].y));
    }
    sum += -(log_y - std::log(curve[i].y)) / std::log(2.0);
    ++count;
  }
  r.ratio_estimate = count > 0 ? sum / count : r.estimate;

  const std::size_t third = curve.size() / 3;
  if (third >= 3) {
    for (int w = 0; w < 3; ++w) {
      const std::size_t begin = w * third;
      const std::size_t end = w == 2 ? curve.size() : begin + third;
      r.window_estimates[w] = -loglog_slope(curve.subspan(begin, end - begin)).slope;
    }
    const auto [lo, hi] = std::minmax_element(r.window_estimates.begin(), r.window_estimates.end());
    r.converged = *hi - *lo <= kDriftLimit;
  } else {
    r.window_estimates.fill(r.estimate);
  }
  return r;
}

std::vector<Point> sample_snr_window(const RealFn& value_at_rho, double lo_db, double hi_db,
                                     int per_decade) {
  if (!(hi_db > lo_db) || per_decade < 1) throw std::invalid_argument("sample_snr_window: bad range");
  const int n = std::max(3, static_cast<int>(std::lround((hi_db - lo_db) / 10.0 * per_decade)) + 1);
  std::vector<Point> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double rho = db_to_linear(lo_db + (hi_db - lo_db) * i / (n - 1));
    pts.push_back({rho, value_at_rho(rho)});
  }
  return pts;
}

std::vector<Point> curve_over_db(const RealFn& value_at_rho, std::span<const double> snr_db,
                                 unsigned threads) {
  std::vector<Point> out(snr_db.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < snr_db.size(); i += stride)
      out[i] = {snr_db[i], value_at_rho(db_to_linear(snr_db[i]))};
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(snr_db.size())));
  if (threads == 1) {
    work(0, 1);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  return out;
}

}  // namespace tauber
