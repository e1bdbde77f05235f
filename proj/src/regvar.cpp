#include "tauber/regvar.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tauber {

namespace {

bool all_positive(const std::vector<Point>& pts) {
  return std::all_of(pts.begin(), pts.end(),
                     [](const Point& p) { return p.y > 0.0 && std::isfinite(p.y); });
}

ExponentReport slope_report(const RealFn& fn, std::pair<double, double> window,
                            const ExponentOptions& opt, double shift, ExponentMethod method) {
  auto [lo, hi] = window;
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("exponent estimate: need 0 < z_lo < z_hi");
  if (opt.points < 9) throw std::invalid_argument("exponent estimate: need at least 9 points");
  std::vector<Point> pts = sample_log_grid(fn, lo, hi, opt.points);
  if (!all_positive(pts)) {
    // Widen once toward larger z, then keep only the usable points.
    hi = hi * (hi / lo);
    pts = sample_log_grid(fn, lo, hi, opt.points);
    pts.erase(std::remove_if(pts.begin(), pts.end(),
                             [](const Point& p) { return !(p.y > 0.0) || !std::isfinite(p.y); }),
              pts.end());
    if (pts.size() < 9)
      throw std::domain_error("exponent estimate: function underflows to zero on the window");
    lo = pts.front().x;
  }
  ExponentReport r;
  r.method = method;
  r.window = {lo, hi};
  const SlopeFit fit = loglog_slope(pts);
  r.estimate = fit.slope + shift;
  r.stderr_ = fit.stderr_;

  double ratio_sum = 0.0;
  for (const Point& p : pts) ratio_sum += std::log(fn(opt.tau * p.x) / p.y) / std::log(opt.tau);
  r.ratio_estimate = ratio_sum / pts.size() + shift;

  // Thirds, ordered from largest z (index 0) to smallest (index 2).
  const std::size_t third = pts.size() / 3;
  for (int w = 0; w < 3; ++w) {
    const std::size_t begin = pts.size() - (w + 1) * third;
    const std::size_t count = w == 2 ? pts.size() - 2 * third : third;
    const std::size_t start = w == 2 ? 0 : begin;
    r.window_slopes[w] = loglog_slope(std::span<const Point>(pts).subspan(start, count)).slope + shift;
  }
  const auto& s = r.window_slopes;
  r.rapidly_varying = s[2] > s[1] && s[1] > s[0] && s[2] - s[0] > opt.drift_threshold;
  if (r.rapidly_varying) r.estimate = kInf;
  return r;
}

}  // namespace

std::string to_string(ExponentMethod m) {
  switch (m) {
    case ExponentMethod::cdf_slope: return "cdf-slope";
    case ExponentMethod::pdf_slope: return "pdf-slope";
    case ExponentMethod::ratio_limit: return "ratio-limit";
    case ExponentMethod::transform_slope: return "transform-slope";
  }
  return "?";
}

ExponentReport exponent_from_cdf(const RealFn& cdf, std::pair<double, double> window,
                                 const ExponentOptions& opt) {
  return slope_report(cdf, window, opt, 0.0, ExponentMethod::cdf_slope);
}

ExponentReport exponent_from_pdf(const RealFn& pdf, std::pair<double, double> window,
                                 const ExponentOptions& opt) {
  return slope_report(pdf, window, opt, 1.0, ExponentMethod::pdf_slope);
}

double laplace_stieltjes(const RealFn& cdf, double s, double rel_tol) {
  if (!(s > 0.0)) throw std::domain_error("laplace_stieltjes: s must be positive");
  const RealFn integrand = [&](double u) {
    const double f = cdf(u / s);
    return f == 0.0 ? 0.0 : f * std::exp(-u);
  };
  std::vector<double> pts{0.0, 1.0, 10.0, 50.0};
  for (double c : {0.1, 1.0, 10.0})
    if (c * s < 50.0) pts.push_back(c * s);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.push_back(kInf);
  QuadratureSpec spec;
  spec.rel_tol = rel_tol;
  const QuadratureResult r = integrate_pieces(integrand, pts, spec);
  if (!r.converged) throw QuadratureError("laplace_stieltjes: quadrature did not converge", r);
  return r.value;
}

TauberianReport tauberian_check(const ChannelModel& ch) {
  if (!ch.finite_exponent()) throw RapidlyVaryingError("tauberian_check");
  TauberianReport rep;
  rep.cdf_side = exponent_from_cdf(ch.cdf, {1e-7, 1e-4});
  const auto transform = sample_log_grid([&](double s) { return laplace_stieltjes(ch.cdf, s); },
                                         1e4, 1e7, 40);
  const SlopeFit fit = loglog_slope(transform);
  rep.transform_exponent = -fit.slope;
  rep.transform_stderr = fit.stderr_;
  rep.tolerance = ch.divergent_slowly_varying ? 0.1 : 0.02;
  rep.exponents_agree = std::isfinite(rep.cdf_side.estimate) &&
                        std::abs(rep.cdf_side.estimate - rep.transform_exponent) <= rep.tolerance;
  if (!ch.divergent_slowly_varying) {
    rep.ratio_checked = true;
    const double s = 1e6;
    rep.ratio = laplace_stieltjes(ch.cdf, s) /
                (gamma_fn(ch.variation_exponent + 1.0) * ch.cdf(1.0 / s));
    rep.ratio_ok = rep.ratio >= 0.98 && rep.ratio <= 1.02;
  }
  rep.pass = rep.exponents_agree && rep.ratio_ok;
  return rep;
}

}  // namespace tauber
