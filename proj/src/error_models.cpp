#include "tauber/error_models.hpp"

#include <algorithm>
#include <cmath>

#include "tauber/channels.hpp"

namespace tauber {

namespace {

QuadratureSpec tight(double rel_tol) {
  QuadratureSpec spec;
  spec.rel_tol = rel_tol;
  return spec;
}

std::vector<double> split_points(const ExpMixture& mix) {
  std::vector<double> pts{0.0};
  for (double b : mix.breakpoints)
    if (b > 0.0 && b < mix.theta_t) pts.push_back(b);
  pts.push_back(mix.theta_t);
  std::sort(pts.begin(), pts.end());
  return pts;
}

void validate_mixture(const ExpMixture& mix) {
  if (!(mix.theta_t > 0.0 && mix.theta_t < kPi))
    throw std::invalid_argument("mixture: theta_t must lie in (0, pi)");
  if (!mix.g1 || !mix.g2) throw std::invalid_argument("mixture: g1 and g2 are required");
  for (int i = 1; i < 200; ++i) {
    const double t = mix.theta_t * i / 200.0;
    const double a = mix.g1(t);
    const double b = mix.g2(t);
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0)
      throw std::invalid_argument("mixture: g1 and g2 must be finite and nonnegative on (0, theta_t)");
  }
}

void validate_bound(const ExpBound& w) {
  if (!(w.alpha > 0.0) || !(w.beta > 0.0) || !std::isfinite(w.alpha) || !std::isfinite(w.beta))
    throw std::invalid_argument("exponential bound: alpha and beta must be finite and positive");
}

// Craig-form mixture for Q(sqrt(c x))^power, power 1 or 2.
ExpMixture craig_q(double c, int power, std::string label) {
  ExpMixture mix;
  mix.theta_t = kPi / (2.0 * power);
  const double scale = 2.0 / c;
  mix.g1 = [scale](double t) {
    const double s = std::sin(t);
    return scale * s * s;
  };
  mix.g2 = [](double) { return 1.0 / kPi; };
  mix.label = std::move(label);
  return mix;
}

double gaussian_density(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * kPi); }

}  // namespace

double ExpMixture::evaluate(double x, double rel_tol) const {
  const auto pts = split_points(*this);
  const RealFn f = [this, x](double t) {
    const double a = g1(t);
    const double w = g2(t);
    if (w == 0.0 || a <= 0.0) return 0.0;
    return w * std::exp(-x / a);
  };
  return integrate_pieces(f, pts, tight(rel_tol)).value;
}

double ExpMixture::moment(double d, double rel_tol) const {
  const auto pts = split_points(*this);
  const RealFn f = [this, d](double t) {
    const double w = g2(t);
    if (w == 0.0) return 0.0;
    return w * std::pow(g1(t), d);
  };
  const QuadratureResult r = integrate_pieces(f, pts, tight(rel_tol));
  if (!r.converged || !std::isfinite(r.value))
    throw std::runtime_error("mixture moment integral did not converge (divergent g2 * g1^d?)");
  return r.value;
}

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::bound_only: return "AS1a";
    case ErrorClass::exponential: return "AS1b";
    case ErrorClass::mixture: return "AS1c";
    case ErrorClass::combination: return "linear-combination";
  }
  return "?";
}

ErrorRateModel ErrorRateModel::exponential(double alpha, double beta, std::string label) {
  ErrorRateModel m;
  m.kind_ = ErrorClass::exponential;
  m.exp_params_ = {alpha, beta};
  validate_bound(m.exp_params_);
  m.witness_ = m.exp_params_;
  m.label_ = std::move(label);
  return m;
}

ErrorRateModel ErrorRateModel::mixture(ExpMixture mix, ExpBound witness, RealFn direct,
                                       RealFn neg_slope) {
  validate_mixture(mix);
  validate_bound(witness);
  ErrorRateModel m;
  m.kind_ = ErrorClass::mixture;
  m.label_ = mix.label;
  m.mixture_ = std::move(mix);
  m.witness_ = witness;
  m.direct_ = std::move(direct);
  m.neg_slope_ = std::move(neg_slope);
  return m;
}

ErrorRateModel ErrorRateModel::combination(std::vector<CombinationTerm> terms, ExpBound witness,
                                           std::string label, RealFn direct, RealFn neg_slope) {
  if (terms.empty()) throw std::invalid_argument("combination: no terms");
  for (const auto& t : terms) {
    if (!t.component) throw std::invalid_argument("combination: null component");
    const auto k = t.component->kind();
    if (k != ErrorClass::exponential && k != ErrorClass::mixture)
      throw std::invalid_argument("combination: components must be exponential or mixture models");
    if (!std::isfinite(t.coefficient)) throw std::invalid_argument("combination: bad coefficient");
  }
  validate_bound(witness);
  ErrorRateModel m;
  m.kind_ = ErrorClass::combination;
  m.terms_ = std::move(terms);
  m.witness_ = witness;
  m.label_ = std::move(label);
  m.direct_ = std::move(direct);
  m.neg_slope_ = std::move(neg_slope);
  return m;
}

ErrorRateModel ErrorRateModel::bound_only(RealFn pe, ExpBound witness, std::string label) {
  if (!pe) throw std::invalid_argument("bound_only: evaluator required");
  validate_bound(witness);
  ErrorRateModel m;
  m.kind_ = ErrorClass::bound_only;
  m.direct_ = std::move(pe);
  m.witness_ = witness;
  m.label_ = std::move(label);
  return m;
}

double ErrorRateModel::operator()(double x) const {
  if (direct_) return direct_(x);
  switch (kind_) {
    case ErrorClass::exponential:
      return exp_params_.beta * std::exp(-exp_params_.alpha * x);
    case ErrorClass::mixture:
      return mixture_.evaluate(x);
    case ErrorClass::combination: {
      double s = 0.0;
      for (const auto& t : terms_) s += t.coefficient * (*t.component)(x);
      return s;
    }
    case ErrorClass::bound_only:
      break;
  }
  throw std::logic_error("ErrorRateModel: no evaluator");
}

bool ErrorRateModel::has_neg_slope() const {
  return static_cast<bool>(neg_slope_) || kind_ != ErrorClass::bound_only;
}

double ErrorRateModel::neg_slope(double x) const {
  if (neg_slope_) return neg_slope_(x);
  switch (kind_) {
    case ErrorClass::exponential:
      return exp_params_.alpha * exp_params_.beta * std::exp(-exp_params_.alpha * x);
    case ErrorClass::mixture: {
      // d/dx of the mixture: int g2/g1 exp(-x/g1)
      ExpMixture d = mixture_;
      d.g2 = [g1 = mixture_.g1, g2 = mixture_.g2](double t) {
        const double a = g1(t);
        return a > 0.0 ? g2(t) / a : 0.0;
      };
      return d.evaluate(x);
    }
    case ErrorClass::combination: {
      double s = 0.0;
      for (const auto& t : terms_) s += t.coefficient * t.component->neg_slope(x);
      return s;
    }
    case ErrorClass::bound_only:
      break;
  }
  throw std::logic_error("ErrorRateModel: derivative unavailable for bound-only models");
}

const ExpBound& ErrorRateModel::exponential_params() const {
  if (kind_ != ErrorClass::exponential) throw std::logic_error("not an exponential model");
  return exp_params_;
}

const ExpMixture& ErrorRateModel::mixture_form() const {
  if (kind_ != ErrorClass::mixture) throw std::logic_error("not a mixture model");
  return mixture_;
}

ExpMixture ErrorRateModel::as_mixture() const {
  if (kind_ == ErrorClass::mixture) return mixture_;
  if (kind_ != ErrorClass::exponential) throw std::logic_error("as_mixture: not an exponential model");
  ExpMixture mix;
  mix.theta_t = kPi / 2.0;
  const double g1 = 1.0 / exp_params_.alpha;
  const double g2 = 2.0 * exp_params_.beta / kPi;
  mix.g1 = [g1](double) { return g1; };
  mix.g2 = [g2](double) { return g2; };
  mix.label = label_ + " (one-point mixture)";
  return mix;
}

// ---------------------------------------------------------------------------

ErrorRateModel dpsk_ber() { return ErrorRateModel::exponential(1.0, 0.5, "dpsk"); }

ErrorRateModel bpsk_ber() {
  // Q(sqrt(2x)); Chernoff witness Q(u) <= exp(-u^2/2)/2
  return ErrorRateModel::mixture(
      craig_q(2.0, 1, "bpsk"), {1.0, 0.5},
      [](double x) { return q_fn(std::sqrt(2.0 * x)); },
      [](double x) { return x > 0.0 ? std::exp(-x) / (2.0 * std::sqrt(kPi * x)) : kInf; });
}

ErrorRateModel mpsk_ser(int m) {
  if (m < 2) throw std::invalid_argument("mpsk: M must be at least 2");
  ExpMixture mix;
  const double s = std::sin(kPi / m);
  const double s2 = s * s;
  mix.theta_t = (1.0 - 1.0 / m) * kPi;
  mix.g1 = [s2](double t) {
    const double st = std::sin(t);
    return st * st / s2;
  };
  mix.g2 = [](double) { return 1.0 / kPi; };
  mix.label = "mpsk:M=" + std::to_string(m);
  // g1 peaks at pi/2 inside the range once M > 2
  mix.breakpoints = {kPi / 2.0};
  if (m == 2) return ErrorRateModel::mixture(std::move(mix), {s2, 1.0},
                                             [](double x) { return q_fn(std::sqrt(2.0 * x)); });
  return ErrorRateModel::mixture(std::move(mix), {s2, 1.0});
}

ErrorRateModel mqam_ser(int m) {
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (m < 4 || root * root != m) throw std::invalid_argument("mqam: M must be a perfect square >= 4");
  const double c = 3.0 / (m - 1.0);
  const double a = 4.0 * (1.0 - 1.0 / root);
  const double b = a * (1.0 - 1.0 / root);  // 4 (1 - M^{-1/2})^2
  const std::string label = "mqam:M=" + std::to_string(m);
  auto q1 = std::make_shared<const ErrorRateModel>(ErrorRateModel::mixture(
      craig_q(c, 1, label + " Q"), {0.5 * c, 0.5},
      [c](double x) { return q_fn(std::sqrt(c * x)); }));
  auto q2 = std::make_shared<const ErrorRateModel>(ErrorRateModel::mixture(
      craig_q(c, 2, label + " Q^2"), {0.5 * c, 0.25}, [c](double x) {
        const double q = q_fn(std::sqrt(c * x));
        return q * q;
      }));
  auto direct = [a, b, c](double x) {
    const double q = q_fn(std::sqrt(c * x));
    return a * q - b * q * q;
  };
  // d/dx Q(sqrt(c x)) = -phi(v) c / (2 v), v = sqrt(c x)
  auto slope = [a, b, c](double x) {
    if (!(x > 0.0)) return kInf;
    const double v = std::sqrt(c * x);
    return (a - 2.0 * b * q_fn(v)) * gaussian_density(v) * c / (2.0 * v);
  };
  // Chernoff on the leading term: Pe <= a Q(v) <= (a/2) exp(-c x / 2)
  return ErrorRateModel::combination({{a, q1}, {-b, q2}}, {0.5 * c, 0.5 * a}, label, direct, slope);
}

ErrorRateModel custom_mixture(double theta_t, RealFn g1, RealFn g2, ExpBound witness,
                              std::string label) {
  ExpMixture mix;
  mix.theta_t = theta_t;
  mix.g1 = std::move(g1);
  mix.g2 = std::move(g2);
  mix.label = std::move(label);
  return ErrorRateModel::mixture(std::move(mix), witness);
}

ErrorRateModel make_modulation(std::string_view descriptor) {
  const ChannelSpec spec = ChannelSpec::parse(descriptor);  // same key=value grammar
  auto order = [&]() {
    if (spec.params.size() != 1 || !spec.params.count("M"))
      throw SpecError(spec.family + ": expected exactly one parameter M");
    const double m = spec.params.at("M");
    if (m != std::floor(m) || m < 2 || m > 1 << 20) throw SpecError(spec.family + ": M must be an integer >= 2");
    return static_cast<int>(m);
  };
  try {
    if (spec.family == "dpsk" || spec.family == "bpsk") {
      if (!spec.params.empty()) throw SpecError(spec.family + " takes no parameters");
      return spec.family == "dpsk" ? dpsk_ber() : bpsk_ber();
    }
    if (spec.family == "mpsk") return mpsk_ser(order());
    if (spec.family == "mqam") return mqam_ser(order());
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
  throw SpecError("unknown modulation '" + spec.family + "'");
}

}  // namespace tauber
