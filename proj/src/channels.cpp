#include "tauber/channels.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

namespace tauber {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw SpecError("channel parameter '" + key + "' is not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v))
    throw SpecError("channel parameter '" + key + "' is not a number: '" + text + "'");
  return v;
}

void parse_param(ChannelSpec& spec, std::string_view token) {
  const auto eq = token.find('=');
  if (eq == std::string_view::npos) throw SpecError("expected key=value, got '" + std::string(token) + "'");
  const std::string key = trim(token.substr(0, eq));
  const std::string value = trim(token.substr(eq + 1));
  if (key.empty()) throw SpecError("empty parameter name in '" + std::string(token) + "'");
  if (spec.params.count(key)) throw SpecError("duplicate parameter '" + key + "'");
  spec.params[key] = parse_number(key, value);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// CDF obtained by integrating a PDF. Values at log-spaced nodes are cached
// and a query integrates the PDF from the nearest node below it, so the
// result carries quadrature accuracy rather than interpolation error.
class IntegratedCdf {
 public:
  IntegratedCdf(RealFn pdf, double z_lo, double z_hi, int nodes) : pdf_(std::move(pdf)) {
    nodes_ = log_space(z_lo, z_hi, nodes);
    log_lo_ = std::log(z_lo);
    log_step_ = (std::log(z_hi) - log_lo_) / (nodes - 1);
    values_.resize(nodes_.size());
    values_[0] = piece(0.0, nodes_[0]);
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      values_[i] = values_[i - 1] + piece(nodes_[i - 1], nodes_[i]);
  }

  double operator()(double z) const {
    if (!(z > 0.0)) return 0.0;
    if (std::isinf(z)) return 1.0;
    if (z < nodes_.front()) return piece(0.0, z);
    if (z >= nodes_.back()) return std::clamp(1.0 - piece(z, kInf), 0.0, 1.0);
    auto i = static_cast<std::size_t>((std::log(z) - log_lo_) / log_step_);
    i = std::min(i, nodes_.size() - 2);
    while (i > 0 && nodes_[i] > z) --i;
    while (i + 1 < nodes_.size() && nodes_[i + 1] <= z) ++i;
    return std::min(1.0, values_[i] + piece(nodes_[i], z));
  }

 private:
  double piece(double a, double b) const {
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    return integrate(pdf_, a, b, spec).value;
  }

  RealFn pdf_;
  std::vector<double> nodes_;
  std::vector<double> values_;
  double log_lo_ = 0.0;
  double log_step_ = 1.0;
};

double require(const ChannelSpec& spec, const std::string& key) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) throw SpecError(spec.family + ": missing parameter '" + key + "'");
  return it->second;
}

void allow_only(const ChannelSpec& spec, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : spec.params) {
    bool ok = k == "omega";
    for (const char* allowed : keys) ok = ok || k == allowed;
    if (!ok) throw SpecError(spec.family + ": unknown parameter '" + k + "'");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

ChannelModel rayleigh() {
  ChannelModel ch;
  ch.name = "rayleigh";
  ch.cdf = [](double z) { return z > 0.0 ? -std::expm1(-z) : 0.0; };
  ch.pdf = [](double z) { return z >= 0.0 ? std::exp(-z) : 0.0; };
  ch.sampler = [](Rng& rng) { return -std::log(rng.uniform()); };
  ch.variation_exponent = 1.0;
  ch.leading_term = [](double z) { return z; };
  ch.laplace = [](double s) { return 1.0 / (1.0 + s); };
  return ch;
}

ChannelModel nakagami(double m) {
  if (!(m > 0.0)) throw SpecError("nakagami: m must be positive");
  ChannelModel ch;
  ch.name = "nakagami:m=" + fmt(m);
  ch.cdf = [m](double z) { return z > 0.0 ? lower_incomplete_gamma_regularized(m, m * z) : 0.0; };
  const double log_norm = m * std::log(m) - std::lgamma(m);
  ch.pdf = [m, log_norm](double z) {
    if (z < 0.0) return 0.0;
    if (z == 0.0) return m < 1.0 ? kInf : (m == 1.0 ? 1.0 : 0.0);
    return std::exp(log_norm + (m - 1.0) * std::log(z) - m * z);
  };
  ch.sampler = [m](Rng& rng) {
    std::gamma_distribution<double> g(m, 1.0 / m);
    return g(rng.engine());
  };
  ch.variation_exponent = m;
  // gamma(m, x) ~ x^m / m as x -> 0
  const double c = 1.0 / gamma_fn(m + 1.0);
  ch.leading_term = [m, c](double z) { return c * std::pow(m * z, m); };
  ch.laplace = [m](double s) { return std::pow(1.0 + s / m, -m); };
  return ch;
}

ChannelModel weibull(double k) {
  if (!(k > 0.0)) throw SpecError("weibull: k must be positive");
  ChannelModel ch;
  ch.name = "weibull:k=" + fmt(k);
  ch.cdf = [k](double z) { return z > 0.0 ? -std::expm1(-std::pow(z, k)) : 0.0; };
  ch.pdf = [k](double z) {
    if (z < 0.0) return 0.0;
    if (z == 0.0) return k < 1.0 ? kInf : (k == 1.0 ? 1.0 : 0.0);
    const double zk = std::pow(z, k);
    return k * zk / z * std::exp(-zk);
  };
  ch.sampler = [k](Rng& rng) { return std::pow(-std::log(rng.uniform()), 1.0 / k); };
  ch.variation_exponent = k;
  ch.leading_term = [k](double z) { return std::pow(z, k); };
  ch.mean_power = gamma_fn(1.0 + 1.0 / k);
  return ch;
}

// Product of unit-mean gamma variates with shapes m and k.
ChannelModel generalized_k(double m, double k) {
  if (!(m > 0.0) || !(k > 0.0)) throw SpecError("gk: m and k must be positive");
  ChannelModel ch;
  ch.name = "gk:m=" + fmt(m) + ",k=" + fmt(k);
  const double nu = k - m;
  const double log_norm = std::log(2.0) + 0.5 * (k + m) * std::log(k * m) - std::lgamma(m) -
                          std::lgamma(k);
  ch.pdf = [m, k, nu, log_norm](double z) {
    if (!(z > 0.0)) return 0.0;
    const double x = 2.0 * std::sqrt(k * m * z);
    double log_k = 0.0;
    try {
      const double kv = bessel_k(nu, x);
      if (kv == 0.0) return 0.0;
      log_k = std::log(kv);
    } catch (const std::overflow_error&) {
      // small-argument form K_nu(x) ~ Gamma(|nu|) (2/x)^|nu| / 2
      log_k = std::lgamma(std::abs(nu)) + std::abs(nu) * std::log(2.0 / x) - std::log(2.0);
    }
    return std::exp(log_norm + 0.5 * (k + m - 2.0) * std::log(z) + log_k);
  };
  auto table = std::make_shared<IntegratedCdf>(ch.pdf, 1e-12, 50.0, 600);
  ch.cdf = [table](double z) { return (*table)(z); };
  ch.sampler = [m, k](Rng& rng) {
    std::gamma_distribution<double> gm(m, 1.0 / m);
    std::gamma_distribution<double> gk(k, 1.0 / k);
    const double x = gm(rng.engine());
    return x * gk(rng.engine());
  };
  const double d = std::min(m, k);
  ch.variation_exponent = d;
  if (m != k) {
    // P(xy <= z) ~ E[y^-a] (a z)^a / Gamma(a + 1) with a = min(m, k), b = max(m, k),
    // and E[y^-a] = b^a Gamma(b - a) / Gamma(b) for the unit-mean gamma y.
    const double a = d;
    const double b = std::max(m, k);
    const double c = std::tgamma(b - a) / (gamma_fn(a + 1.0) * gamma_fn(b));
    ch.leading_term = [a, b, c](double z) { return c * std::pow(a * b * z, a); };
  } else {
    // f(z) ~ 2 m^{2m} z^{m-1} (-log(m sqrt z) - gamma_em) / Gamma(m)^2, integrated.
    const double c = 2.0 * std::pow(m, 2.0 * m - 1.0) / (std::tgamma(m) * std::tgamma(m));
    ch.leading_term = [m, c](double z) {
      return c * std::pow(z, m) * (-std::log(m * std::sqrt(z)) - kEulerGamma + 0.5 / m);
    };
    ch.divergent_slowly_varying = true;
  }
  return ch;
}

ChannelModel lognormal(double sigma_db, double mu_db) {
  if (!(sigma_db > 0.0)) throw SpecError("lognormal: sigma_db must be positive");
  ChannelModel ch;
  ch.name = "lognormal:sigma_db=" + fmt(sigma_db);
  if (mu_db != 0.0) ch.name += ",mu_db=" + fmt(mu_db);
  const double sigma = sigma_db * std::log(10.0) / 10.0;
  const double mu = mu_db * std::log(10.0) / 10.0;
  ch.cdf = [sigma, mu](double z) {
    if (!(z > 0.0)) return 0.0;
    return 0.5 * std::erfc(-(std::log(z) - mu) / (sigma * std::sqrt(2.0)));
  };
  ch.pdf = [sigma, mu](double z) {
    if (!(z > 0.0)) return 0.0;
    const double u = (std::log(z) - mu) / sigma;
    return std::exp(-0.5 * u * u) / (z * sigma * std::sqrt(2.0 * kPi));
  };
  ch.sampler = [sigma, mu](Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return std::exp(mu + sigma * n(rng.engine()));
  };
  ch.variation_exponent = kInf;
  ch.mean_power = std::exp(mu + 0.5 * sigma * sigma);
  return ch;
}

// Unit-mean Ricean power gain: noncentral chi-square with two degrees of
// freedom, i.e. a Poisson(K) mixture of Gamma(n + 1, 1/(K + 1)) laws.
ChannelModel rician(double kf) {
  if (!(kf >= 0.0)) throw SpecError("rician: K must be nonnegative");
  ChannelModel ch;
  ch.name = "rician:K=" + fmt(kf);
  const double k1 = kf + 1.0;
  const int max_terms = static_cast<int>(kf + 40.0 * std::sqrt(kf + 1.0) + 60.0);
  ch.cdf = [kf, k1, max_terms](double z) {
    if (!(z > 0.0)) return 0.0;
    double sum = 0.0;
    double log_w = -kf;  // log Poisson weight of term n
    for (int n = 0; n < max_terms; ++n) {
      if (n > 0) log_w += std::log(kf) - std::log(static_cast<double>(n));
      const double t = std::exp(log_w) * lower_incomplete_gamma_regularized(n + 1.0, k1 * z);
      sum += t;
      if (n > kf && (t <= 1e-18 * sum || log_w < -690.0)) break;
    }
    return std::min(sum, 1.0);
  };
  ch.pdf = [kf, k1](double z) {
    if (z < 0.0) return 0.0;
    const double x = 2.0 * std::sqrt(kf * k1 * z);
    return k1 * std::exp(-kf - k1 * z + x) * bessel_i0_scaled(x);
  };
  const double los = std::sqrt(kf / k1);
  const double sd = std::sqrt(0.5 / k1);
  ch.sampler = [los, sd](Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = los + sd * n(rng.engine());
    const double im = sd * n(rng.engine());
    return re * re + im * im;
  };
  ch.variation_exponent = 1.0;
  // f(0) = (K + 1) e^{-K}
  const double f0 = k1 * std::exp(-kf);
  ch.leading_term = [f0](double z) { return f0 * z; };
  ch.laplace = [kf, k1](double s) { return k1 / (k1 + s) * std::exp(-kf * s / (k1 + s)); };
  return ch;
}

// Nakagami-q: z = X^2 + Y^2 with X ~ N(0, 1/(1+q^2)), Y ~ N(0, q^2/(1+q^2)).
ChannelModel hoyt(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw SpecError("hoyt: q must lie in (0, 1]");
  ChannelModel ch;
  ch.name = "hoyt:q=" + fmt(q);
  const double q2 = q * q;
  const double f0 = (1.0 + q2) / (2.0 * q);
  const double a = (1.0 + q2) * (1.0 + q2) / (4.0 * q2);
  const double b = (1.0 - q2 * q2) / (4.0 * q2);
  ch.pdf = [f0, a, b](double z) {
    if (z < 0.0) return 0.0;
    return f0 * std::exp(-(a - b) * z) * bessel_i0_scaled(b * z);
  };
  auto table = std::make_shared<IntegratedCdf>(ch.pdf, 1e-12, 50.0, 600);
  ch.cdf = [table](double z) { return (*table)(z); };
  const double sx = std::sqrt(1.0 / (1.0 + q2));
  const double sy = std::sqrt(q2 / (1.0 + q2));
  ch.sampler = [sx, sy](Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double x = sx * n(rng.engine());
    const double y = sy * n(rng.engine());
    return x * x + y * y;
  };
  ch.variation_exponent = 1.0;
  ch.leading_term = [f0](double z) { return f0 * z; };
  const double vx = sx * sx;
  const double vy = sy * sy;
  ch.laplace = [vx, vy](double s) { return 1.0 / std::sqrt((1.0 + 2.0 * s * vx) * (1.0 + 2.0 * s * vy)); };
  return ch;
}

ChannelModel scale_power(ChannelModel base, double omega) {
  if (!(omega > 0.0)) throw SpecError("omega must be positive");
  ChannelModel ch = base;
  ch.name = base.name + (base.name.find(':') == std::string::npos ? ":" : ",") + "omega=" + fmt(omega);
  ch.cdf = [f = base.cdf, omega](double z) { return f(z / omega); };
  if (base.pdf) ch.pdf = [f = base.pdf, omega](double z) { return f(z / omega) / omega; };
  ch.sampler = [s = base.sampler, omega](Rng& rng) { return omega * s(rng); };
  if (base.leading_term) ch.leading_term = [f = base.leading_term, omega](double z) { return f(z / omega); };
  if (base.laplace) ch.laplace = [f = base.laplace, omega](double s) { return f(omega * s); };
  ch.mean_power = base.mean_power * omega;
  return ch;
}

}  // namespace

ChannelSpec ChannelSpec::parse(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) throw SpecError("empty channel descriptor");
  ChannelSpec spec;
  const auto colon = t.find(':');
  spec.family = trim(std::string_view(t).substr(0, colon));
  if (colon != std::string::npos) {
    for (auto tok : split(std::string_view(t).substr(colon + 1), ',')) parse_param(spec, tok);
  }
  return spec;
}

std::string ChannelSpec::to_string() const {
  std::string s = family;
  char sep = ':';
  for (const auto& [k, v] : params) {
    s += sep + k + "=" + fmt(v);
    sep = ',';
  }
  return s;
}

std::vector<ChannelSpec> parse_branch_list(std::string_view text) {
  std::vector<ChannelSpec> out;
  for (auto raw : split(text, ',')) {
    const std::string tok = trim(raw);
    if (tok.empty()) throw SpecError("empty entry in branch list");
    const bool continues = tok.find(':') == std::string::npos && tok.find('=') != std::string::npos;
    if (continues) {
      if (out.empty()) throw SpecError("branch list starts with a parameter: '" + tok + "'");
      parse_param(out.back(), tok);
    } else {
      out.push_back(ChannelSpec::parse(tok));
    }
  }
  if (out.empty()) throw SpecError("empty branch list");
  return out;
}

ChannelModel make_channel(const ChannelSpec& spec) {
  ChannelModel ch;
  const std::string& f = spec.family;
  if (f == "rayleigh") {
    allow_only(spec, {});
    ch = rayleigh();
  } else if (f == "nakagami") {
    allow_only(spec, {"m"});
    ch = nakagami(require(spec, "m"));
  } else if (f == "weibull") {
    allow_only(spec, {"k"});
    ch = weibull(require(spec, "k"));
  } else if (f == "gk") {
    allow_only(spec, {"m", "k"});
    ch = generalized_k(require(spec, "m"), require(spec, "k"));
  } else if (f == "lognormal") {
    allow_only(spec, {"sigma_db", "mu_db"});
    const auto mu = spec.params.find("mu_db");
    ch = lognormal(require(spec, "sigma_db"), mu == spec.params.end() ? 0.0 : mu->second);
  } else if (f == "rician") {
    allow_only(spec, {"K"});
    ch = rician(require(spec, "K"));
  } else if (f == "hoyt") {
    allow_only(spec, {"q"});
    ch = hoyt(require(spec, "q"));
  } else {
    throw SpecError("unknown channel family '" + f + "'");
  }
  if (const auto it = spec.params.find("omega"); it != spec.params.end() && it->second != 1.0)
    ch = scale_power(std::move(ch), it->second);
  return ch;
}

ChannelModel make_channel(std::string_view descriptor) {
  return make_channel(ChannelSpec::parse(descriptor));
}

double cdf_asymptote(const ChannelModel& ch, double z) {
  if (!ch.finite_exponent() || !ch.leading_term) throw RapidlyVaryingError("cdf_asymptote");
  if (!(z > 0.0)) throw std::domain_error("cdf_asymptote: z must be positive");
  return ch.leading_term(z);
}

std::vector<double> sample_gain(const ChannelModel& ch, Rng& rng, std::size_t n) {
  if (n < 1) throw std::invalid_argument("sample_gain: n must be at least 1");
  std::vector<double> out(n);
  for (auto& z : out) z = ch.sample(rng);
  return out;
}

double cdf_quantile(const ChannelModel& ch, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("cdf_quantile: p must lie in (0, 1)");
  double lo = 1e-300;
  double hi = 1.0;
  while (ch.cdf(hi) < p) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("cdf_quantile: CDF never reaches p");
  }
  if (ch.cdf(lo) >= p) return lo;
  // Bisection on log z: 200 halvings cover the full double range.
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo) * std::sqrt(hi);
    if (mid <= lo || mid >= hi) break;
    if (ch.cdf(mid) < p) lo = mid; else hi = mid;
    if (hi / lo - 1.0 < 1e-14) break;
  }
  return std::sqrt(lo) * std::sqrt(hi);
}

}  // namespace tauber
