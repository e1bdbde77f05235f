#include "tauber/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace tauber {

double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: argument must be positive");
  const double g = std::tgamma(x);
  if (!std::isfinite(g)) throw std::overflow_error("gamma_fn: result overflows");
  return g;
}

double lower_incomplete_gamma_regularized(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("incomplete gamma: a must be positive");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(a, x);
}

double bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be positive");
  // K_{-nu} = K_nu
  return boost::math::cyl_bessel_k(std::abs(nu), x);
}

double bessel_i0_scaled(double x) {
  x = std::abs(x);
  if (x < 600.0) return boost::math::cyl_bessel_i(0.0, x) * std::exp(-x);
  // Hankel expansion, truncated well inside its accuracy for x >= 600.
  const double inv8x = 1.0 / (8.0 * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 8; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd * inv8x / k;
    sum += term;
  }
  return sum / std::sqrt(2.0 * kPi * x);
}

double q_fn(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
  if (max_subdivisions < 1)
    throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
}

namespace {

constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One 15-point Kronrod panel with the QUADPACK error heuristic.
Panel kronrod15(const RealFn& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  double fv1[7];
  double fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  const double value = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * resabs, err);
  return {a, b, value, err};
}

QuadratureResult adaptive(const RealFn& f, double a, double b, const QuadratureSpec& spec) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<Panel> heap;
  Panel first = kronrod15(f, a, b);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  out.subdivisions = 1;
  // Panels too narrow to split further are parked here.
  double frozen_value = 0.0;
  double frozen_err = 0.0;
  while (!heap.empty()) {
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
    if (total_err <= tol) break;
    if (out.subdivisions >= spec.max_subdivisions) break;
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        std::abs(worst.b - worst.a) <= 8.0 * std::numeric_limits<double>::epsilon() *
                                            std::max(std::abs(worst.a), std::abs(worst.b))) {
      frozen_value += worst.value;
      frozen_err += worst.error;
      continue;
    }
    const Panel left = kronrod15(f, worst.a, mid);
    const Panel right = kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++out.subdivisions;
  }
  // Re-sum from the panels to shed accumulated cancellation in `total`.
  double value = frozen_value;
  double err = frozen_err;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = value;
  out.abs_error = err;
  out.converged = err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value)) * (1.0 + 1e-12);
  return out;
}

}  // namespace

QuadratureResult integrate(const RealFn& f, double lo, double hi, const QuadratureSpec& spec) {
  spec.validate();
  if (std::isnan(lo) || std::isnan(hi) || std::isinf(lo))
    throw std::invalid_argument("integrate: lower limit must be finite");
  if (hi < lo) {
    QuadratureResult r = integrate(f, hi, lo, spec);
    r.value = -r.value;
    return r;
  }
  if (std::isinf(hi)) {
    const RealFn mapped = [&f, lo](double t) {
      const double s = 1.0 - t;
      const double v = f(lo + t / s);
      return v == 0.0 ? 0.0 : v / (s * s);
    };
    return adaptive(mapped, 0.0, 1.0, spec);
  }
  return adaptive(f, lo, hi, spec);
}

QuadratureResult integrate_pieces(const RealFn& f, std::span<const double> points,
                                  const QuadratureSpec& spec) {
  if (points.size() < 2) throw std::invalid_argument("integrate_pieces: need two or more points");
  // Each piece gets the full relative tolerance; pieces of a positive
  // integrand then meet it jointly as well.
  QuadratureResult out;
  out.converged = true;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const QuadratureResult r = integrate(f, points[i], points[i + 1], spec);
    out.value += r.value;
    out.abs_error += r.abs_error;
    out.subdivisions += r.subdivisions;
    out.converged = out.converged && r.converged;
  }
  return out;
}

double integrate_or_throw(const RealFn& f, double lo, double hi, const QuadratureSpec& spec) {
  const QuadratureResult r = integrate(f, lo, hi, spec);
  if (!r.converged) throw QuadratureError("integrate: no convergence within subdivision budget", r);
  return r.value;
}

// ---------------------------------------------------------------------------

SlopeFit loglog_slope(std::span<const Point> points) {
  const std::size_t n = points.size();
  if (n < 3) throw std::invalid_argument("loglog_slope: need at least 3 points");
  std::vector<double> lx(n);
  std::vector<double> ly(n);
  double xmin = points[0].x;
  double xmax = points[0].x;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(points[i].x > 0.0) || !(points[i].y > 0.0))
      throw std::invalid_argument("loglog_slope: points must be strictly positive");
    lx[i] = std::log(points[i].x);
    ly[i] = std::log(points[i].y);
    xmin = std::min(xmin, points[i].x);
    xmax = std::max(xmax, points[i].x);
  }
  if (!(xmax > xmin)) throw std::invalid_argument("loglog_slope: abscissae are all equal");
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    ssr += r * r;
  }
  SlopeFit fit;
  fit.slope = slope;
  fit.stderr_ = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  fit.range = {xmin, xmax};
  return fit;
}

std::vector<double> log_space(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("log_space: bad range");
  std::vector<double> v(n);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / (n - 1);
  for (int i = 0; i < n; ++i) v[i] = std::exp(a + step * i);
  v.front() = lo;
  v.back() = hi;
  return v;
}

std::vector<Point> sample_log_grid(const RealFn& f, double lo, double hi, int n) {
  std::vector<Point> pts;
  pts.reserve(n);
  for (double x : log_space(lo, hi, n)) pts.push_back({x, f(x)});
  return pts;
}

double crossing_snr(std::span<const Point> curve, double target) {
  if (curve.empty()) throw std::invalid_argument("crossing_snr: empty curve");
  if (!(target > 0.0)) throw std::invalid_argument("crossing_snr: target must be positive");
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].y == target) return curve[i].x;
    if (i + 1 == curve.size()) break;
    const double y0 = curve[i].y;
    const double y1 = curve[i + 1].y;
    if (y0 > target && y1 < target) {
      const double l0 = std::log10(y0);
      const double l1 = std::log10(y1);
      const double t = (std::log10(target) - l0) / (l1 - l0);
      return curve[i].x + t * (curve[i + 1].x - curve[i].x);
    }
  }
  throw std::out_of_range("crossing_snr: target outside the curve's value range");
}

double solve_crossing_db(const RealFn& value_at_db, double target, double lo_db, double hi_db,
                         double tol_db) {
  const double lt = std::log10(target);
  auto g = [&](double db) { return std::log10(value_at_db(db)) - lt; };
  double a = lo_db;
  double b = hi_db;
  double ga = g(a);
  double gb = g(b);
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if (!(ga > 0.0 && gb < 0.0))
    throw std::out_of_range("solve_crossing_db: target not bracketed by the SNR range");
  int side = 0;
  double prev = a;
  for (int it = 0; it < 200; ++it) {
    const double c = (a * gb - b * ga) / (gb - ga);
    const double gc = g(c);
    if (gc == 0.0 || std::abs(c - prev) < tol_db) return c;
    prev = c;
    if (gc > 0.0) {
      a = c;
      ga = gc;
      if (side == -1) gb *= 0.5;  // Illinois step
      side = -1;
    } else {
      b = c;
      gb = gc;
      if (side == 1) ga *= 0.5;
      side = 1;
    }
  }
  return prev;
}

}  // namespace tauber
