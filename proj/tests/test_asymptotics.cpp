#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "support.hpp"
#include "tauber/asymptotics.hpp"

using namespace tauber;
using test::rel_err;

namespace {

const std::vector<std::string> kCatalog = {
    "rayleigh",   "nakagami:m=0.5", "nakagami:m=2", "nakagami:m=3", "weibull:k=0.5",
    "weibull:k=1.5", "gk:m=2,k=1",  "gk:m=1.5,k=3", "gk:m=2,k=2",   "rician:K=3",
    "hoyt:q=0.5"};

std::vector<ErrorRateModel> builtins() {
  return {dpsk_ber(), bpsk_ber(), mpsk_ser(4), mpsk_ser(8), mqam_ser(4), mqam_ser(16)};
}

CdfView power_law(double d) {
  return {"power", d, [d](double z) { return std::pow(z, d); }, false};
}

}  // namespace

TEST_CASE("asymptote_exponential examples") {
  const auto ray = make_channel("rayleigh");
  const auto e = asymptote(dpsk_ber(), ray);
  CHECK(e.multiplier == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e.scale == 1.0);
  CHECK(e.exponent == 1.0);
  CHECK(rel_err(e(1e8) * 1e8, 0.5) < 1e-7);

  const auto n2 = make_channel("nakagami:m=2");
  const auto e2 = asymptote(dpsk_ber(), n2);
  CHECK(rel_err(e2.coefficient, 1.0) < 1e-14);
  const double rho = 1e8;
  CHECK(rel_err(e2(rho), 0.5 * std::pow(2.0 / rho, 2.0)) < 1e-7);
  CHECK(rel_err(e2(rho), 0.5 * std::pow(1.0 + rho / 2.0, -2.0)) < 1e-7);

  const auto e3 = asymptote(ErrorRateModel::exponential(2.0, 1.0, "x"), n2);
  CHECK(e3.scale == 0.5);
}

TEST_CASE("rapidly varying channels are rejected") {
  const auto ln = make_channel("lognormal:sigma_db=8");
  for (const auto& m : builtins()) {
    try {
      asymptote(m, ln);
      FAIL("expected RapidlyVaryingError");
    } catch (const RapidlyVaryingError& e) {
      CHECK(std::string(e.what()).find("rapidly varying") != std::string::npos);
    }
  }
}

TEST_CASE("bound-only models have no asymptote") {
  const auto m = ErrorRateModel::bound_only([](double x) { return 0.25 * std::exp(-2 * x); }, {2.0, 0.25}, "b");
  CHECK_THROWS_AS(asymptote(m, make_channel("rayleigh")), std::invalid_argument);
}

TEST_CASE("BPSK constant identity") {
  for (double d : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    CAPTURE(d);
    const auto e = asymptote_mixture(bpsk_ber(), power_law(d));
    CHECK(e.scale == 1.0);
    CHECK(std::abs(e.multiplier - gamma_fn(d + 0.5) / (2.0 * std::sqrt(kPi))) < 1e-9);
  }
}

TEST_CASE("bpsk over rayleigh behaves as 1/(4 rho)") {
  const auto ray = make_channel("rayleigh");
  const auto e = asymptote(bpsk_ber(), ray);
  for (double rho : {1e6, 1e8}) {
    const double closed = 0.5 * (1.0 - std::sqrt(rho / (1.0 + rho)));
    CHECK(rel_err(e(rho), 0.25 / rho) < 1e-5);
    CHECK(rel_err(closed, 0.25 / rho) < 1e-5);
  }
}

TEST_CASE("mpsk M=4 constant over rayleigh") {
  const auto ray = make_channel("rayleigh");
  const auto e = asymptote(mpsk_ser(4), ray);
  // Gamma(2) (1/pi) int_0^{3pi/4} 2 sin^2 = 3/4 + 1/(2 pi)
  const double closed = 0.75 + 0.5 / kPi;
  CHECK(std::abs(e.multiplier - closed) < 1e-11);
  const double rho = 1e6;
  CHECK(rel_err(exact_average(mpsk_ser(4), ray, rho) * rho, closed) < 1e-4);
}

TEST_CASE("signed combination rule") {
  const auto ray = make_channel("rayleigh");
  const auto q = mqam_ser(4);
  const auto e = asymptote(q, ray);
  CHECK(e.scale == 1.0);
  // Independent value: terms 2 Q(sqrt x) and -Q(sqrt x)^2 with g1 = 2 sin^2 / c, c = 1.
  const double q1 = gamma_fn(2.0) / kPi * integrate([](double t) { return 2.0 * std::sin(t) * std::sin(t); }, 0, kPi / 2).value;
  const double q2 = gamma_fn(2.0) / kPi * integrate([](double t) { return 2.0 * std::sin(t) * std::sin(t); }, 0, kPi / 4).value;
  CHECK(std::abs(e.coefficient - (2.0 * q1 - q2)) < 1e-11);

  const double gap = solve_crossing_db([&](double db) { return e(db_to_linear(db)); }, 1e-6, 20, 90) -
                     solve_crossing_db([&](double db) { return exact_average(q, ray, db_to_linear(db)); }, 1e-6, 20, 90);
  CHECK(std::abs(gap) < 0.1);

  auto b = std::make_shared<const ErrorRateModel>(bpsk_ber());
  const auto single = ErrorRateModel::combination({{1.0, b}}, {1.0, 0.5}, "single");
  const auto es = asymptote(single, ray);
  const auto em = asymptote(*b, ray);
  CHECK(es.coefficient == doctest::Approx(em.coefficient).epsilon(1e-15));
  CHECK(es(1e4) == doctest::Approx(em(1e4)).epsilon(1e-15));

  const auto zero = ErrorRateModel::combination({{1.0, b}, {-1.0, b}}, {1.0, 0.5}, "zero");
  CHECK_THROWS_AS(asymptote(zero, ray), std::domain_error);
  CHECK_THROWS_AS(asymptote_combination(bpsk_ber(), ray.view()), std::invalid_argument);
}

TEST_CASE("estimate invariants") {
  for (const auto& name : kCatalog) {
    const auto ch = make_channel(name);
    for (const auto& m : builtins()) {
      CAPTURE(name);
      CAPTURE(m.label());
      const auto e = asymptote(m, ch);
      CHECK(e.multiplier > 0.0);
      CHECK(e.scale > 0.0);
      CHECK(e.coefficient > 0.0);
      CHECK(rel_err(e.coefficient, e.multiplier * std::pow(e.scale, e.exponent)) < 1e-12);
      double prev = kInf;
      for (double db = 0.0; db <= 80.0; db += 4.0) {
        const double v = e(db_to_linear(db));
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("A is linear in beta") {
  const auto ch = make_channel("nakagami:m=1.7");
  const double a = asymptote(ErrorRateModel::exponential(1.3, 0.5, "a"), ch).coefficient;
  for (double c : {0.1, 3.0, 17.0}) {
    const double b = asymptote(ErrorRateModel::exponential(1.3, 0.5 * c, "b"), ch).coefficient;
    CHECK(rel_err(b, c * a) < 1e-14);
  }
}

TEST_CASE("exact_average examples") {
  CHECK(rel_err(exact_average(dpsk_ber(), make_channel("nakagami:m=2"), 100.0), 0.5 / (51.0 * 51.0)) < 1e-9);
  CHECK(exact_average(dpsk_ber(), make_channel("nakagami:m=2"), 100.0) == doctest::Approx(1.9223e-4).epsilon(1e-4));
  const double bpsk = 0.5 * (1.0 - std::sqrt(100.0 / 101.0));
  CHECK(rel_err(exact_average(bpsk_ber(), make_channel("rayleigh"), 100.0), bpsk) < 1e-9);
  CHECK(bpsk == doctest::Approx(2.4814e-3).epsilon(1e-4));
  for (const auto& m : builtins())
    // Q-type models leave Pe(0) like sqrt(rho), so the limit needs a tiny rho.
    CHECK(std::abs(exact_average(m, make_channel("rayleigh"), 1e-15) - m(0.0)) < 1e-6);
}

TEST_CASE("exact_average against the gamma transform") {
  for (double m : {0.5, 1.0, 2.0, 3.0, 4.5}) {
    const auto ch = make_channel("nakagami:m=" + std::to_string(m));
    for (double rho : {0.1, 10.0, 1e3, 1e5, 1e8}) {
      CAPTURE(m);
      CAPTURE(rho);
      CHECK(rel_err(exact_average(dpsk_ber(), ch, rho), 0.5 * std::pow(1.0 + rho / m, -m)) < 1e-9);
    }
  }
}

TEST_CASE("three exact-average routes agree") {
  for (const char* name : {"rayleigh", "nakagami:m=2", "rician:K=3", "hoyt:q=0.5"}) {
    const auto ch = make_channel(name);
    for (const auto& m : builtins()) {
      for (double rho : {3.0, 300.0, 3e5}) {
        CAPTURE(name);
        CAPTURE(m.label());
        CAPTURE(rho);
        const double pdf_route = exact_average(m, ch, rho);
        CHECK(rel_err(exact_average_from_cdf(m, ch.cdf, rho), pdf_route) < 1e-8);
        CHECK(rel_err(exact_average_from_laplace(m, ch.laplace, rho), pdf_route) < 1e-8);
      }
    }
  }
}

TEST_CASE("bounds_check examples") {
  const auto ray = make_channel("rayleigh");
  const auto t = bounds_check(dpsk_ber(), ray, 100.0);
  CHECK(rel_err(t.lower, 0.5 * std::exp(-1.0) * -std::expm1(-0.01)) < 1e-12);
  CHECK(t.lower == doctest::Approx(1.830e-3).epsilon(1e-3));
  CHECK(rel_err(t.exact, 0.5 / 101.0) < 1e-9);
  CHECK(rel_err(t.upper, 0.5 / 101.0) < 1e-9);
  CHECK(t.lower <= t.exact);

  const auto b = bounds_check(bpsk_ber(), ray, 100.0);
  CHECK(b.lower <= b.exact);
  CHECK(rel_err(b.exact, 2.4814e-3) < 1e-4);
  CHECK(rel_err(b.upper, 0.5 / 101.0) < 1e-9);
  CHECK(b.exact <= b.upper);
  CHECK_THROWS(bounds_check(dpsk_ber(), ray, 100.0, 0.0));
}

TEST_CASE("squeeze: lower <= exact <= upper on a grid") {
  for (const auto& name : kCatalog) {
    const auto ch = make_channel(name);
    for (const auto& m : builtins()) {
      for (double db = 0.0; db <= 60.0; db += 7.5) {
        for (double eta : {0.1, 1.0, 4.0}) {
          const auto t = bounds_check(m, ch, db_to_linear(db), eta);
          CAPTURE(name);
          CAPTURE(m.label());
          CAPTURE(db);
          CHECK(t.lower <= t.exact * (1 + 1e-9));
          CHECK(t.exact <= t.upper * (1 + 1e-9));
        }
      }
    }
  }
}

TEST_CASE("snr_offset_db") {
  const auto ray = make_channel("rayleigh");
  const auto d = asymptote(dpsk_ber(), ray);
  const auto b = asymptote(bpsk_ber(), ray);
  CHECK(std::abs(snr_offset_db(d, b) - 10.0 * std::log10(2.0)) < 1e-9);
  CHECK(snr_offset_db(d, b) == doctest::Approx(3.0103).epsilon(1e-5));
  CHECK(snr_offset_db(d, d) == 0.0);

  const auto n2 = make_channel("nakagami:m=2");
  const auto d2 = asymptote(dpsk_ber(), n2);
  const auto b2 = asymptote(bpsk_ber(), n2);
  CHECK(rel_err(b2.coefficient, 0.375) < 1e-10);
  const double off = snr_offset_db(d2, b2);
  CHECK(std::abs(off - 5.0 * std::log10(1.0 / 0.375)) < 1e-9);
  CHECK(off == doctest::Approx(2.13).epsilon(1e-3));
  auto cross = [&](const ErrorRateModel& m) {
    return solve_crossing_db([&](double db) { return exact_average(m, n2, db_to_linear(db)); }, 1e-6, 0, 80);
  };
  CHECK(std::abs(cross(dpsk_ber()) - cross(bpsk_ber()) - off) < 0.02);

  CHECK_THROWS_AS(snr_offset_db(d, d2), std::invalid_argument);
  const auto other = asymptote(dpsk_ber(), make_channel("hoyt:q=0.5"));
  CHECK_THROWS_AS(snr_offset_db(d, other), std::invalid_argument);
}

TEST_CASE("Wang comparator") {
  // Rayleigh with the BPSK convention: 1/(4 rho).
  const auto w = wang_estimate(1.0, 1.0, 2.0, 1.0);
  CHECK(rel_err(w.array_gain, 4.0) < 1e-14);
  const auto e = asymptote(bpsk_ber(), make_channel("rayleigh"));
  CHECK(rel_err(w(1e8), e(1e8)) < 1e-6);
  // General alpha, beta on Rayleigh: G = 2 alpha beta.
  CHECK(rel_err(wang_estimate(1.0, 1.0, 3.0, 0.7).array_gain, 2.0 * 3.0 * 0.7) < 1e-14);

  for (double m : {2.0, 3.0}) {
    const double a = std::pow(m, m) / gamma_fn(m);
    const auto wn = wang_estimate(a, m, 2.0, 1.0);
    CHECK(wn.diversity_order == m);
    CHECK(wn.array_gain > 0.0);
    CHECK(wn.pdf_prefactor == a);
    const auto en = asymptote(bpsk_ber(), make_channel("nakagami:m=" + std::to_string(m)));
    CHECK(rel_err(wn(1e9), en(1e9)) < 1e-6);
  }

  const auto w1 = wang_estimate(2.0, 1.0, 1.5, 0.8);
  const auto w2 = wang_estimate(2.0, 2.0, 1.5, 0.8);
  const double inner2 = 2.0 * 2.0 * gamma_fn(2.5) / (0.8 * std::sqrt(kPi) * 2.0);
  CHECK(rel_err(w2.array_gain, 1.5 * std::pow(inner2, -0.5)) < 1e-14);
  CHECK(w2.array_gain != w1.array_gain);
  CHECK(rel_err(w2(10.0) / w2(100.0), 100.0) < 1e-12);

  const auto wd = wang_estimate_exponential(1.0, 1.0, 1.0, 0.5);
  CHECK(rel_err(wd(1e6), 0.5e-6) < 1e-12);
  CHECK_THROWS(wang_estimate(0.0, 1.0, 1.0, 1.0));
}

TEST_CASE("empirical diversity order") {
  std::vector<Point> law;
  for (double rho : log_space(10.0, 1e4, 30)) law.push_back({rho, 7.0 * std::pow(rho, -3.0)});
  const auto r = empirical_diversity_order(law);
  CHECK(r.estimate == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.fit.stderr_ < 1e-10);
  CHECK(r.ratio_estimate == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.converged);

  const auto n2 = make_channel("nakagami:m=2");
  const auto curve = sample_snr_window([&](double rho) { return exact_average(dpsk_ber(), n2, rho); }, 40, 60);
  CHECK(curve.size() == 41);
  const auto rn = empirical_diversity_order(curve);
  CHECK(std::abs(rn.estimate - 2.0) < 0.02);
  CHECK(std::abs(rn.ratio_estimate - 2.0) < 0.02);
  CHECK(rn.converged);

  const auto ln = make_channel("lognormal:sigma_db=8");
  const auto lc = sample_snr_window([&](double rho) { return exact_average(dpsk_ber(), ln, rho); }, 10, 40);
  const auto rl = empirical_diversity_order(lc);
  CHECK_FALSE(rl.converged);
  CHECK(rl.window_estimates[0] < rl.window_estimates[1]);
  CHECK(rl.window_estimates[1] < rl.window_estimates[2]);

  std::vector<Point> bad{{1.0, 1.0}, {2.0, 0.5}};
  CHECK_THROWS(empirical_diversity_order(bad));
  std::vector<Point> unordered{{2.0, 1.0}, {1.0, 0.5}, {3.0, 0.2}};
  CHECK_THROWS(empirical_diversity_order(unordered));
}

TEST_CASE("Tauberian consistency on error-rate and CDF slopes") {
  for (const auto& name : kCatalog) {
    CAPTURE(name);
    const auto ch = make_channel(name);
    const double tol = ch.divergent_slowly_varying ? 0.1 : 0.02;
    const auto curve = sample_snr_window([&](double rho) { return exact_average(dpsk_ber(), ch, rho); }, 50, 70);
    CHECK(std::abs(empirical_diversity_order(curve).estimate - ch.variation_exponent) < tol);
    const auto cdf = sample_log_grid(ch.cdf, 1e-7, 1e-5, 40);
    CHECK(std::abs(loglog_slope(cdf).slope - ch.variation_exponent) < tol);
  }
}

TEST_CASE("exact over asymptote ratio converges") {
  for (const auto& name : kCatalog) {
    const auto ch = make_channel(name);
    if (ch.variation_exponent > 3.0) continue;
    for (const auto& m : builtins()) {
      CAPTURE(name);
      CAPTURE(m.label());
      const auto e = asymptote(m, ch);
      const double r50 = exact_average(m, ch, 1e5) / e(1e5);
      const double r80 = exact_average(m, ch, 1e8) / e(1e8);
      if (ch.divergent_slowly_varying) {
        // l(z) grows like log(1/z), so the ratio error decays like
        // c / log(rho): the product with log(rho) barely moves.
        const double dev50 = std::abs(r50 - 1.0), dev80 = std::abs(r80 - 1.0);
        CHECK(dev80 < dev50);
        const double rate = dev80 * std::log(1e8) / (dev50 * std::log(1e5));
        CHECK(rate > 0.85);
        CHECK(rate < 1.0);
      } else {
        CHECK(r50 >= 0.9);
        CHECK(r50 <= 1.1);
        CHECK(r80 >= 0.99);
        CHECK(r80 <= 1.01);
      }
    }
  }
}

TEST_CASE("curve_over_db is independent of the thread count") {
  const auto ch = make_channel("nakagami:m=2");
  const std::vector<double> grid{0, 5, 10, 15, 20, 25, 30};
  const RealFn f = [&](double rho) { return exact_average(bpsk_ber(), ch, rho); };
  const auto a = curve_over_db(f, grid, 1);
  const auto b = curve_over_db(f, grid, 4);
  REQUIRE(a.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a[i].x == grid[i]);
    CHECK(a[i].y == b[i].y);
  }
}
