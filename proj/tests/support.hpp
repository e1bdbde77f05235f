// Small helpers shared by the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tauber/numerics.hpp"

namespace test {

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

/// Upper bound on the Kolmogorov-Smirnov distance between the empirical CDF
/// of `sorted` and `cdf`, evaluating `cdf` only at `checkpoints` order
/// statistics. Between checkpoints a and b both CDFs are monotone, so the
/// gap is at most max(b/n - F(x_a), F(x_b) - a/n).
inline double ks_upper_bound(const std::vector<double>& sorted, const tauber::RealFn& cdf,
                             std::size_t checkpoints) {
  const std::size_t n = sorted.size();
  const std::size_t step = std::max<std::size_t>(1, n / checkpoints);
  double d = 0.0;
  std::size_t a = 0;
  double fa = 0.0;  // F just below the first sample
  for (std::size_t b = step; ; b += step) {
    b = std::min(b, n);
    const double fb = cdf(sorted[b - 1]);
    d = std::max({d, static_cast<double>(b) / n - fa, fb - static_cast<double>(a) / n});
    if (b == n) {
      d = std::max(d, 1.0 - fb);  // beyond the largest sample
      break;
    }
    a = b;
    fa = fb;
  }
  return d;
}

}  // namespace test
