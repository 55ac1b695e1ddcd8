#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>

#include "cavity_entropy/errors.hpp"

namespace cavity_entropy::numerics {

// Pairwise (cascade) summation; error grows like log(n) instead of n.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// Scaled complementary error function exp(z^2) erfc(z) for z >= 0.
inline double erfcx(double z) {
  if (z < 0.0) return std::exp(z * z) * std::erfc(z);
  if (z < 5.0) return std::exp(z * z) * std::erfc(z);
  // Laplace continued fraction, evaluated bottom-up:
  // erfcx(z) = (1/sqrt(pi)) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
  double tail = z;
  for (int k = 60; k >= 1; --k) tail = z + (0.5 * k) / tail;
  return std::numbers::inv_sqrtpi / tail;
}

// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F&& f, double lo, double hi, double x_tol) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw RootBracketError("bisect: no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  while (hi - lo > x_tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace cavity_entropy::numerics
