#pragma once

#include <cmath>
#include <numbers>

namespace ordfdr {

/// Mills ratio R(x) = Q(x) / phi(x) for x >= 5, by backward evaluation of
/// the continued fraction 1/(x+ 1/(x+ 2/(x+ 3/(x+ ...)))).
inline double mills_ratio_cf(double x) {
  constexpr int kTerms = 80;
  double f = x;
  for (int k = kTerms; k >= 1; --k) f = x + k / f;
  return 1.0 / f;
}

/// log(1 - Phi(x)), finite for every finite x.
inline double log_normal_upper_tail(double x) {
  if (x < -5.0) return std::log1p(-0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0));
  if (x < 5.0) return std::log(0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0));
  const double log_phi = -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
  return log_phi + std::log(mills_ratio_cf(x));
}

/// (1 - Phi(a)) / (1 - Phi(b)) evaluated in log space.
inline double normal_upper_tail_ratio(double a, double b) {
  return std::exp(log_normal_upper_tail(a) - log_normal_upper_tail(b));
}

}  // namespace ordfdr
