#pragma once

#include <cmath>
#include <stdexcept>

namespace medlfrm {

// Digamma by upward recurrence until the argument reaches 8, then the
// asymptotic series through x^-12. Absolute error below 1e-12 on (0, inf).
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 8.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // log x - 1/(2x) - sum_n B_{2n} / (2n x^{2n})
  double series = inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Entropy of Bernoulli(p); caller is responsible for clamping p away from {0,1}.
inline double bernoulli_entropy(double p) {
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

}  // namespace medlfrm
