#pragma once

#include <cmath>
#include <cstddef>
#include <random>

#include "antiito/model.hpp"

namespace testing_support {

// Composite Simpson rule with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, std::size_t n) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

// Parameters with q - c > 0.
inline antiito::ModelParams robust_params(std::mt19937_64& gen, double sigma_lo = 0.05, double sigma_hi = 3.0) {
  antiito::ModelParams p;
  p.q = uniform(gen, 0.2, 5.0);
  p.c = uniform(gen, 0.0, 0.9 * p.q);
  p.r = uniform(gen, 0.1, 5.0);
  p.v = uniform(gen, 0.3, 3.0);
  p.sigma = uniform(gen, sigma_lo, sigma_hi);
  return p;
}

inline const antiito::ModelParams kCanonical{2.0, 1.0, 1.0, 1.0, 1.0};

}  // namespace testing_support
