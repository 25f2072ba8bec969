#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "fclab/errors.hpp"

namespace fclab {

// A value known to lie in [0,1]. NaN is rejected at construction.
struct Probability {
  double value = 0.0;

  Probability() = default;
  Probability(double v) : value(v) {  // NOLINT: implicit by design
    if (std::isnan(v) || v < 0.0 || v > 1.0) {
      throw std::domain_error("Probability out of [0,1]: " + std::to_string(v));
    }
  }
  operator double() const { return value; }  // NOLINT
};

// Clamps tiny floating-point excursions outside [0,1]; anything beyond
// eps is a genuine bug and still throws.
inline Probability clamp_probability(double v, double eps = 1e-9) {
  if (v < 0.0 && v > -eps) v = 0.0;
  if (v > 1.0 && v < 1.0 + eps) v = 1.0;
  return Probability(v);
}

struct SeriesTolerance {
  double abs_tol = 1e-12;
  int max_terms = 10'000;
};

// Standard normal distribution function.
inline Probability normal_cdf(double z) {
  if (std::isnan(z)) throw std::domain_error("normal_cdf: NaN input");
  return clamp_probability(0.5 * std::erfc(-z / std::sqrt(2.0)));
}

namespace detail {

// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
// Lentz continued fraction for Q otherwise.
inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10'000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(log_prefactor);
  }
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10'000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(log_prefactor) * h;
}

}  // namespace detail

// Chi-squared distribution function with df degrees of freedom.
inline Probability chi2_cdf(double x, int df) {
  if (df < 1) throw std::domain_error("chi2_cdf: df must be positive");
  if (std::isnan(x) || x < 0.0) {
    throw std::domain_error("chi2_cdf: x must be >= 0");
  }
  if (std::isinf(x)) return 1.0;
  return clamp_probability(detail::gamma_p(0.5 * df, 0.5 * x));
}

// Noncentral chi-squared distribution function, evaluated as a Poisson
// mixture of central chi-squared terms. Truncation is certified: the
// remaining Poisson mass times the current (largest remaining) central
// CDF bounds the residual, and the series stops once that bound drops
// below tol.abs_tol.
inline Probability noncentral_chi2_cdf(double x, int df, double ncp,
                                       SeriesTolerance tol = {}) {
  if (df < 1) throw std::domain_error("noncentral_chi2_cdf: df must be positive");
  if (std::isnan(x) || x < 0.0) {
    throw std::domain_error("noncentral_chi2_cdf: x must be >= 0");
  }
  if (std::isnan(ncp) || ncp < 0.0) {
    throw std::domain_error("noncentral_chi2_cdf: ncp must be >= 0");
  }
  if (tol.abs_tol <= 0.0 || tol.max_terms < 1) {
    throw std::domain_error("noncentral_chi2_cdf: invalid tolerance");
  }
  if (ncp == 0.0) return chi2_cdf(x, df);
  if (x == 0.0) return 0.0;

  const double lambda = 0.5 * ncp;
  const double half_x = 0.5 * x;
  // Central CDF at shape a = df/2 + k, advanced by the recurrence
  // P(a+1, x) = P(a, x) - x^a e^{-x} / Gamma(a+1).
  double a = 0.5 * df;
  double central = detail::gamma_p(a, half_x);
  double step = std::exp(a * std::log(half_x) - half_x - std::lgamma(a + 1.0));

  double sum = 0.0;
  double log_pois = -lambda;  // log Poisson(k; lambda) at k = 0
  double pois_mass = 0.0;
  for (int k = 0; k < tol.max_terms; ++k) {
    const double w = std::exp(log_pois);
    sum += w * central;
    pois_mass += w;
    const double residual = (1.0 - pois_mass) * central;
    if (residual < tol.abs_tol) return clamp_probability(sum);
    // advance to k + 1
    log_pois += std::log(lambda) - std::log(static_cast<double>(k + 1));
    central -= step;
    if (central < 0.0) central = 0.0;
    a += 1.0;
    step *= half_x / a;
  }
  throw convergence_error(
      "noncentral_chi2_cdf: series did not converge in " +
          std::to_string(tol.max_terms) + " terms",
      sum, (1.0 - pois_mass) * central);
}

}  // namespace fclab
