#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fclab/errors.hpp"
#include "fclab/gaussian_model.hpp"
#include "fclab/hypothesis.hpp"
#include "fclab/special_functions.hpp"

namespace fclab {

enum class PosteriorMethod {
  closed_form_halfspace,
  closed_form_ball,
  closed_form_trunc1d,
  monte_carlo,
  importance_weighted,
};

inline const char* to_string(PosteriorMethod m) {
  switch (m) {
    case PosteriorMethod::closed_form_halfspace: return "closed_form_halfspace";
    case PosteriorMethod::closed_form_ball: return "closed_form_ball";
    case PosteriorMethod::closed_form_trunc1d: return "closed_form_trunc1d";
    case PosteriorMethod::monte_carlo: return "monte_carlo";
    case PosteriorMethod::importance_weighted: return "importance_weighted";
  }
  return "?";
}

// A value of Pi_x(H) with the path that produced it. Closed forms carry
// zero standard error.
struct PosteriorProbEstimate {
  Probability value;
  PosteriorMethod method = PosteriorMethod::monte_carlo;
  double std_err = 0.0;
  std::size_t n_draws = 0;
  bool asymptotic_branch = false;  // Mills-ratio branch of the 1-D truncation
};

// Pi_x of a half-space under the flat-prior posterior N_D(x, Sigma):
// 1 - F(-g^T (x - anchor) / sqrt(g^T Sigma g)).
inline PosteriorProbEstimate posterior_halfspace(const GaussianExperiment& exp,
                                                 const Vec& x, const HalfSpace& h) {
  if (x.size() != exp.dim() || h.g.size() != exp.dim()) {
    throw std::domain_error("posterior_halfspace: dimension mismatch");
  }
  const double quad = dot(h.g, matvec(exp.sigma(), h.g));
  if (!(quad > 0.0) || !std::isfinite(quad)) {
    throw singularity_error("posterior_halfspace: g^T Sigma g not positive");
  }
  const double z = dot(h.g, sub(x, h.anchor)) / std::sqrt(quad);
  return {Probability(1.0 - normal_cdf(-z)),
          PosteriorMethod::closed_form_halfspace, 0.0, 0};
}

// Monte Carlo posterior probability: proportion of draws from N_D(x, Sigma)
// landing in h.
inline PosteriorProbEstimate posterior_prob_mc(const GaussianExperiment& exp,
                                               const Vec& x, const Hypothesis& h,
                                               std::size_t n, SeedSpec seed) {
  if (n < 1000) throw std::domain_error("posterior_prob_mc: n must be >= 1000");
  const auto draws = exp.sample_from(x, seed, n);
  std::size_t hits = 0;
  for (const auto& d : draws) {
    if (h.contains(d)) ++hits;
  }
  const double v = static_cast<double>(hits) / static_cast<double>(n);
  return {Probability(v), PosteriorMethod::monte_carlo,
          std::sqrt(v * (1.0 - v) / static_cast<double>(n)), n};
}

// Ball-complement probability. For isotropic Sigma = s^2 I this is exact:
// 1 - noncentral_chi2_cdf(r^2/s^2, D, ||x - center||^2 / s^2). Otherwise
// falls back to Monte Carlo.
inline PosteriorProbEstimate posterior_ball_complement(
    const GaussianExperiment& exp, const Vec& x, const BallComplement& h,
    std::size_t mc_fallback_n = 100'000, SeedSpec mc_seed = {}) {
  if (x.size() != exp.dim() || h.center.size() != exp.dim()) {
    throw std::domain_error("posterior_ball_complement: dimension mismatch");
  }
  double s2 = 0.0;
  if (exp.isotropic(&s2)) {
    const double xq = h.radius * h.radius / s2;
    const double ncp = norm_sq(sub(x, h.center)) / s2;
    const double inside = noncentral_chi2_cdf(xq, static_cast<int>(exp.dim()), ncp);
    return {Probability(1.0 - inside), PosteriorMethod::closed_form_ball, 0.0, 0};
  }
  return posterior_prob_mc(exp, x, Hypothesis(h), mc_fallback_n, mc_seed);
}

namespace detail {

// log of the upper tail Q(t) = 1 - F(t) for large t, two-term Mills ratio.
inline double log_normal_upper_tail_asymptotic(double t) {
  return -0.5 * t * t - std::log(t * std::sqrt(2.0 * M_PI)) +
         std::log1p(-1.0 / (t * t) + 3.0 / (t * t * t * t));
}

}  // namespace detail

// 1-D constrained posterior: the N(x, sd^2) law truncated to
// [lower_bound, inf), evaluated on (threshold, inf). A Mills-ratio branch
// handles x far below the lower bound, where the direct ratio is 0/0.
inline PosteriorProbEstimate posterior_trunc_halfline(double x,
                                                      const HalfLineConstrained& h,
                                                      double sd = 1.0) {
  if (!(sd > 0.0)) throw std::domain_error("posterior_trunc_halfline: sd must be > 0");
  const double a = (h.threshold - x) / sd;
  const double b = (h.lower_bound - x) / sd;
  PosteriorProbEstimate est;
  est.method = PosteriorMethod::closed_form_trunc1d;
  if (b > 38.0) {
    est.asymptotic_branch = true;
    est.value = clamp_probability(
        std::exp(detail::log_normal_upper_tail_asymptotic(a) -
                 detail::log_normal_upper_tail_asymptotic(b)));
    return est;
  }
  // upper tails straight from erfc: 1 - Phi(b) underflows to 0 via subtraction
  const double num = 0.5 * std::erfc(a / std::sqrt(2.0));
  const double den = 0.5 * std::erfc(b / std::sqrt(2.0));
  est.value = clamp_probability(num / den);
  return est;
}

// Generic weighted posterior of a prior density (weight) against the flat
// posterior: self-normalized importance sampling with proposal N_D(x, Sigma).
inline PosteriorProbEstimate posterior_weighted(
    const GaussianExperiment& exp, const Vec& x, const Hypothesis& h,
    const std::function<double(const Vec&)>& prior_weight, std::size_t n,
    SeedSpec seed) {
  if (n < 1000) throw std::domain_error("posterior_weighted: n must be >= 1000");
  const auto draws = exp.sample_from(x, seed, n);
  double sum_w = 0.0;
  double sum_wh = 0.0;
  std::vector<double> w(n);
  std::vector<char> in(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = prior_weight(draws[i]);
    if (w[i] < 0.0) throw std::domain_error("posterior_weighted: negative weight");
    in[i] = h.contains(draws[i]) ? 1 : 0;
    sum_w += w[i];
    sum_wh += w[i] * in[i];
  }
  if (sum_w == 0.0) {
    throw std::domain_error("posterior_weighted: all prior weights are zero");
  }
  const double v = sum_wh / sum_w;
  // delta-method variance of the self-normalized ratio
  double s = 0.0;
  const double wbar = sum_w / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = w[i] * (in[i] - v);
    s += r * r;
  }
  const double se = std::sqrt(s / static_cast<double>(n)) /
                    (wbar * std::sqrt(static_cast<double>(n)));
  return {clamp_probability(v), PosteriorMethod::importance_weighted, se, n};
}

// Best available path for Pi_x(h): closed form when the variant and Sigma
// structure allow, Monte Carlo otherwise.
inline PosteriorProbEstimate posterior_auto(const GaussianExperiment& exp,
                                            const Vec& x, const Hypothesis& h,
                                            std::size_t mc_n, SeedSpec mc_seed) {
  if (const auto* hs = h.get_if<HalfSpace>()) {
    return posterior_halfspace(exp, x, *hs);
  }
  if (const auto* bc = h.get_if<BallComplement>()) {
    return posterior_ball_complement(exp, x, *bc, mc_n, mc_seed);
  }
  if (const auto* hl = h.get_if<HalfLineConstrained>()) {
    if (exp.dim() == 1) {
      return posterior_trunc_halfline(x[0], *hl, std::sqrt(exp.sigma()(0, 0)));
    }
  }
  return posterior_prob_mc(exp, x, h, mc_n, mc_seed);
}

}  // namespace fclab
