#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fclab/gaussian_model.hpp"
#include "fclab/hypothesis.hpp"
#include "fclab/special_functions.hpp"

namespace fclab {

enum class ContourKind { gaussian_unconstrained, gaussian_halfline_constrained };

// Possibility contour of the relative-likelihood possibilistic IM.
//
// Unconstrained Gaussian: pi_x(theta) = 1 - chi2_cdf(maha(x, theta), D),
// the probability-integral transform of the relative likelihood, so
// pi_x(Theta) is exactly Unif(0,1) under the model.
//
// Constrained 1-D (known lower bound b): with relative likelihood
// R(x, theta) = L_x(theta) / L_x(max(x, b)), the contour is
// pi_x(theta) = P_theta{ R(X, theta) <= R(x, theta) }, evaluated by the
// closed piecewise form (the quadratic inequality in X has an explicit
// two-interval solution set); a Monte Carlo path is kept as a test oracle.
//
// Upper probability of a hypothesis is the sup of the contour over it
// (maxitivity); lower is 1 minus the upper of the complement.
class PossibilityContour {
public:
  static PossibilityContour unconstrained(GaussianExperiment exp, Vec x) {
    if (x.size() != exp.dim()) {
      throw std::domain_error("PossibilityContour: x dimension mismatch");
    }
    PossibilityContour pc;
    pc.kind_ = ContourKind::gaussian_unconstrained;
    pc.exp_.emplace(std::move(exp));
    pc.x_ = std::move(x);
    return pc;
  }

  static PossibilityContour halfline_constrained(double x, double lower_bound,
                                                 double sd = 1.0) {
    if (!(sd > 0.0)) throw std::domain_error("PossibilityContour: sd must be > 0");
    PossibilityContour pc;
    pc.kind_ = ContourKind::gaussian_halfline_constrained;
    pc.x_ = {x};
    pc.lower_bound_ = lower_bound;
    pc.sd_ = sd;
    return pc;
  }

  [[nodiscard]] ContourKind kind() const { return kind_; }
  [[nodiscard]] const Vec& observed_x() const { return x_; }
  [[nodiscard]] double lower_bound() const { return lower_bound_; }

  [[nodiscard]] Probability contour(const Vec& theta) const {
    if (kind_ == ContourKind::gaussian_unconstrained) {
      return clamp_probability(
          1.0 - chi2_cdf(exp_->mahalanobis_sq(x_, theta),
                         static_cast<int>(exp_->dim())));
    }
    if (theta.size() != 1) {
      throw std::domain_error("contour: constrained kind is 1-D");
    }
    return contour1(theta[0]);
  }

  [[nodiscard]] Probability contour1(double theta) const {
    if (kind_ != ContourKind::gaussian_halfline_constrained) {
      return contour(Vec{theta});
    }
    if (theta < lower_bound_) {
      throw std::domain_error("contour: theta below the known lower bound");
    }
    return constrained_contour_closed(theta);
  }

  // Monte Carlo oracle for the constrained contour: draw X ~ N(theta, sd^2)
  // and count {R(X, theta) <= R(x, theta)}.
  [[nodiscard]] Probability contour1_mc(double theta, std::size_t n,
                                        SeedSpec seed) const {
    if (kind_ != ContourKind::gaussian_halfline_constrained) {
      throw std::domain_error("contour1_mc: constrained kind only");
    }
    if (theta < lower_bound_) {
      throw std::domain_error("contour1_mc: theta below the known lower bound");
    }
    const double r = relative_likelihood(x_[0], theta);
    CounterRng rng(seed);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xx = theta + sd_ * rng.normal();
      if (relative_likelihood(xx, theta) <= r + 1e-15) ++hits;
    }
    return Probability(static_cast<double>(hits) / static_cast<double>(n));
  }

  [[nodiscard]] Probability upper_prob(const Hypothesis& h,
                                       std::size_t opt_budget = 1000,
                                       SeedSpec seed = {}) const {
    return sup_over(h, /*complement=*/false, opt_budget, seed, false);
  }

  [[nodiscard]] Probability upper_prob_of_complement(const Hypothesis& h,
                                                     std::size_t opt_budget = 1000,
                                                     SeedSpec seed = {}) const {
    return sup_over(h, /*complement=*/true, opt_budget, seed, false);
  }

  // Conjugate by construction: 1 - sup of the contour over H^c.
  [[nodiscard]] Probability lower_prob(const Hypothesis& h,
                                       std::size_t opt_budget = 1000,
                                       SeedSpec seed = {}) const {
    return Probability(1.0 - upper_prob_of_complement(h, opt_budget, seed));
  }

  // Multi-start direct search, bypassing the closed-form projections.
  [[nodiscard]] Probability upper_prob_generic(const Hypothesis& h,
                                               std::size_t opt_budget,
                                               SeedSpec seed) const {
    return sup_over(h, false, opt_budget, seed, true);
  }
  [[nodiscard]] Probability lower_prob_generic(const Hypothesis& h,
                                               std::size_t opt_budget,
                                               SeedSpec seed) const {
    return Probability(1.0 - sup_over(h, true, opt_budget, seed, true));
  }

private:
  PossibilityContour() = default;

  [[nodiscard]] double relative_likelihood(double x, double theta) const {
    const double mle = std::max(x, lower_bound_);
    const double dx = (x - theta) / sd_;
    const double dm = (x - mle) / sd_;
    return std::exp(-0.5 * dx * dx + 0.5 * dm * dm);
  }

  [[nodiscard]] Probability constrained_contour_closed(double theta) const {
    const double b = lower_bound_;
    const double r = relative_likelihood(x_[0], theta);
    auto cdf = [&](double t) { return double(normal_cdf((t - theta) / sd_)); };
    double p = 0.0;
    // X >= b branch: (X - theta)^2 >= -2 sd^2 ln r
    const double s = sd_ * std::sqrt(std::max(0.0, -2.0 * std::log(r)));
    p += 1.0 - cdf(std::max(b, theta + s));
    if (theta - s > b) p += cdf(theta - s) - cdf(b);
    // X < b branch: -2 (theta - b) X + theta^2 - b^2 >= -2 sd^2 ln r
    const double c = theta - b;
    if (c > 0.0) {
      const double x_cut =
          (theta * theta - b * b + 2.0 * sd_ * sd_ * std::log(r)) / (2.0 * c);
      p += cdf(std::min(b, x_cut));
    } else if (r >= 1.0 - 1e-15) {
      p += cdf(b);
    }
    return clamp_probability(p);
  }

  // ---- sup of the contour over a hypothesis or its complement ----

  [[nodiscard]] Probability sup_over(const Hypothesis& h, bool complement,
                                     std::size_t budget, SeedSpec seed,
                                     bool force_generic) const {
    if (kind_ == ContourKind::gaussian_halfline_constrained) {
      return sup_constrained(h, complement, budget);
    }
    const auto& var = h.variant();
    if (!force_generic) {
      if (const auto* hs = std::get_if<HalfSpace>(&var)) {
        return sup_halfspace(*hs, complement);
      }
      if (const auto* bc = std::get_if<BallComplement>(&var)) {
        double s2 = 0.0;
        if (exp_->isotropic(&s2)) return sup_ball(*bc, complement);
      }
      if (const auto* hl = std::get_if<HalfLineConstrained>(&var)) {
        // unconstrained 1-D contour over (t, inf) or its complement
        const double t = hl->threshold;
        const bool in_region = complement ? (x_[0] <= t) : (x_[0] > t);
        if (in_region) return Probability(1.0);
        return contour(Vec{t});
      }
    }
    return sup_generic(h, complement, budget, seed);
  }

  [[nodiscard]] Probability sup_halfspace(const HalfSpace& hs, bool complement) const {
    Vec g = complement ? scale(hs.g, -1.0) : hs.g;
    const double slack = dot(g, sub(x_, hs.anchor));
    if (slack >= 0.0) return Probability(1.0);
    // Mahalanobis projection of x onto the boundary hyperplane:
    // proj = x - (slack / g^T Sigma g) Sigma g
    const double quad = dot(g, matvec(exp_->sigma(), g));
    const Vec sg = matvec(exp_->sigma(), g);
    Vec proj = x_;
    for (std::size_t i = 0; i < proj.size(); ++i) proj[i] -= slack / quad * sg[i];
    return contour(proj);
  }

  [[nodiscard]] Probability sup_ball(const BallComplement& bc, bool complement) const {
    const Vec d = sub(x_, bc.center);
    const double dist = std::sqrt(norm_sq(d));
    const bool in_region = complement ? (dist <= bc.radius) : (dist >= bc.radius);
    if (in_region) return Probability(1.0);
    Vec proj;
    if (dist > 0.0) {
      proj = add(bc.center, scale(d, bc.radius / dist));
    } else {
      proj = bc.center;
      proj[0] += bc.radius;  // any boundary point; contour is radial here
    }
    return contour(proj);
  }

  // 1-D sup for the constrained kind: dense grid plus golden-section
  // refinement around the best cell.
  [[nodiscard]] Probability sup_constrained(const Hypothesis& h, bool complement,
                                            std::size_t budget) const {
    const auto* hl = h.get_if<HalfLineConstrained>();
    if (!hl) {
      throw std::domain_error(
          "upper_prob: constrained contour supports HalfLineConstrained only");
    }
    double lo, hi;
    if (!complement) {
      // contour is 1 at the constrained MLE, so the sup is trivial when
      // the MLE lies inside the open half-line
      if (std::max(x_[0], lower_bound_) > hl->threshold) return Probability(1.0);
      lo = std::max(hl->threshold, lower_bound_);
      hi = std::max(lo + 10.0 * sd_, x_[0] + 10.0 * sd_);
    } else {
      lo = lower_bound_;
      hi = hl->threshold;
      if (hi <= lo) return contour1(lo);  // complement degenerates to {lo}
    }
    const std::size_t grid = std::max<std::size_t>(32, budget / 4);
    double best_t = lo;
    double best_v = -1.0;
    for (std::size_t i = 0; i <= grid; ++i) {
      const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid);
      const double v = contour1(t);
      if (v > best_v) {
        best_v = v;
        best_t = t;
      }
    }
    const double cell = (hi - lo) / static_cast<double>(grid);
    double a = std::max(lo, best_t - cell);
    double b = std::min(hi, best_t + cell);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = b - gr * (b - a);
    double c2 = a + gr * (b - a);
    double f1 = contour1(c1);
    double f2 = contour1(c2);
    for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
      if (f1 < f2) {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + gr * (b - a);
        f2 = contour1(c2);
      } else {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - gr * (b - a);
        f1 = contour1(c1);
      }
    }
    best_v = std::max({best_v, f1, f2});
    return Probability(best_v);
  }

  // Multi-start compass search maximizing the contour over the feasible
  // region; infeasible moves are rejected. Returns 0 when no feasible
  // point is ever seen (empty-region convention).
  [[nodiscard]] Probability sup_generic(const Hypothesis& h, bool complement,
                                        std::size_t budget, SeedSpec seed) const {
    const std::size_t d = exp_->dim();
    auto feasible = [&](const Vec& p) {
      const bool in_h = h.contains(p);
      return complement ? !in_h : in_h;
    };
    std::size_t evals = 0;
    auto value = [&](const Vec& p) {
      ++evals;
      return double(contour(p));
    };

    std::optional<Vec> best;
    double best_v = -1.0;
    auto consider = [&](const Vec& p) {
      if (!feasible(p)) return;
      const double v = value(p);
      if (v > best_v) {
        best_v = v;
        best = p;
      }
    };

    consider(x_);
    CounterRng rng(seed);
    const AxisBox* box = nullptr;
    if (const auto* o = h.get_if<OracleSet>()) box = &o->bounding_box;
    const std::size_t n_starts = std::max<std::size_t>(8, budget / 8);
    for (std::size_t i = 0; i < n_starts && evals < budget; ++i) {
      Vec p(d);
      if (box && i % 2 == 0) {
        p = detail::uniform_in_box(*box, rng);
      } else {
        const double s = (i % 3 == 0) ? 0.3 : (i % 3 == 1) ? 1.0 : 3.0;
        Vec z(d);
        for (auto& c : z) c = rng.normal();
        p = x_;
        for (std::size_t r = 0; r < d; ++r) {
          for (std::size_t c = 0; c <= r; ++c) p[r] += s * exp_->chol()(r, c) * z[c];
        }
      }
      consider(p);
    }
    if (!best) return Probability(0.0);

    double step = 0.5;
    while (step > 1e-10 && evals < budget) {
      bool improved = false;
      for (std::size_t k = 0; k < d && evals < budget; ++k) {
        for (double sgn : {1.0, -1.0}) {
          Vec cand = *best;
          cand[k] += sgn * step;
          if (!feasible(cand)) continue;
          const double v = value(cand);
          if (v > best_v) {
            best_v = v;
            best = cand;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return Probability(best_v);
  }

  ContourKind kind_ = ContourKind::gaussian_unconstrained;
  std::optional<GaussianExperiment> exp_;
  Vec x_;
  double lower_bound_ = 0.0;
  double sd_ = 1.0;
};

}  // namespace fclab
