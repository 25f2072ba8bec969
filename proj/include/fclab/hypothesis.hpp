#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fclab/errors.hpp"
#include "fclab/linalg.hpp"
#include "fclab/rng.hpp"

namespace fclab {

// Convex scalar function given by its evaluation and a subgradient map.
struct ConvexFunction {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> subgradient;
};

// Spot-check of convexity and the subgradient inequality on random pairs
// inside [-span, span]^dim. Returns false on the first violation.
inline bool convexity_spot_check(const ConvexFunction& f, std::size_t dim,
                                 SeedSpec seed, double span = 5.0,
                                 int n_pairs = 100, double slack = 1e-9) {
  CounterRng rng(seed);
  auto random_point = [&] {
    Vec p(dim);
    for (auto& c : p) c = span * (2.0 * rng.uniform() - 1.0);
    return p;
  };
  for (int i = 0; i < n_pairs; ++i) {
    const Vec p = random_point();
    const Vec q = random_point();
    const double fp = f.eval(p);
    const double fq = f.eval(q);
    for (double t : {0.25, 0.5, 0.75}) {
      const Vec mid = add(scale(p, t), scale(q, 1.0 - t));
      if (f.eval(mid) > t * fp + (1.0 - t) * fq + slack) return false;
    }
    const Vec g = f.subgradient(p);
    if (fq < fp + dot(g, sub(q, p)) - slack) return false;
  }
  return true;
}

struct AxisBox {
  Vec lo;
  Vec hi;

  [[nodiscard]] double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
};

// {theta : g^T (theta - anchor) > 0}
struct HalfSpace {
  Vec g;
  Vec anchor;
};

// H_phi = {theta : phi(theta) > phi(anchor)}
struct SuperlevelSet {
  ConvexFunction phi;
  Vec anchor;
};

// {theta : ||theta - center||^2 > radius^2}
struct BallComplement {
  Vec center;
  double radius = 1.0;
};

// (threshold, inf) inside the constrained parameter space [lower_bound, inf)
struct HalfLineConstrained {
  double threshold = 0.0;
  double lower_bound = 0.0;
};

// Membership oracle with a bounding box for sampling-based procedures.
struct OracleSet {
  std::function<bool(const Vec&)> member;
  AxisBox bounding_box;
};

class Hypothesis {
public:
  using Variant = std::variant<HalfSpace, SuperlevelSet, BallComplement,
                               HalfLineConstrained, OracleSet>;

  Hypothesis(HalfSpace h) : v_(validate(std::move(h))) {}           // NOLINT
  Hypothesis(SuperlevelSet h) : v_(std::move(h)) {}                 // NOLINT
  Hypothesis(BallComplement h) : v_(validate(std::move(h))) {}      // NOLINT
  Hypothesis(HalfLineConstrained h) : v_(validate(std::move(h))) {} // NOLINT
  Hypothesis(OracleSet h) : v_(validate(std::move(h))) {}           // NOLINT

  [[nodiscard]] const Variant& variant() const { return v_; }

  template <class T>
  [[nodiscard]] const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  // Exact membership; strict inequalities stay strict.
  [[nodiscard]] bool contains(const Vec& theta) const {
    return std::visit(
        [&](const auto& h) -> bool {
          using T = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<T, HalfSpace>) {
            require_dim(theta, h.g.size());
            return dot(h.g, sub(theta, h.anchor)) > 0.0;
          } else if constexpr (std::is_same_v<T, SuperlevelSet>) {
            require_dim(theta, h.anchor.size());
            return h.phi.eval(theta) > h.phi.eval(h.anchor);
          } else if constexpr (std::is_same_v<T, BallComplement>) {
            require_dim(theta, h.center.size());
            return norm_sq(sub(theta, h.center)) > h.radius * h.radius;
          } else if constexpr (std::is_same_v<T, HalfLineConstrained>) {
            require_dim(theta, 1);
            return theta[0] > h.threshold && theta[0] >= h.lower_bound;
          } else {
            require_dim(theta, h.bounding_box.lo.size());
            return h.member(theta);
          }
        },
        v_);
  }

  [[nodiscard]] bool is_false_at(const Vec& theta_star) const {
    return !contains(theta_star);
  }

private:
  static void require_dim(const Vec& theta, std::size_t d) {
    if (theta.size() != d) {
      throw std::domain_error("Hypothesis: dimension mismatch");
    }
  }
  static HalfSpace validate(HalfSpace h) {
    if (norm_sq(h.g) == 0.0) throw std::domain_error("HalfSpace: g must be nonzero");
    if (h.g.size() != h.anchor.size()) {
      throw std::domain_error("HalfSpace: g/anchor dimension mismatch");
    }
    return h;
  }
  static BallComplement validate(BallComplement h) {
    if (!(h.radius > 0.0)) throw std::domain_error("BallComplement: radius must be > 0");
    return h;
  }
  static HalfLineConstrained validate(HalfLineConstrained h) {
    if (h.threshold < h.lower_bound) {
      throw std::domain_error("HalfLineConstrained: threshold below lower_bound");
    }
    return h;
  }
  static OracleSet validate(OracleSet h) {
    if (h.bounding_box.lo.size() != h.bounding_box.hi.size() ||
        h.bounding_box.lo.empty()) {
      throw std::domain_error("OracleSet: bad bounding box");
    }
    for (std::size_t i = 0; i < h.bounding_box.lo.size(); ++i) {
      if (!(h.bounding_box.lo[i] < h.bounding_box.hi[i])) {
        throw std::domain_error("OracleSet: degenerate bounding box");
      }
    }
    return h;
  }

  Variant v_;
};

// Certificate that the complement G of a hypothesis is non-linear locally
// convex at a boundary point: a supporting direction with no sampled
// violation, plus a positive-measure gap between the hypothesis and the
// supporting half-space.
struct NolocoCertificate {
  bool is_noloco = false;
  std::optional<Vec> supporting_vector;
  double gap_measure_estimate = 0.0;
  double gap_std_err = 0.0;
  std::size_t violations = 0;
};

namespace detail {

inline Vec unit(const Vec& v) {
  const double n = std::sqrt(norm_sq(v));
  if (n == 0.0) throw std::domain_error("unit: zero vector");
  return scale(v, 1.0 / n);
}

inline Vec uniform_in_box(const AxisBox& box, CounterRng& rng) {
  Vec p(box.lo.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
  }
  return p;
}

inline Vec random_unit(std::size_t dim, CounterRng& rng) {
  Vec g(dim);
  for (;;) {
    for (auto& c : g) c = rng.normal();
    const double n2 = norm_sq(g);
    if (n2 > 1e-12) return scale(g, 1.0 / std::sqrt(n2));
  }
}

// Default sampling region when the hypothesis variant does not carry one.
inline AxisBox default_noloco_box(const Hypothesis& h, const Vec& vartheta) {
  if (const auto* b = h.get_if<BallComplement>()) {
    AxisBox box{b->center, b->center};
    for (std::size_t i = 0; i < box.lo.size(); ++i) {
      box.lo[i] -= b->radius;
      box.hi[i] += b->radius;
    }
    return box;
  }
  if (const auto* o = h.get_if<OracleSet>()) return o->bounding_box;
  double span = 1.0;
  if (const auto* s = h.get_if<SuperlevelSet>()) {
    span = 2.0 * (1.0 + std::sqrt(norm_sq(sub(vartheta, s->anchor))));
  }
  AxisBox box{vartheta, vartheta};
  for (std::size_t i = 0; i < box.lo.size(); ++i) {
    box.lo[i] -= span;
    box.hi[i] += span;
  }
  return box;
}

}  // namespace detail

// Checks that G, the complement of hypothesis h, is noloco at vartheta.
// vartheta must lie on the boundary of G within 1e-8. The supporting
// direction comes from the subgradient (SuperlevelSet), the radial
// direction (BallComplement), the defining normal (HalfSpace), or a
// direction search (OracleSet). Violations count sampled points of G
// falling strictly outside the supporting half-space; the gap measure is
// a Monte Carlo estimate of the Lebesgue measure of
// H ∩ {g^T (theta - vartheta) <= 0} restricted to the bounding region.
inline NolocoCertificate noloco_check(
    const Hypothesis& h, const Vec& vartheta, std::size_t n_samples,
    SeedSpec seed, std::optional<AxisBox> bounding = std::nullopt) {
  constexpr double kBoundaryTol = 1e-8;
  const AxisBox box = bounding ? *bounding : detail::default_noloco_box(h, vartheta);
  CounterRng rng(seed);

  std::optional<Vec> g;
  std::visit(
      [&](const auto& hy) {
        using T = std::decay_t<decltype(hy)>;
        if constexpr (std::is_same_v<T, HalfSpace>) {
          const double s = dot(hy.g, sub(vartheta, hy.anchor));
          if (std::fabs(s) > kBoundaryTol * std::sqrt(norm_sq(hy.g))) {
            throw precondition_error("noloco_check: vartheta not on the half-space boundary");
          }
          g = hy.g;
        } else if constexpr (std::is_same_v<T, SuperlevelSet>) {
          const double level = hy.phi.eval(hy.anchor);
          if (std::fabs(hy.phi.eval(vartheta) - level) > kBoundaryTol) {
            throw precondition_error("noloco_check: vartheta not on the level set");
          }
          g = hy.phi.subgradient(vartheta);
        } else if constexpr (std::is_same_v<T, BallComplement>) {
          const Vec d = sub(vartheta, hy.center);
          if (std::fabs(std::sqrt(norm_sq(d)) - hy.radius) > kBoundaryTol) {
            throw precondition_error("noloco_check: vartheta not on the sphere");
          }
          g = detail::unit(d);
        } else if constexpr (std::is_same_v<T, HalfLineConstrained>) {
          if (std::fabs(vartheta[0] - hy.threshold) > kBoundaryTol) {
            throw precondition_error("noloco_check: vartheta not at the threshold");
          }
          g = Vec{1.0};
        } else {
          // Boundary bracketing: a small ball around vartheta must contain
          // both members and non-members of G.
          const std::size_t dim = hy.bounding_box.lo.size();
          bool saw_in = false;
          bool saw_out = false;
          for (int i = 0; i < 256 && !(saw_in && saw_out); ++i) {
            const Vec dir = detail::random_unit(dim, rng);
            const Vec p = add(vartheta, scale(dir, 1e-4));
            (hy.member(p) ? saw_out : saw_in) = true;  // member of H <=> outside G
          }
          if (!(saw_in && saw_out)) {
            throw precondition_error("noloco_check: vartheta not bracketing the oracle boundary");
          }
          // Direction search: maximize, over unit g, the worst slack
          // -g^T (theta - vartheta) over sampled points of G.
          auto worst_slack = [&](const Vec& cand) {
            CounterRng inner(seed.derived(1));
            double worst = 1e300;
            std::size_t seen = 0;
            for (std::size_t i = 0; seen < 400 && i < 40'000; ++i) {
              const Vec p = detail::uniform_in_box(hy.bounding_box, inner);
              if (hy.member(p)) continue;  // want points of G = H^c
              ++seen;
              worst = std::min(worst, -dot(cand, sub(p, vartheta)));
            }
            return worst;
          };
          Vec best;
          double best_slack = -1e300;
          for (int i = 0; i < 1000; ++i) {
            const Vec cand = detail::random_unit(dim, rng);
            const double s = worst_slack(cand);
            if (s > best_slack) {
              best_slack = s;
              best = cand;
            }
          }
          // minimax polish on a large fixed sample of G: maximize over unit
          // g the minimum slack, by subgradient ascent at the worst point
          std::vector<Vec> pts;
          pts.reserve(40'000);
          {
            CounterRng inner(seed.derived(2));
            for (std::size_t i = 0; pts.size() < 40'000 && i < 4'000'000; ++i) {
              const Vec p = detail::uniform_in_box(hy.bounding_box, inner);
              if (!hy.member(p)) pts.push_back(sub(p, vartheta));
            }
          }
          auto min_slack = [&](const Vec& cand, const Vec** argmin) {
            double worst = 1e300;
            for (const auto& d : pts) {
              const double s = -dot(cand, d);
              if (s < worst) {
                worst = s;
                if (argmin) *argmin = &d;
              }
            }
            return worst;
          };
          best_slack = min_slack(best, nullptr);
          Vec cur = best;
          for (int it = 0; it < 3000; ++it) {
            const Vec* worst_pt = nullptr;
            const double s = min_slack(cur, &worst_pt);
            if (s > best_slack) {
              best_slack = s;
              best = cur;
            }
            const double eta = 0.2 / std::sqrt(static_cast<double>(it + 1));
            cur = detail::unit(sub(cur, scale(detail::unit(*worst_pt), eta)));
          }
          if (best_slack > -1e-6) g = best;
        }
      },
      h.variant());

  // A vanishing subgradient (vartheta at the minimum of phi) gives no
  // hyperplane direction: abstain.
  if (g && norm_sq(*g) < 1e-24) g.reset();

  NolocoCertificate cert;
  cert.supporting_vector = g;
  if (!g) return cert;  // abstain: no supporting direction found

  // Count sampled points of G outside {g^T (theta - vartheta) <= 0}.
  const double g_norm = std::sqrt(norm_sq(*g));
  std::size_t seen_g = 0;
  for (std::size_t i = 0; seen_g < n_samples && i < 100 * n_samples; ++i) {
    const Vec p = detail::uniform_in_box(box, rng);
    if (h.contains(p)) continue;  // want G = H^c
    ++seen_g;
    if (dot(*g, sub(p, vartheta)) > 1e-9 * g_norm) ++cert.violations;
  }

  // Gap measure: volume of H ∩ supporting half-space within the box.
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vec p = detail::uniform_in_box(box, rng);
    if (h.contains(p) && dot(*g, sub(p, vartheta)) <= 0.0) ++hits;
  }
  const double vol = box.volume();
  const double frac = static_cast<double>(hits) / static_cast<double>(n_samples);
  cert.gap_measure_estimate = vol * frac;
  cert.gap_std_err =
      vol * std::sqrt(frac * (1.0 - frac) / static_cast<double>(n_samples));
  cert.is_noloco = cert.violations == 0 &&
                   cert.gap_measure_estimate - 3.0 * cert.gap_std_err > 0.0;
  return cert;
}

}  // namespace fclab
