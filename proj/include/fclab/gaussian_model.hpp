#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fclab/linalg.hpp"
#include "fclab/rng.hpp"

namespace fclab {

// The D-dimensional Gaussian experiment: data X ~ N_D(theta_star, sigma)
// with sigma fixed, known and positive definite. Immutable after
// construction; the Cholesky factor is cached for sampling and
// Mahalanobis queries.
class GaussianExperiment {
public:
  GaussianExperiment(Vec theta_star, Mat sigma)
      : theta_star_(std::move(theta_star)), sigma_(std::move(sigma)) {
    const std::size_t d = theta_star_.size();
    if (d == 0) throw std::domain_error("GaussianExperiment: dim must be >= 1");
    if (sigma_.n != d) {
      throw std::domain_error("GaussianExperiment: sigma dimension mismatch");
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (std::fabs(sigma_(i, j) - sigma_(j, i)) > 1e-12) {
          throw std::domain_error("GaussianExperiment: sigma not symmetric");
        }
      }
    }
    chol_ = cholesky(sigma_);  // throws on semidefinite sigma
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double rebuilt = 0.0;
        for (std::size_t k = 0; k < d; ++k) rebuilt += chol_(i, k) * chol_(j, k);
        if (std::fabs(rebuilt - sigma_(i, j)) > 1e-10) {
          throw std::domain_error(
              "GaussianExperiment: Cholesky reconstruction off by more than 1e-10");
        }
      }
    }
  }

  [[nodiscard]] std::size_t dim() const { return theta_star_.size(); }
  [[nodiscard]] const Vec& theta_star() const { return theta_star_; }
  [[nodiscard]] const Mat& sigma() const { return sigma_; }
  [[nodiscard]] const Mat& chol() const { return chol_; }

  // True iff sigma = s^2 I; reports s^2 when so.
  [[nodiscard]] bool isotropic(double* variance = nullptr,
                               double rel_tol = 1e-12) const {
    const double s2 = sigma_(0, 0);
    for (std::size_t i = 0; i < dim(); ++i) {
      for (std::size_t j = 0; j < dim(); ++j) {
        const double want = (i == j) ? s2 : 0.0;
        if (std::fabs(sigma_(i, j) - want) > rel_tol * std::max(1.0, s2)) {
          return false;
        }
      }
    }
    if (variance) *variance = s2;
    return true;
  }

  // Draw with the given mean; each draw is mean + L z, z iid standard
  // normal via the counter-based stream. Draw i uses counters
  // [i*D, (i+1)*D), so subsets are stable under any execution order.
  [[nodiscard]] std::vector<Vec> sample_from(const Vec& mean, SeedSpec seed,
                                             std::size_t n) const {
    if (n < 1) throw std::domain_error("sample: n must be >= 1");
    if (mean.size() != dim()) throw std::domain_error("sample: mean dimension mismatch");
    CounterRng rng(seed);
    std::vector<Vec> out;
    out.reserve(n);
    const std::size_t d = dim();
    Vec z(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        z[j] = inverse_normal_cdf(rng.uniform_at(i * d + j));
      }
      Vec x = mean;
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c <= r; ++c) x[r] += chol_(r, c) * z[c];
      }
      out.push_back(std::move(x));
    }
    return out;
  }

  [[nodiscard]] std::vector<Vec> sample(SeedSpec seed, std::size_t n) const {
    return sample_from(theta_star_, seed, n);
  }

  [[nodiscard]] Vec sample_one(SeedSpec seed) const {
    return sample(seed, 1).front();
  }

  // (x - theta)^T Sigma^{-1} (x - theta) via a triangular solve.
  [[nodiscard]] double mahalanobis_sq(const Vec& x, const Vec& theta) const {
    if (x.size() != dim() || theta.size() != dim()) {
      throw std::domain_error("mahalanobis_sq: dimension mismatch");
    }
    const Vec y = forward_solve(chol_, sub(x, theta));
    return norm_sq(y);
  }

  // Log-likelihood in proportionality form: -1/2 Mahalanobis, additive
  // constant fixed to zero.
  [[nodiscard]] double log_likelihood(const Vec& x, const Vec& theta) const {
    return -0.5 * mahalanobis_sq(x, theta);
  }

private:
  Vec theta_star_;
  Mat sigma_;
  Mat chol_;
};

}  // namespace fclab
