#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fclab {

using Vec = std::vector<double>;

// Dense square matrix, row-major. Sized for the small dimensions this
// library works in (D is single digits).
struct Mat {
  std::size_t n = 0;
  std::vector<double> a;

  Mat() = default;
  explicit Mat(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  static Mat identity(std::size_t dim) {
    Mat m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static Mat diagonal(const Vec& d) {
    Mat m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
};

inline double dot(const Vec& a, const Vec& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm_sq(const Vec& a) { return dot(a, a); }

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec scale(const Vec& a, double s) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

inline Vec matvec(const Mat& m, const Vec& v) {
  Vec r(m.n, 0.0);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j) r[i] += m(i, j) * v[j];
  return r;
}

// Lower-triangular Cholesky factor L with L L^T = m. Throws if m is not
// positive definite (any pivot <= 0).
inline Mat cholesky(const Mat& m) {
  Mat L(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (s <= 0.0) {
          throw std::domain_error(
              "cholesky: matrix not positive definite (pivot " +
              std::to_string(s) + " at " + std::to_string(i) + ")");
        }
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  return L;
}

// Solves L y = b for lower-triangular L.
inline Vec forward_solve(const Mat& L, const Vec& b) {
  Vec y(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * y[k];
    y[i] = s / L(i, i);
  }
  return y;
}

// Solves L^T z = y for lower-triangular L.
inline Vec backward_solve_t(const Mat& L, const Vec& y) {
  const std::size_t n = y.size();
  Vec z(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= L(k, ii) * z[k];
    z[ii] = s / L(ii, ii);
  }
  return z;
}

}  // namespace fclab
