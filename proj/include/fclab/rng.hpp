#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fclab {

// Identifies one reproducible random stream. Equal (base_seed, stream_id)
// pairs always yield the identical sequence, independent of thread count.
struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t stream_id = 0;

  // Fixed mixing of a replication (or sub-task) index into a child stream,
  // so per-replication results do not depend on execution order.
  [[nodiscard]] SeedSpec derived(std::uint64_t index) const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

namespace detail {

// splitmix64 finalizer; outputs mix64(key + i * golden) pass BigCrush.
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_key(const SeedSpec& s) {
  return mix64(s.base_seed ^ mix64(s.stream_id + 0x632BE59BD9B4E019ULL));
}

}  // namespace detail

inline SeedSpec SeedSpec::derived(std::uint64_t index) const {
  return SeedSpec{base_seed,
                  detail::mix64(stream_id + detail::kGolden * (index + 1))};
}

// Quantile of the standard normal distribution, Wichura's PPND16 algorithm.
// Absolute error below 1e-15 over (0, 1).
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: p must be in (0,1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -value : value;
}

// Stateless counter-based stream: draw i is a pure function of (seed, i).
class CounterRng {
public:
  explicit CounterRng(SeedSpec seed) : key_(detail::stream_key(seed)) {}

  // Uniform on the open interval (0, 1).
  double uniform() { return uniform_at(counter_++); }

  double normal() { return inverse_normal_cdf(uniform()); }

  [[nodiscard]] double uniform_at(std::uint64_t counter) const {
    const std::uint64_t bits = detail::mix64(key_ + counter * detail::kGolden);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  void skip_to(std::uint64_t counter) { counter_ = counter; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace fclab
