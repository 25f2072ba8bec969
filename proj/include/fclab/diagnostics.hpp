#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fclab/errors.hpp"
#include "fclab/gaussian_model.hpp"
#include "fclab/hypothesis.hpp"
#include "fclab/posterior.hpp"
#include "fclab/valid_im.hpp"

namespace fclab {

// One simulation setting: data-generating experiment, hypothesis under
// study, and whether the parameter space carries a known lower bound
// (the constrained 1-D case).
struct StudySetup {
  GaussianExperiment experiment;
  Hypothesis hypothesis;
  bool constrained = false;
  double lower_bound = 0.0;
};

// Squared-length hypothesis in dimension 2 with Theta of length 1:
// H = {theta : ||theta|| > 1}, a co-convex set with Theta on its boundary.
inline StudySetup make_example1() {
  return StudySetup{
      GaussianExperiment(Vec{1.0, 0.0}, Mat::identity(2)),
      Hypothesis(BallComplement{Vec{0.0, 0.0}, 1.0}),
      false, 0.0};
}

// Bounded normal mean: X ~ N(Theta, 1) with Theta >= 0 known, and the
// false hypothesis H = (Theta, inf).
inline StudySetup make_example2(double theta_star = 0.0) {
  if (theta_star < 0.0) {
    throw std::domain_error("make_example2: theta_star must respect the lower bound 0");
  }
  return StudySetup{
      GaussianExperiment(Vec{theta_star}, Mat::identity(1)),
      Hypothesis(HalfLineConstrained{theta_star, 0.0}),
      true, 0.0};
}

struct ReplicationRun {
  std::size_t n_reps = 0;
  SeedSpec seed;
  std::vector<Probability> values_precise;
  std::vector<Probability> values_valid;  // empty when not requested
  std::vector<std::string> methods_used;  // distinct posterior method tags
};

struct ReplicationOptions {
  bool include_valid_im = true;
  std::size_t n_threads = 1;
  std::size_t mc_draws = 10'000;     // Monte Carlo fallback size per replication
  std::size_t opt_budget = 2'000;    // valid-IM optimizer budget per replication
};

// Runs n_reps independent replications: draw X_i under the experiment
// (seed derived from the replication index), compute Pi_{X_i}(H) by the
// best available posterior path and optionally the valid IM's lower
// probability. Results are written by index, so any thread count yields
// identical output.
inline ReplicationRun run_replications(const StudySetup& setup, std::size_t n_reps,
                                       SeedSpec seed,
                                       ReplicationOptions opts = {}) {
  if (n_reps < 100) throw std::domain_error("run_replications: n_reps must be >= 100");
  ReplicationRun run;
  run.n_reps = n_reps;
  run.seed = seed;
  run.values_precise.assign(n_reps, Probability(0.0));
  if (opts.include_valid_im) run.values_valid.assign(n_reps, Probability(0.0));

  const auto& exp = setup.experiment;
  std::vector<char> method_seen(5, 0);

  auto worker = [&](std::size_t lo, std::size_t hi, std::vector<char>& seen) {
    for (std::size_t i = lo; i < hi; ++i) {
      const SeedSpec rep_seed = seed.derived(i);
      Vec x;
      PosteriorProbEstimate est;
      try {
        x = exp.sample_one(rep_seed);
        est = posterior_auto(exp, x, setup.hypothesis, opts.mc_draws,
                             rep_seed.derived(1));
      } catch (const std::exception& e) {
        throw std::runtime_error("replication " + std::to_string(i) + ": " + e.what());
      }
      run.values_precise[i] = est.value;
      seen[static_cast<std::size_t>(est.method)] = 1;
      if (opts.include_valid_im) {
        const auto pc =
            setup.constrained
                ? PossibilityContour::halfline_constrained(
                      x[0], setup.lower_bound, std::sqrt(exp.sigma()(0, 0)))
                : PossibilityContour::unconstrained(exp, x);
        run.values_valid[i] = pc.lower_prob(setup.hypothesis, opts.opt_budget,
                                            rep_seed.derived(2));
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, opts.n_threads);
  if (n_threads == 1) {
    worker(0, n_reps, method_seen);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::vector<char>> seen(n_threads, std::vector<char>(5, 0));
    std::vector<std::exception_ptr> errors(n_threads);
    const std::size_t chunk = (n_reps + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(n_reps, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi, t] {
        try {
          worker(lo, hi, seen[t]);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
    for (const auto& s : seen) {
      for (std::size_t m = 0; m < 5; ++m) method_seen[m] |= s[m];
    }
  }
  for (std::size_t m = 0; m < 5; ++m) {
    if (method_seen[m]) {
      run.methods_used.emplace_back(to_string(static_cast<PosteriorMethod>(m)));
    }
  }
  return run;
}

struct DominanceReport {
  std::vector<std::pair<double, double>> ecdf_grid;  // (t, F_hat(t))
  double max_cdf_excess = 0.0;  // sup over the grid of F_hat(t) - t
  Probability min_value{1.0};
  double tolerance = 0.0;       // one-sided Kolmogorov band used
  bool dominates_uniform = false;
};

// Empirical CDF of the replicated probabilities on a uniform grid, with a
// one-sided check against the Unif(0,1) CDF. The band is the ~95%
// one-sided Kolmogorov quantile 1.36/sqrt(n) plus 0.001 slack.
inline DominanceReport dominance_report(const std::vector<Probability>& values,
                                        std::size_t grid_size = 512) {
  if (values.empty()) throw std::domain_error("dominance_report: empty values");
  if (grid_size < 2) throw std::domain_error("dominance_report: grid_size must be >= 2");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  DominanceReport rep;
  rep.min_value = Probability(sorted.front());
  rep.tolerance = 1.36 / std::sqrt(n) + 0.001;
  rep.ecdf_grid.reserve(grid_size);
  rep.max_cdf_excess = -1.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    const double f = static_cast<double>(it - sorted.begin()) / n;
    rep.ecdf_grid.emplace_back(t, f);
    rep.max_cdf_excess = std::max(rep.max_cdf_excess, f - t);
  }
  rep.dominates_uniform = rep.max_cdf_excess <= rep.tolerance;
  return rep;
}

struct FcPair {
  double alpha = 0.0;
  Probability exceed_freq{0.0};
  double std_err = 0.0;
  bool is_violation = false;
};

// For each alpha, the frequency of {value >= 1 - alpha}. A violation is
// certified only with 3-standard-error separation above alpha.
inline std::vector<FcPair> find_fc_pair_values(const std::vector<Probability>& values,
                                               const std::vector<double>& alpha_grid) {
  if (values.empty()) throw std::domain_error("find_fc_pair: empty values");
  std::vector<FcPair> out;
  out.reserve(alpha_grid.size());
  const double n = static_cast<double>(values.size());
  for (double alpha : alpha_grid) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::domain_error("find_fc_pair: alpha must be in (0,1)");
    }
    std::size_t hits = 0;
    for (const auto& v : values) {
      if (double(v) >= 1.0 - alpha) ++hits;
    }
    FcPair p;
    p.alpha = alpha;
    const double f = static_cast<double>(hits) / n;
    p.exceed_freq = Probability(f);
    p.std_err = std::sqrt(f * (1.0 - f) / n);
    p.is_violation = f - 3.0 * p.std_err > alpha;
    out.push_back(p);
  }
  return out;
}

// False confidence is defined for false hypotheses only, so the setup's
// hypothesis must exclude theta_star.
inline std::vector<FcPair> find_fc_pair(const StudySetup& setup,
                                        const ReplicationRun& run,
                                        const std::vector<double>& alpha_grid,
                                        bool use_valid_values = false) {
  if (!setup.hypothesis.is_false_at(setup.experiment.theta_star())) {
    throw precondition_error("find_fc_pair: hypothesis is not false at theta_star");
  }
  const auto& values = use_valid_values ? run.values_valid : run.values_precise;
  return find_fc_pair_values(values, alpha_grid);
}

struct Figure2Row {
  double t = 0.0;
  double cdf_bayes = 0.0;
  double cdf_validim = 0.0;
};

enum class Figure2Preset { example1, example2 };

// Paired empirical CDFs of the precise posterior probability and the
// valid IM's lower probability on a 512-point grid.
inline std::vector<Figure2Row> figure2_data(Figure2Preset preset, std::size_t n_reps,
                                            SeedSpec seed,
                                            double example2_theta = 0.0,
                                            ReplicationOptions opts = {}) {
  const StudySetup setup = (preset == Figure2Preset::example1)
                               ? make_example1()
                               : make_example2(example2_theta);
  opts.include_valid_im = true;
  const ReplicationRun run = run_replications(setup, n_reps, seed, opts);

  std::vector<double> precise(run.values_precise.begin(), run.values_precise.end());
  std::vector<double> valid(run.values_valid.begin(), run.values_valid.end());
  std::sort(precise.begin(), precise.end());
  std::sort(valid.begin(), valid.end());
  const double n = static_cast<double>(n_reps);

  constexpr std::size_t kGrid = 512;
  std::vector<Figure2Row> rows;
  rows.reserve(kGrid);
  for (std::size_t i = 0; i < kGrid; ++i) {
    Figure2Row row;
    row.t = static_cast<double>(i) / static_cast<double>(kGrid - 1);
    row.cdf_bayes =
        static_cast<double>(std::upper_bound(precise.begin(), precise.end(), row.t) -
                            precise.begin()) / n;
    row.cdf_validim =
        static_cast<double>(std::upper_bound(valid.begin(), valid.end(), row.t) -
                            valid.begin()) / n;
    rows.push_back(row);
  }
  return rows;
}

// Frequency summary over a sweep of true parameter values for the
// constrained example: how often the Bayes probability saturates at 1 and
// how often the valid IM's lower probability is 0.
struct ThetaSweepRow {
  double theta = 0.0;
  double frac_bayes_one = 0.0;
  double frac_valid_zero = 0.0;
};

inline std::vector<ThetaSweepRow> example2_theta_sweep(
    const std::vector<double>& thetas, std::size_t n_reps, SeedSpec seed,
    ReplicationOptions opts = {}) {
  std::vector<ThetaSweepRow> out;
  out.reserve(thetas.size());
  opts.include_valid_im = true;
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    const ReplicationRun run =
        run_replications(make_example2(thetas[j]), n_reps, seed.derived(j), opts);
    ThetaSweepRow row;
    row.theta = thetas[j];
    for (std::size_t i = 0; i < n_reps; ++i) {
      if (double(run.values_precise[i]) >= 1.0 - 1e-12) row.frac_bayes_one += 1.0;
      if (double(run.values_valid[i]) <= 1e-12) row.frac_valid_zero += 1.0;
    }
    row.frac_bayes_one /= static_cast<double>(n_reps);
    row.frac_valid_zero /= static_cast<double>(n_reps);
    out.push_back(row);
  }
  return out;
}

}  // namespace fclab
