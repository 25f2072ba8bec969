// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fclab/config.hpp"
#include "fclab/diagnostics.hpp"
#include "fclab/hypothesis.hpp"
#include "fclab/posterior.hpp"
#include "fclab/valid_im.hpp"

using namespace fclab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name,
               const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << name;
  if (!detail.empty()) std::cout << "  (" << detail << ")";
  std::cout << "\n";
  if (!ok) ++g_failures;
}

Mat random_spd(std::size_t d, CounterRng& rng) {
  Mat a(d);
  for (auto& v : a.a) v = 2.0 * rng.uniform() - 1.0;
  Mat s(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = (i == j) ? 0.5 : 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += a(i, k) * a(j, k);
      s(i, j) = acc;
    }
  }
  return s;
}

ConvexFunction random_quadratic(std::size_t d, CounterRng& rng) {
  // phi(theta) = ||A theta - b||^2 with A kept well conditioned
  std::vector<double> a(d * d);
  Vec b(d);
  for (auto& v : a) v = 2.0 * rng.uniform() - 1.0;
  for (std::size_t i = 0; i < d; ++i) a[i * d + i] += 1.5;
  for (auto& v : b) v = 2.0 * rng.uniform() - 1.0;
  ConvexFunction f;
  f.eval = [a, b, d](const Vec& th) {
    double s = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      double row = -b[r];
      for (std::size_t c = 0; c < d; ++c) row += a[r * d + c] * th[c];
      s += row * row;
    }
    return s;
  };
  f.subgradient = [a, b, d](const Vec& th) {
    Vec g(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
      double row = -b[r];
      for (std::size_t c = 0; c < d; ++c) row += a[r * d + c] * th[c];
      for (std::size_t c = 0; c < d; ++c) g[c] += 2.0 * row * a[r * d + c];
    }
    return g;
  };
  return f;
}

double two_sided_ks(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    ks = std::max({ks, (i + 1) / n - v[i], v[i] - i / n});
  }
  return ks;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr std::size_t kReps = 10'000;
const ReplicationOptions kParallel{true, 4};

}  // namespace

int main() {
  criterion(1, "Monte Carlo vs closed-form half-space, 20 random instances", [](std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    CounterRng rng(SeedSpec{1001, 0});
    const std::size_t dims[3] = {1, 2, 5};
    bool ok = true;
    for (int inst = 0; inst < 20; ++inst) {
      const std::size_t d = dims[inst % 3];
      const Mat sigma = random_spd(d, rng);
      Vec theta(d), x(d), g(d);
      for (auto& v : theta) v = 2.0 * rng.uniform() - 1.0;
      for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
      GaussianExperiment exp(theta, sigma);
      HalfSpace h{g, x};
      double closed = 0.0;
      do {  // keep the target probability away from 0/1
        for (auto& v : h.g) v = 2.0 * rng.uniform() - 1.0;
        if (norm_sq(h.g) < 1e-3) continue;
        for (std::size_t i = 0; i < d; ++i) {
          h.anchor[i] = x[i] + 0.8 * (2.0 * rng.uniform() - 1.0);
        }
        closed = posterior_halfspace(exp, x, h).value;
      } while (closed < 0.05 || closed > 0.95);
      const auto mc = posterior_prob_mc(exp, x, Hypothesis(h), 100'000,
                                        SeedSpec{1002, static_cast<std::uint64_t>(inst)});
      if (std::fabs(double(mc.value) - closed) > 3.0 * mc.std_err) ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail = "runtime " + std::to_string(secs) + " s";
    return ok && secs < 30.0;
  });

  criterion(2, "uniform pivot for a half-space anchored at theta", [](std::string& detail) {
    GaussianExperiment exp({0.4, -0.9}, Mat::diagonal({2.0, 0.5}));
    const HalfSpace h{{1.0, -1.0}, exp.theta_star()};
    std::vector<double> u;
    u.reserve(kReps);
    const SeedSpec seed{1003, 0};
    for (std::size_t i = 0; i < kReps; ++i) {
      u.push_back(posterior_halfspace(exp, exp.sample_one(seed.derived(i)), h).value);
    }
    const double ks = two_sided_ks(u);
    detail = "sup distance " + std::to_string(ks);
    return ks <= 1.63 / std::sqrt(static_cast<double>(kReps));
  });

  criterion(3, "stochastic dominance for co-convex hypotheses", [](std::string& detail) {
    std::vector<StudySetup> setups;
    setups.push_back(make_example1());
    CounterRng rng(SeedSpec{1004, 0});
    for (int k = 0; k < 5; ++k) {
      const std::size_t d = (k < 3) ? 2 : 3;
      Vec theta(d);
      for (auto& v : theta) v = 2.0 * rng.uniform() - 1.0;
      setups.push_back(StudySetup{
          GaussianExperiment(theta, Mat::identity(d)),
          Hypothesis(SuperlevelSet{random_quadratic(d, rng), theta}), false, 0.0});
    }
    bool ok = true;
    for (std::size_t s = 0; s < setups.size(); ++s) {
      ReplicationOptions opts = kParallel;
      opts.include_valid_im = false;
      opts.mc_draws = 4000;
      const auto run = run_replications(setups[s], kReps,
                                        SeedSpec{1005, s}, opts);
      const auto rep = dominance_report(run.values_precise);
      bool strict = false;
      for (const auto& [t, f] : rep.ecdf_grid) {
        if (f < t - 0.01) strict = true;
      }
      if (!rep.dominates_uniform || !strict) {
        ok = false;
        detail += "setup " + std::to_string(s) + " excess " +
                  std::to_string(rep.max_cdf_excess) + "; ";
      }
    }
    return ok;
  });

  criterion(4, "example 1 floor 0.6 and infimum exp(-1/2)", [](std::string& detail) {
    ReplicationOptions opts = kParallel;
    opts.include_valid_im = false;
    const auto run = run_replications(make_example1(), kReps, SeedSpec{1006, 0}, opts);
    double min_rep = 1.0;
    for (const auto& v : run.values_precise) min_rep = std::min(min_rep, double(v));

    // analytic infimum of the closed-form map over ||x|| by 1-D search
    double inf = 1.0;
    for (int i = 0; i <= 5000; ++i) {
      const double dist = 5.0 * i / 5000.0;
      inf = std::min(inf, 1.0 - double(noncentral_chi2_cdf(1.0, 2, dist * dist)));
    }
    // augment with observations near x = 0
    const auto exp1 = make_example1();
    double min_aug = min_rep;
    for (int i = 0; i < 100; ++i) {
      const Vec x{1e-3 * i, 0.0};
      min_aug = std::min(
          min_aug,
          double(posterior_ball_complement(exp1.experiment, x,
                                           *exp1.hypothesis.get_if<BallComplement>())
                     .value));
    }
    detail = "min " + std::to_string(min_rep) + ", infimum " + std::to_string(inf) +
             ", augmented min " + std::to_string(min_aug);
    return min_rep >= 0.6 && std::fabs(inf - std::exp(-0.5)) < 1e-4 &&
           min_aug <= inf + 0.01 && min_aug >= inf - 1e-9;
  });

  criterion(5, "false confidence certified on example 1", [](std::string& detail) {
    ReplicationOptions opts = kParallel;
    opts.include_valid_im = false;
    const auto setup = make_example1();
    const auto run = run_replications(setup, kReps, SeedSpec{1007, 0}, opts);
    const auto pairs = find_fc_pair(setup, run, {0.2, 0.35, 0.5});
    bool any = false;
    for (const auto& p : pairs) {
      if (p.is_violation) {
        any = true;
        detail += "alpha " + std::to_string(p.alpha) + " freq " +
                  std::to_string(double(p.exceed_freq)) + "; ";
      }
    }
    return any;
  });

  criterion(6, "validity of the possibilistic IM on both presets", [](std::string& detail) {
    bool ok = true;
    for (int preset = 0; preset < 2; ++preset) {
      const auto setup = (preset == 0) ? make_example1() : make_example2();
      const auto run = run_replications(setup, kReps,
                                        SeedSpec{1008, static_cast<std::uint64_t>(preset)},
                                        kParallel);
      for (double alpha : {0.05, 0.10, 0.25}) {
        std::size_t hits = 0;
        for (const auto& v : run.values_valid) {
          if (double(v) >= 1.0 - alpha) ++hits;
        }
        const double f = static_cast<double>(hits) / static_cast<double>(kReps);
        const double se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(kReps));
        if (f > alpha + 3.0 * se) {
          ok = false;
          detail += "preset " + std::to_string(preset) + " alpha " +
                    std::to_string(alpha) + " freq " + std::to_string(f) + "; ";
        }
      }
      const auto pairs = find_fc_pair(setup, run,
                                      {0.05, 0.1, 0.2, 0.25, 0.35, 0.5, 0.75, 0.95},
                                      true);
      for (const auto& p : pairs) {
        if (p.is_violation) {
          ok = false;
          detail += "valid-IM violation at alpha " + std::to_string(p.alpha) + "; ";
        }
      }
    }
    return ok;
  });

  criterion(7, "ball projection vs generic optimizer for the lower probability", [](std::string& detail) {
    const auto exp1 = make_example1();
    const auto pc = PossibilityContour::unconstrained(exp1.experiment, {2.0, 0.0});
    const double target = 1.0 - std::exp(-0.5);
    const double proj = pc.lower_prob(exp1.hypothesis);
    const double generic = pc.lower_prob_generic(exp1.hypothesis, 1000, SeedSpec{1009, 0});
    detail = "projection " + std::to_string(proj) + ", generic " + std::to_string(generic);
    return std::fabs(proj - target) <= 1e-6 && std::fabs(generic - target) <= 1e-3;
  });

  criterion(8, "bounded-mean example: truncated posterior and zero support mass", [](std::string& detail) {
    const double trunc =
        posterior_trunc_halfline(0.0, HalfLineConstrained{1.0, 0.0}).value;
    const auto run = run_replications(make_example2(), kReps, SeedSpec{1032, 0},
                                      kParallel);
    std::size_t zeros = 0;
    for (const auto& v : run.values_valid) {
      if (double(v) <= 1e-12) ++zeros;
    }
    const double frac = static_cast<double>(zeros) / static_cast<double>(kReps);
    detail = "trunc " + std::to_string(trunc) + ", zero-support fraction " +
             std::to_string(frac);
    return std::fabs(trunc - 0.317310) <= 1e-6 && frac >= 0.5;
  });

  criterion(9, "noloco certificates: sphere boundary yes, hyperplane no", [](std::string& detail) {
    Hypothesis ball(BallComplement{{0.0, 0.0}, 1.0});
    const auto cert = noloco_check(ball, {1.0, 0.0}, 400'000, SeedSpec{1011, 0});
    // 2-D quadrature oracle for the gap area within the default box [-1,1]^2
    const std::size_t grid = 4000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < grid; ++i) {
      for (std::size_t j = 0; j < grid; ++j) {
        const double px = -1.0 + 2.0 * (i + 0.5) / grid;
        const double py = -1.0 + 2.0 * (j + 0.5) / grid;
        if (px * px + py * py > 1.0 && px <= 1.0) ++hits;
      }
    }
    const double lune = 4.0 * static_cast<double>(hits) / (grid * grid);
    detail = "gap " + std::to_string(cert.gap_measure_estimate) + " vs lune " +
             std::to_string(lune);
    if (!cert.is_noloco) return false;
    if (std::fabs(cert.gap_measure_estimate - lune) > 3.0 * cert.gap_std_err) return false;

    Hypothesis hs(HalfSpace{{1.0, 0.0}, {0.0, 0.0}});
    const auto flat = noloco_check(hs, {0.0, 0.0}, 100'000, SeedSpec{1012, 0});
    return !flat.is_noloco;
  });

  criterion(10, "manifest replay reproduces byte-identical CSVs", [](std::string& detail) {
    const std::string cli = FCLAB_CLI_PATH;
    const fs::path base = fs::temp_directory_path() / "fclab_acceptance";
    fs::remove_all(base);
    fs::create_directories(base / "a");
    fs::create_directories(base / "b");
    auto shell = [](const std::string& cmd) {
      return WEXITSTATUS(std::system((cmd + " > /dev/null 2>&1").c_str()));
    };
    if (shell(cli + " simulate --preset example1 --n-reps 500 --seed 13 --out " +
              (base / "a").string()) != 0) {
      detail = "first run failed";
      return false;
    }
    nlohmann::json manifest;
    std::ifstream(base / "a" / "manifest.json") >> manifest;
    std::ofstream cfg(base / "b" / "config.txt");
    for (const auto& [k, v] : manifest["config_echo"].items()) {
      if (k == "output_dir" || k == "threads") continue;
      cfg << k << " = " << v.get<std::string>() << "\n";
    }
    cfg << "output_dir = " << (base / "b").string() << "\nthreads = 4\n";
    cfg.close();
    if (shell(cli + " simulate --config " + (base / "b" / "config.txt").string()) != 0) {
      detail = "replay failed";
      return false;
    }
    const bool same = slurp(base / "a" / "replications.csv") ==
                      slurp(base / "b" / "replications.csv");
    if (!same) detail = "CSV bytes differ";
    return same;
  });

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(g_failures) + " CRITERIA FAILED")
            << "\n";
  return g_failures == 0 ? 0 : 1;
}
