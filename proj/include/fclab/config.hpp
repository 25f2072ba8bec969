#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fclab/csv.hpp"
#include "fclab/diagnostics.hpp"
#include "fclab/linalg.hpp"

namespace fclab {

// Thrown by config validation; collects every violated field.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::vector<std::string>& problems)
      : std::runtime_error(join(problems)), problems_(problems) {}

  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

private:
  static std::string join(const std::vector<std::string>& ps) {
    std::string s = "invalid config:";
    for (const auto& p : ps) s += "\n  - " + p;
    return s;
  }
  std::vector<std::string> problems_;
};

// Batch run configuration, loadable from a flat key = value text file.
// Matrices are row-major comma lists; "identity" and "diag:a,b,..." are
// accepted shorthands for sigma.
struct ExperimentConfig {
  std::optional<std::string> preset;  // example1 | example2
  std::size_t dim = 0;
  Vec theta_star;
  std::string sigma_spec = "identity";
  std::string hypothesis_variant;  // halfspace | ball_complement | halfline_constrained | superlevel_quadratic
  Vec hyp_g, hyp_anchor, hyp_center, hyp_b;
  std::vector<double> hyp_a;  // row-major matrix of the quadratic
  double hyp_radius = 1.0;
  double hyp_threshold = 0.0;
  double hyp_lower_bound = 0.0;
  std::size_t n_reps = 10'000;
  std::uint64_t base_seed = 0;
  std::vector<double> alpha_grid = {0.05, 0.1, 0.2, 0.25, 0.35, 0.5};
  bool include_valid_im = true;
  std::string output_dir = ".";
  std::string format = "csv";  // figure output: csv | svg
  double example2_theta = 0.0;
  Vec vartheta;                   // boundary point for the noloco command
  std::size_t noloco_samples = 200'000;
  std::size_t n_threads = 1;
  std::size_t mc_draws = 10'000;
  std::size_t opt_budget = 2'000;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);

  // Flat echo of every effective setting; parsing the echo back yields an
  // equivalent configuration.
  [[nodiscard]] std::map<std::string, std::string> to_flat_map() const;

  [[nodiscard]] StudySetup make_setup() const;
  [[nodiscard]] Hypothesis make_hypothesis() const;
  void validate() const;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += format_double(v[i]);
  }
  return s;
}

inline Mat parse_sigma(const std::string& spec, std::size_t dim) {
  if (spec == "identity") return Mat::identity(dim);
  if (spec.rfind("diag:", 0) == 0) {
    const auto d = parse_list(spec.substr(5));
    if (d.size() != dim) throw std::domain_error("sigma diag length != dim");
    return Mat::diagonal(d);
  }
  const auto vals = parse_list(spec);
  if (vals.size() != dim * dim) {
    throw std::domain_error("sigma needs dim*dim row-major entries");
  }
  Mat m(dim);
  m.a = vals;
  return m;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line without '=': " + line);
    }
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return from_map(kv);
}

inline ExperimentConfig ExperimentConfig::from_map(
    const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  std::vector<std::string> problems;
  auto take = [&](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto num = [&](const char* key, auto& dst) {
    if (auto v = take(key)) {
      try {
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(dst)>>) {
          dst = std::stod(*v);
        } else {
          dst = static_cast<std::decay_t<decltype(dst)>>(std::stoull(*v));
        }
      } catch (...) {
        problems.push_back(std::string(key) + ": not a number: " + *v);
      }
    }
  };

  if (auto v = take("preset")) c.preset = *v;
  num("dim", c.dim);
  if (auto v = take("theta_star")) c.theta_star = detail::parse_list(*v);
  if (auto v = take("sigma")) c.sigma_spec = *v;
  if (auto v = take("hypothesis.variant")) c.hypothesis_variant = *v;
  if (auto v = take("hypothesis.g")) c.hyp_g = detail::parse_list(*v);
  if (auto v = take("hypothesis.anchor")) c.hyp_anchor = detail::parse_list(*v);
  if (auto v = take("hypothesis.center")) c.hyp_center = detail::parse_list(*v);
  if (auto v = take("hypothesis.a")) c.hyp_a = detail::parse_list(*v);
  if (auto v = take("hypothesis.b")) c.hyp_b = detail::parse_list(*v);
  num("hypothesis.radius", c.hyp_radius);
  num("hypothesis.threshold", c.hyp_threshold);
  num("hypothesis.lower_bound", c.hyp_lower_bound);
  num("n_reps", c.n_reps);
  num("base_seed", c.base_seed);
  if (auto v = take("alpha_grid")) c.alpha_grid = detail::parse_list(*v);
  if (auto v = take("include_valid_im")) c.include_valid_im = (*v == "true" || *v == "1");
  if (auto v = take("output_dir")) c.output_dir = *v;
  if (auto v = take("format")) c.format = *v;
  num("example2_theta", c.example2_theta);
  if (auto v = take("vartheta")) c.vartheta = detail::parse_list(*v);
  num("noloco_samples", c.noloco_samples);
  num("threads", c.n_threads);
  num("mc_draws", c.mc_draws);
  num("opt_budget", c.opt_budget);

  static const std::vector<std::string> known = {
      "preset", "dim", "theta_star", "sigma", "hypothesis.variant",
      "hypothesis.g", "hypothesis.anchor", "hypothesis.center", "hypothesis.a",
      "hypothesis.b", "hypothesis.radius", "hypothesis.threshold",
      "hypothesis.lower_bound", "n_reps", "base_seed", "alpha_grid",
      "include_valid_im", "output_dir", "format", "example2_theta", "vartheta",
      "noloco_samples", "threads", "mc_draws", "opt_budget"};
  for (const auto& [k, v] : kv) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      problems.push_back("unknown key: " + k);
    }
  }
  if (!problems.empty()) throw config_error(problems);
  return c;
}

inline void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  const bool manual = dim != 0 || !theta_star.empty() || !hypothesis_variant.empty();
  if (preset && manual) {
    problems.emplace_back("preset and manual experiment fields are mutually exclusive");
  }
  if (preset) {
    if (*preset != "example1" && *preset != "example2") {
      problems.push_back("preset: unknown value " + *preset);
    }
  } else {
    if (dim == 0) problems.emplace_back("dim: must be a positive integer");
    if (theta_star.size() != dim) {
      problems.emplace_back("theta_star: length must equal dim");
    }
    if (dim != 0 && theta_star.size() == dim) {
      try {
        (void)GaussianExperiment(theta_star, detail::parse_sigma(sigma_spec, dim));
      } catch (const std::exception& e) {
        problems.push_back(std::string("sigma: ") + e.what());
      }
    }
    if (hypothesis_variant.empty()) {
      problems.emplace_back("hypothesis.variant: required without a preset");
    } else {
      try {
        (void)make_hypothesis();
      } catch (const std::exception& e) {
        problems.push_back(std::string("hypothesis: ") + e.what());
      }
    }
  }
  if (n_reps < 100) problems.emplace_back("n_reps: must be >= 100");
  for (double a : alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) {
      problems.emplace_back("alpha_grid: entries must lie in (0,1)");
      break;
    }
  }
  if (format != "csv" && format != "svg") {
    problems.emplace_back("format: must be csv or svg");
  }
  if (example2_theta < 0.0) problems.emplace_back("example2_theta: must be >= 0");
  if (mc_draws < 1000) problems.emplace_back("mc_draws: must be >= 1000");
  if (opt_budget < 8) problems.emplace_back("opt_budget: must be >= 8");
  if (n_threads < 1) problems.emplace_back("threads: must be >= 1");
  if (!problems.empty()) throw config_error(problems);
}

inline Hypothesis ExperimentConfig::make_hypothesis() const {
  if (hypothesis_variant == "halfspace") {
    return Hypothesis(HalfSpace{hyp_g, hyp_anchor});
  }
  if (hypothesis_variant == "ball_complement") {
    return Hypothesis(BallComplement{hyp_center, hyp_radius});
  }
  if (hypothesis_variant == "halfline_constrained") {
    return Hypothesis(HalfLineConstrained{hyp_threshold, hyp_lower_bound});
  }
  if (hypothesis_variant == "superlevel_quadratic") {
    // phi(theta) = ||A theta - b||^2
    const std::size_t rows = hyp_b.size();
    if (rows == 0 || hyp_a.size() != rows * dim) {
      throw std::domain_error("superlevel_quadratic needs a (rows x dim) and b (rows)");
    }
    const auto a = hyp_a;
    const auto b = hyp_b;
    const std::size_t d = dim;
    ConvexFunction phi;
    phi.eval = [a, b, d, rows](const Vec& th) {
      double s = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        double row = -b[r];
        for (std::size_t c = 0; c < d; ++c) row += a[r * d + c] * th[c];
        s += row * row;
      }
      return s;
    };
    phi.subgradient = [a, b, d, rows](const Vec& th) {
      Vec g(d, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        double row = -b[r];
        for (std::size_t c = 0; c < d; ++c) row += a[r * d + c] * th[c];
        for (std::size_t c = 0; c < d; ++c) g[c] += 2.0 * row * a[r * d + c];
      }
      return g;
    };
    return Hypothesis(SuperlevelSet{phi, hyp_anchor});
  }
  throw std::domain_error("unknown hypothesis.variant: " + hypothesis_variant);
}

inline StudySetup ExperimentConfig::make_setup() const {
  if (preset) {
    if (*preset == "example1") return make_example1();
    return make_example2(example2_theta);
  }
  StudySetup s{GaussianExperiment(theta_star, detail::parse_sigma(sigma_spec, dim)),
               make_hypothesis(), false, 0.0};
  if (hypothesis_variant == "halfline_constrained") {
    s.constrained = true;
    s.lower_bound = hyp_lower_bound;
  }
  return s;
}

inline std::map<std::string, std::string> ExperimentConfig::to_flat_map() const {
  std::map<std::string, std::string> kv;
  if (preset) kv["preset"] = *preset;
  if (!preset) {
    kv["dim"] = std::to_string(dim);
    kv["theta_star"] = detail::format_list(theta_star);
    kv["sigma"] = sigma_spec;
    kv["hypothesis.variant"] = hypothesis_variant;
    if (!hyp_g.empty()) kv["hypothesis.g"] = detail::format_list(hyp_g);
    if (!hyp_anchor.empty()) kv["hypothesis.anchor"] = detail::format_list(hyp_anchor);
    if (!hyp_center.empty()) kv["hypothesis.center"] = detail::format_list(hyp_center);
    if (!hyp_a.empty()) kv["hypothesis.a"] = detail::format_list(hyp_a);
    if (!hyp_b.empty()) kv["hypothesis.b"] = detail::format_list(hyp_b);
    kv["hypothesis.radius"] = format_double(hyp_radius);
    kv["hypothesis.threshold"] = format_double(hyp_threshold);
    kv["hypothesis.lower_bound"] = format_double(hyp_lower_bound);
  }
  kv["n_reps"] = std::to_string(n_reps);
  kv["base_seed"] = std::to_string(base_seed);
  kv["alpha_grid"] = detail::format_list(alpha_grid);
  kv["include_valid_im"] = include_valid_im ? "true" : "false";
  kv["output_dir"] = output_dir;
  kv["format"] = format;
  kv["example2_theta"] = format_double(example2_theta);
  if (!vartheta.empty()) kv["vartheta"] = detail::format_list(vartheta);
  kv["noloco_samples"] = std::to_string(noloco_samples);
  kv["threads"] = std::to_string(n_threads);
  kv["mc_draws"] = std::to_string(mc_draws);
  kv["opt_budget"] = std::to_string(opt_budget);
  return kv;
}

}  // namespace fclab
