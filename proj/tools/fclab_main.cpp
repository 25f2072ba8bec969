// Batch front end: structured config in, CSV tables and SVG plots out,
// with a manifest recording everything needed to reproduce the run.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fclab/config.hpp"
#include "fclab/csv.hpp"
#include "fclab/diagnostics.hpp"
#include "fclab/hypothesis.hpp"
#include "fclab/manifest.hpp"
#include "fclab/svg.hpp"

namespace {

using namespace fclab;

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> preset;
  std::optional<std::size_t> n_reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "flat key = value config file");
  cmd->add_option("--preset", f.preset, "example1 | example2");
  cmd->add_option("--n-reps", f.n_reps, "number of replications");
  cmd->add_option("--seed", f.seed, "base seed (uint64)");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--format", f.format, "figure output format: csv | svg");
  cmd->add_option("--threads", f.threads, "worker threads for replications");
}

ExperimentConfig load_config(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = ExperimentConfig::from_file(f.config_path);
  if (f.preset) cfg.preset = *f.preset;
  if (f.n_reps) cfg.n_reps = *f.n_reps;
  if (f.seed) cfg.base_seed = *f.seed;
  if (f.out_dir) cfg.output_dir = *f.out_dir;
  if (f.format) cfg.format = *f.format;
  if (f.threads) cfg.n_threads = *f.threads;
  cfg.validate();
  return cfg;
}

ReplicationOptions options_of(const ExperimentConfig& cfg) {
  ReplicationOptions opts;
  opts.include_valid_im = cfg.include_valid_im;
  opts.n_threads = cfg.n_threads;
  opts.mc_draws = cfg.mc_draws;
  opts.opt_budget = cfg.opt_budget;
  return opts;
}

void emit_manifest(const char* command, const ExperimentConfig& cfg,
                   const ReplicationRun* run, const StopWatch& watch) {
  RunManifest m;
  m.command = command;
  m.config_echo = cfg.to_flat_map();
  m.base_seed = cfg.base_seed;
  m.duration_ms = watch.elapsed_ms();
  if (run) m.method_tags = run->methods_used;
  m.write(cfg.output_dir);
}

int cmd_simulate(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  const StopWatch watch;
  const StudySetup setup = cfg.make_setup();
  const ReplicationRun run = run_replications(
      setup, cfg.n_reps, SeedSpec{cfg.base_seed, 0}, options_of(cfg));

  std::string csv = "rep_index,pi_precise,pi_valid_lower\n";
  for (std::size_t i = 0; i < run.n_reps; ++i) {
    csv += std::to_string(i) + "," + format_double(run.values_precise[i]) + ",";
    if (cfg.include_valid_im) csv += format_double(run.values_valid[i]);
    csv += "\n";
  }
  write_file_atomic(std::filesystem::path(cfg.output_dir) / "replications.csv", csv);
  emit_manifest("simulate", cfg, &run, watch);
  return 0;
}

int cmd_diagnose(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  const StopWatch watch;
  const StudySetup setup = cfg.make_setup();
  const ReplicationRun run = run_replications(
      setup, cfg.n_reps, SeedSpec{cfg.base_seed, 0}, options_of(cfg));

  const DominanceReport dom = dominance_report(run.values_precise);
  std::optional<DominanceReport> dom_valid;
  if (cfg.include_valid_im) dom_valid = dominance_report(run.values_valid);

  std::string csv = "t,ecdf_precise,ecdf_valid\n";
  for (std::size_t i = 0; i < dom.ecdf_grid.size(); ++i) {
    csv += format_double(dom.ecdf_grid[i].first) + "," +
           format_double(dom.ecdf_grid[i].second) + ",";
    if (dom_valid) csv += format_double(dom_valid->ecdf_grid[i].second);
    csv += "\n";
  }
  write_file_atomic(std::filesystem::path(cfg.output_dir) / "dominance.csv", csv);

  auto fc_csv = [](const std::vector<FcPair>& pairs) {
    std::string s = "alpha,exceed_freq,std_err,is_violation\n";
    for (const auto& p : pairs) {
      s += format_double(p.alpha) + "," + format_double(p.exceed_freq) + "," +
           format_double(p.std_err) + "," + (p.is_violation ? "true" : "false") +
           "\n";
    }
    return s;
  };
  write_file_atomic(std::filesystem::path(cfg.output_dir) / "fc_pairs.csv",
                    fc_csv(find_fc_pair(setup, run, cfg.alpha_grid)));
  if (cfg.include_valid_im) {
    write_file_atomic(std::filesystem::path(cfg.output_dir) / "fc_pairs_valid.csv",
                      fc_csv(find_fc_pair(setup, run, cfg.alpha_grid, true)));
  }
  emit_manifest("diagnose", cfg, &run, watch);
  return 0;
}

int cmd_figure(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  if (!cfg.preset) {
    std::cerr << "figure: a preset (example1 | example2) is required\n";
    return 2;
  }
  const StopWatch watch;
  const bool is_ex1 = *cfg.preset == "example1";
  const auto rows = figure2_data(
      is_ex1 ? Figure2Preset::example1 : Figure2Preset::example2, cfg.n_reps,
      SeedSpec{cfg.base_seed, 0}, cfg.example2_theta, options_of(cfg));

  const std::string stem = is_ex1 ? "figure2a" : "figure2b";
  if (cfg.format == "csv") {
    std::string csv = "t,cdf_bayes,cdf_validim\n";
    for (const auto& r : rows) {
      csv += format_double(r.t) + "," + format_double(r.cdf_bayes) + "," +
             format_double(r.cdf_validim) + "\n";
    }
    write_file_atomic(std::filesystem::path(cfg.output_dir) / (stem + ".csv"), csv);
  } else {
    std::vector<std::pair<double, double>> black, red;
    for (const auto& r : rows) {
      black.emplace_back(r.t, r.cdf_bayes);
      red.emplace_back(r.t, r.cdf_validim);
    }
    write_file_atomic(std::filesystem::path(cfg.output_dir) / (stem + ".svg"),
                      render_cdf_svg(black, red, stem));
  }
  if (!is_ex1) {
    // sweep of the true parameter, for investigating the boundary-case
    // behavior of the two curves
    std::vector<double> thetas;
    for (int i = 0; i <= 8; ++i) thetas.push_back(0.25 * i);
    ReplicationOptions sweep_opts = options_of(cfg);
    const auto sweep = example2_theta_sweep(
        thetas, std::min<std::size_t>(cfg.n_reps, 2000),
        SeedSpec{cfg.base_seed, 1}, sweep_opts);
    std::string csv = "theta,frac_bayes_one,frac_valid_zero\n";
    for (const auto& r : sweep) {
      csv += format_double(r.theta) + "," + format_double(r.frac_bayes_one) + "," +
             format_double(r.frac_valid_zero) + "\n";
    }
    write_file_atomic(
        std::filesystem::path(cfg.output_dir) / "figure2b_theta_sweep.csv", csv);
  }
  emit_manifest("figure", cfg, nullptr, watch);
  return 0;
}

int cmd_noloco(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  if (cfg.vartheta.empty()) {
    std::cerr << "noloco: vartheta is required\n";
    return 2;
  }
  const StopWatch watch;
  const Hypothesis h = cfg.make_hypothesis();
  const NolocoCertificate cert =
      noloco_check(h, cfg.vartheta, cfg.noloco_samples, SeedSpec{cfg.base_seed, 0});

  std::string header = "is_noloco";
  std::string row = cert.is_noloco ? "true" : "false";
  for (std::size_t i = 0; i < cfg.vartheta.size(); ++i) {
    header += ",sv_" + std::to_string(i);
    row += ",";
    if (cert.supporting_vector) row += format_double((*cert.supporting_vector)[i]);
  }
  header += ",gap_measure_estimate,gap_std_err,violations\n";
  row += "," + format_double(cert.gap_measure_estimate) + "," +
         format_double(cert.gap_std_err) + "," + std::to_string(cert.violations) +
         "\n";
  write_file_atomic(std::filesystem::path(cfg.output_dir) / "noloco.csv",
                    header + row);
  emit_manifest("noloco", cfg, nullptr, watch);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"false-confidence simulation and diagnostics"};
  app.require_subcommand(1);

  CommonFlags fs, fd, ff, fn;
  auto* simulate = app.add_subcommand("simulate", "replicated posterior probabilities");
  add_common(simulate, fs);
  auto* diagnose = app.add_subcommand("diagnose", "dominance and false-confidence tables");
  add_common(diagnose, fd);
  auto* figure = app.add_subcommand("figure", "paired CDF curves for a preset");
  add_common(figure, ff);
  auto* noloco = app.add_subcommand("noloco", "supporting-hyperplane certificate");
  add_common(noloco, fn);

  CLI11_PARSE(app, argc, argv);
  try {
    if (simulate->parsed()) return cmd_simulate(fs);
    if (diagnose->parsed()) return cmd_diagnose(fd);
    if (figure->parsed()) return cmd_figure(ff);
    if (noloco->parsed()) return cmd_noloco(fn);
  } catch (const fclab::precondition_error& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
