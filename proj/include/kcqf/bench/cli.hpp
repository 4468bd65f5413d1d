// Copyright 2026 The KCQF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KCQF_BENCH_CLI_HPP
#define KCQF_BENCH_CLI_HPP

#include <kcqf/bench/diagnostics.hpp>
#include <kcqf/bench/output.hpp>
#include <kcqf/bench/runner.hpp>
#include <kcqf/bench/scenario.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

/**
 * \file
 * \brief Command-line front end of the benchmark harness.
 *
 * \code
 * kcqf_bench run --preset example-a --filter kcqf --d 2 --seed 1 --out a.csv
 * kcqf_bench run --scenario my.json --mc-runs 10
 * kcqf_bench figure --id fig4 --preset example-a --out plots
 * kcqf_bench list-presets
 * \endcode
 */

namespace kcqf::bench {

/// Options shared by `run` and `figure`.
struct CliOverrides {
  std::vector<std::string> filters;
  std::vector<int> d;
  std::optional<Eigen::Index> samples;
  std::optional<int> mc_runs;
  std::optional<std::uint64_t> seed;
  std::optional<int> window_len;
  bool no_timing = false;
};

/// Applies command-line overrides on top of a scenario.
/**
 * `--filter` replaces the filter list. `--d` replaces the d list of every KCQF entry; a KCQF
 * entry named on the command line without `--d` keeps the scenario's list, or {2} if it had none.
 */
inline ScenarioConfig apply_overrides(ScenarioConfig cfg, const CliOverrides& o) {
  if (!o.filters.empty()) {
    std::vector<int> preset_d;
    for (const FilterSpec& f : cfg.filters) {
      if (f.kind == FilterKind::kcqf) {
        preset_d = f.d;
      }
    }
    std::vector<FilterSpec> chosen;
    for (const std::string& id : o.filters) {
      FilterSpec f;
      f.kind = parse_filter_id(id);
      if (f.kind == FilterKind::kcqf) {
        f.d = preset_d.empty() ? std::vector<int>{2} : preset_d;
      }
      chosen.push_back(std::move(f));
    }
    cfg.filters = std::move(chosen);
  }
  for (FilterSpec& f : cfg.filters) {
    if (f.kind != FilterKind::kcqf) {
      continue;
    }
    if (!o.d.empty()) {
      f.d = o.d;
    }
    if (o.window_len) {
      f.window_len = *o.window_len;
    }
  }
  if (o.samples) {
    cfg.sample_count = *o.samples;
    cfg.particle_count = *o.samples;
  }
  if (o.mc_runs) {
    cfg.mc_runs = *o.mc_runs;
  }
  if (o.seed) {
    cfg.master_seed = *o.seed;
  }
  if (o.no_timing) {
    cfg.record_timing = false;
  }
  cfg.validate();
  return cfg;
}

inline void print_summary(const RunReport& report, std::ostream& out) {
  for (const FilterResult& f : report.filters) {
    if (f.ok()) {
      out << f.label << "  E_rms_bar=" << format_number(f.erms.mean) << "  cpu_s/run=" << format_number(f.cpu_seconds)
          << "  degenerate_steps=" << f.degenerate_steps << "\n";
    } else {
      out << f.label << "  FAILED: " << f.error << "\n";
    }
  }
}

/// Produces the data file of one figure; returns its path.
inline std::string write_figure(const std::string& id, const ScenarioConfig& scenario, const CliOverrides& o,
                                const std::string& dir, std::size_t draws, std::ostream& out) {
  check_figure_id(id);
  if (id == "fig1" || id == "fig2" || id == "fig3") {
    ScenarioConfig cfg = scenario;
    if (id == "fig1") {
      cfg.filters.erase(std::remove_if(cfg.filters.begin(), cfg.filters.end(),
                                       [](const FilterSpec& f) { return f.kind != FilterKind::kcqf; }),
                        cfg.filters.end());
    }
    cfg = apply_overrides(cfg, o);
    const RunReport report = run_scenario(cfg);
    print_summary(report, out);
    return emit_plotdata(report, id, dir);
  }
  if (id == "fig4" || id == "fig6") {
    const int d = o.d.empty() ? (id == "fig4" ? 2 : 3) : o.d.front();
    CliOverrides rest = o;
    rest.samples.reset();
    rest.filters.clear();
    rest.d.clear();
    const ScenarioConfig cfg = apply_overrides(single_kcqf(scenario, d), rest);
    std::vector<Eigen::Index> grid = sweep_grid();
    if (o.samples) {
      grid.erase(std::remove_if(grid.begin(), grid.end(), [&](Eigen::Index n) { return n > *o.samples; }), grid.end());
    }
    const std::vector<SweepPoint> sweep = sample_count_sweep(cfg, d, grid);
    for (const SweepPoint& p : sweep) {
      out << "kcqf-" << d << "  N_s=" << p.sample_count << "  E_rms_bar=" << format_number(p.e_rms_bar) << "\n";
    }
    return emit_plotdata(sweep, id, dir);
  }
  const std::uint64_t seed = o.seed.value_or(scenario.master_seed);
  if (id == "fig5a") {
    const int step = std::min(26, scenario.horizon);
    const std::vector<double> w =
        sample_noise_marginal(scenario.process_noise, scenario.horizon, step, draws, derive_seed(seed, 0, fnv1a("w")));
    const DensityPair pair = gaussianity_pair(w);
    out << "w_" << step << " sup-distance to moment-matched Gaussian: " << format_number(pair.sup_distance) << "\n";
    return emit_plotdata(pair, id, dir);
  }
  MarkovWitnessConfig wc;
  wc.draws = draws;
  const DensityPair pair =
      markov_witness(scenario, scenario.process_noise, wc, derive_seed(seed, 0, fnv1a("markov")));
  out << "x_2 conditional sup-distance: " << format_number(pair.sup_distance) << "\n";
  return emit_plotdata(pair, id, dir);
}

/// Entry point of `kcqf_bench`; returns the process exit code.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Key conditional quotient filter benchmark harness", "kcqf_bench"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string preset;
  std::string scenario_path;
  std::string out_path;
  const auto add_overrides = [&o](CLI::App* sub) {
    sub->add_option("--filter", o.filters, "filter id (repeatable): kcqf, ekf, ukf, ckf, pf-rr, pf-sr");
    sub->add_option("--d", o.d, "key-condition count for kcqf (repeatable)");
    sub->add_option("--samples", o.samples, "ensemble size N_s (also N_p)");
    sub->add_option("--mc-runs", o.mc_runs, "Monte Carlo runs M");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--window", o.window_len, "kcqf candidate window in steps (0 = d)");
    sub->add_flag("--no-timing", o.no_timing, "report zero cpu time so output is byte-reproducible");
  };

  CLI::App* run = app.add_subcommand("run", "run a scenario and write the CSV report");
  auto* preset_opt = run->add_option("--preset", preset, "preset name");
  auto* scenario_opt = run->add_option("--scenario", scenario_path, "JSON scenario file");
  preset_opt->excludes(scenario_opt);
  run->add_option("--out", out_path, "CSV output path");
  add_overrides(run);

  std::string figure_id;
  std::string figure_preset;
  std::string figure_dir;
  std::size_t draws = 1000000;
  CLI::App* figure = app.add_subcommand("figure", "write plot data for one figure");
  figure->add_option("--id", figure_id, "fig1, fig2, fig3, fig4, fig5a, fig5b or fig6")->required();
  figure->add_option("--preset", figure_preset, "preset name")->required();
  figure->add_option("--out", figure_dir, "output directory")->required();
  figure->add_option("--draws", draws, "sample count for fig5a/fig5b");
  add_overrides(figure);

  CLI::App* list = app.add_subcommand("list-presets", "print the preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (list->parsed()) {
      for (const std::string& name : preset_names()) {
        out << name << "\n";
      }
      return 0;
    }
    if (run->parsed()) {
      if (preset.empty() && scenario_path.empty()) {
        err << "error: run needs --preset <name> or --scenario <file>\n" << run->help();
        return 2;
      }
      ScenarioConfig cfg = preset.empty() ? load_scenario(scenario_path) : preset_scenarios(preset);
      cfg = apply_overrides(cfg, o);
      const std::string path = !out_path.empty() ? out_path : cfg.csv_path;
      const RunReport report = run_scenario(cfg);
      print_summary(report, out);
      if (!path.empty()) {
        emit_csv(report, path);
        out << "wrote " << path << "\n";
      }
      return 0;
    }
    const std::string path =
        write_figure(figure_id, preset_scenarios(figure_preset), o, figure_dir, draws, out);
    out << "wrote " << path << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace kcqf::bench

#endif  // KCQF_BENCH_CLI_HPP
