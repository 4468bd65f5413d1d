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

#ifndef KCQF_BENCH_RUNNER_HPP
#define KCQF_BENCH_RUNNER_HPP

#include <kcqf/baselines.hpp>
#include <kcqf/bench/metrics.hpp>
#include <kcqf/bench/scenario.hpp>
#include <kcqf/quotient_filter.hpp>
#include <kcqf/random.hpp>
#include <kcqf/ssm.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * \file
 * \brief Monte Carlo experiment runner.
 *
 * Every run m draws its truth from `derive_seed(master, m, fnv1a("truth"))`. Each filter gets its
 * own stream `derive_seed(master, m, fnv1a(label))` where the label is e.g. `kcqf-3` or `pf-rr`,
 * so adding or removing a filter never changes the draws of another.
 */

namespace kcqf::bench {

/// Metrics of one (filter, d) column.
struct FilterResult {
  FilterKind kind = FilterKind::kcqf;
  int d = 0;  ///< 0 for filters without key conditions
  std::string label;
  ErmsResult erms;
  double cpu_seconds = 0.0;        ///< wall-clock per run, averaged over runs
  long degenerate_steps = 0;       ///< summed over runs
  std::vector<double> final_ess;   ///< ESS at the last step, one entry per run
  std::string error;               ///< nonempty if the filter failed; metrics are then empty

  [[nodiscard]] bool ok() const { return error.empty(); }
};

struct RunReport {
  std::vector<FilterResult> filters;
  nlohmann::json config;  ///< realized configuration

  [[nodiscard]] const FilterResult* find(FilterKind kind, int d = 0) const {
    for (const FilterResult& f : filters) {
      if (f.kind == kind && f.d == d) {
        return &f;
      }
    }
    return nullptr;
  }
};

inline std::string column_label(FilterKind kind, int d) {
  return kind == FilterKind::kcqf ? "kcqf-" + std::to_string(d) : std::string(filter_id(kind));
}

/// Everything a filter needs for one scenario, built once.
struct ScenarioContext {
  SystemModel model;
  InitialStateSpec init;
  NoiseSpec proc;
  NoiseSpec meas;
  NoiseSpec baseline_proc;  ///< white stand-in for filters that assume Gaussian, Markovian noise
  NoiseSpec baseline_meas;
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;

  explicit ScenarioContext(const ScenarioConfig& cfg)
      : model(build_model(cfg)),
        init(build_initial(cfg)),
        proc(build_noise(cfg.process_noise, cfg.horizon)),
        meas(build_noise(cfg.measurement_noise, cfg.horizon)) {
    const double qv = cfg.baseline_process_variance.value_or(nominal_variance(cfg.process_noise));
    const double rv = nominal_variance(cfg.measurement_noise);
    q = Eigen::MatrixXd::Constant(1, 1, qv);
    r = Eigen::MatrixXd::Constant(1, 1, rv);
    baseline_proc = cfg.process_noise.kind == "white" ? proc : NoiseSpec{WhiteGaussian{q}};
    baseline_meas = cfg.measurement_noise.kind == "white" ? meas : NoiseSpec{WhiteGaussian{r}};
  }
};

namespace detail {

struct Column {
  FilterKind kind;
  int d;
  int window_len;
};

inline std::vector<Column> expand_columns(const ScenarioConfig& cfg) {
  std::vector<Column> cols;
  for (const FilterSpec& f : cfg.filters) {
    if (f.kind == FilterKind::kcqf) {
      for (const int d : f.d) {
        cols.push_back({f.kind, d, f.window_len});
      }
    } else {
      cols.push_back({f.kind, 0, 0});
    }
  }
  return cols;
}

inline std::vector<Estimate> run_column(const Column& col, const ScenarioConfig& cfg, const ScenarioContext& ctx,
                                        const Eigen::MatrixXd& measurements, Rng& rng) {
  switch (col.kind) {
    case FilterKind::kcqf: {
      KcqfConfig kc;
      kc.d = col.d;
      kc.window_len = col.window_len;
      kc.sample_count = cfg.sample_count;
      return kcqf_run(ctx.model, ctx.init, ctx.proc, ctx.meas, measurements, kc, rng);
    }
    case FilterKind::ekf:
      return baselines::gaussian_run(baselines::GaussianFilter::ekf, ctx.model, ctx.init, measurements, ctx.q, ctx.r);
    case FilterKind::ukf:
      return baselines::gaussian_run(baselines::GaussianFilter::ukf, ctx.model, ctx.init, measurements, ctx.q, ctx.r,
                                     cfg.ut);
    case FilterKind::ckf:
      return baselines::gaussian_run(baselines::GaussianFilter::ckf, ctx.model, ctx.init, measurements, ctx.q, ctx.r);
    case FilterKind::pf_rr:
    case FilterKind::pf_sr: {
      baselines::PfOptions opt;
      opt.resampler =
          col.kind == FilterKind::pf_rr ? baselines::Resampler::residual : baselines::Resampler::stratified;
      return baselines::pf_run(ctx.model, ctx.init, ctx.baseline_proc, ctx.baseline_meas, measurements,
                               cfg.particle_count, opt, rng);
    }
  }
  throw std::logic_error("run_column: unhandled filter");
}

}  // namespace detail

/// Runs every configured filter on M shared truth trajectories.
inline RunReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const ScenarioContext ctx(cfg);
  const std::vector<detail::Column> cols = detail::expand_columns(cfg);

  std::vector<Eigen::MatrixXd> truths;
  std::vector<Eigen::MatrixXd> measurements;
  truths.reserve(static_cast<std::size_t>(cfg.mc_runs));
  measurements.reserve(static_cast<std::size_t>(cfg.mc_runs));
  for (int m = 0; m < cfg.mc_runs; ++m) {
    Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(m), fnv1a("truth")));
    Trajectory tr = simulate_truth(ctx.model, ctx.init, ctx.proc, ctx.meas, cfg.horizon, rng);
    truths.push_back(std::move(tr.states));
    measurements.push_back(std::move(tr.measurements));
  }

  RunReport report;
  report.config = to_json(cfg);
  for (const detail::Column& col : cols) {
    FilterResult res;
    res.kind = col.kind;
    res.d = col.d;
    res.label = column_label(col.kind, col.d);
    const std::uint64_t stream = fnv1a(res.label);
    std::vector<std::vector<Estimate>> estimates;
    estimates.reserve(truths.size());
    double seconds = 0.0;
    try {
      for (int m = 0; m < cfg.mc_runs; ++m) {
        Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(m), stream));
        const auto start = std::chrono::steady_clock::now();
        std::vector<Estimate> est = detail::run_column(col, cfg, ctx, measurements[m], rng);
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const Estimate& e : est) {
          if (!e.mean.allFinite()) {
            throw numerical_error(res.label + ": non-finite estimate in run " + std::to_string(m));
          }
          res.degenerate_steps += e.degenerate ? 1 : 0;
        }
        res.final_ess.push_back(est.empty() ? 0.0 : est.back().ess);
        estimates.push_back(std::move(est));
      }
      res.erms = compute_erms(truths, estimates);
      res.cpu_seconds = cfg.record_timing ? seconds / cfg.mc_runs : 0.0;
    } catch (const std::exception& e) {
      res.error = e.what();
      res.erms = {};
      res.final_ess.clear();
      res.degenerate_steps = 0;
    }
    report.filters.push_back(std::move(res));
  }
  return report;
}

/// Convenience: E_rms bar of one column, or NaN when absent or failed.
inline double erms_bar(const RunReport& report, FilterKind kind, int d = 0) {
  const FilterResult* f = report.find(kind, d);
  return (f != nullptr && f->ok()) ? f->erms.mean : std::numeric_limits<double>::quiet_NaN();
}

/// Restricts a scenario to a single KCQF column.
inline ScenarioConfig single_kcqf(ScenarioConfig cfg, int d, int window_len = 0) {
  cfg.filters = {FilterSpec{FilterKind::kcqf, {d}, window_len}};
  return cfg;
}

// Sample-count sweeps ----------------------------------------------------------------------------

inline const std::vector<Eigen::Index>& sweep_grid() {
  static const std::vector<Eigen::Index> grid{50, 100, 200, 500, 1000, 2000, 5000};
  return grid;
}

struct SweepPoint {
  Eigen::Index sample_count = 0;
  double e_rms_bar = 0.0;
};

/// E_rms bar of KCQF-d as a function of N_s.
inline std::vector<SweepPoint> sample_count_sweep(const ScenarioConfig& base, int d,
                                                  const std::vector<Eigen::Index>& grid = sweep_grid()) {
  std::vector<SweepPoint> out;
  for (const Eigen::Index n : grid) {
    ScenarioConfig cfg = single_kcqf(base, d);
    cfg.sample_count = n;
    cfg.record_timing = false;
    const RunReport rep = run_scenario(cfg);
    const FilterResult& f = rep.filters.front();
    if (!f.ok()) {
      throw std::runtime_error("sweep at N_s=" + std::to_string(n) + " failed: " + f.error);
    }
    out.push_back({n, f.erms.mean});
  }
  return out;
}

}  // namespace kcqf::bench

#endif  // KCQF_BENCH_RUNNER_HPP
