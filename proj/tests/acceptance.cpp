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


/**
 * \file
 * \brief Acceptance checks; prints one PASS/FAIL line per criterion and exits nonzero on any FAIL.
 */

#include <kcqf/baselines.hpp>
#include <kcqf/bench/diagnostics.hpp>
#include <kcqf/bench/runner.hpp>
#include <kcqf/bench/scenario.hpp>
#include <kcqf/klnoise.hpp>
#include <kcqf/quotient_filter.hpp>

#include "support/oracles.hpp"
#include "support/properties.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace {

using namespace kcqf;
using namespace kcqf::bench;
using kcqf::testing::fmt;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

/// Full preset runs shared by several criteria, one per master seed.
struct PresetRuns {
  std::vector<RunReport> reports;
  double seconds_first = 0.0;  ///< wall time of the master-seed-1 run
};

PresetRuns run_preset(const std::string& name) {
  PresetRuns out;
  for (const std::uint64_t seed : kSeeds) {
    ScenarioConfig cfg = preset_scenarios(name);
    cfg.master_seed = seed;
    const auto start = Clock::now();
    out.reports.push_back(run_scenario(cfg));
    if (seed == kSeeds.front()) {
      out.seconds_first = seconds_since(start);
    }
  }
  return out;
}

Verdict c1() {
  ScenarioConfig cfg = single_kcqf(preset_scenarios("example-a"), 2);
  const auto start = Clock::now();
  const double e = erms_bar(run_scenario(cfg), FilterKind::kcqf, 2);
  const double t = seconds_since(start);
  return {e < 5.0 && t < 10.0, "KCQF-2 E_rms_bar = " + fmt(e) + " (< 5), " + fmt(t) + " s (< 10 s)"};
}

Verdict c2() {
  const auto start = Clock::now();
  double at2000 = 0.0;
  double at5000 = 0.0;
  for (const std::uint64_t seed : kSeeds) {
    ScenarioConfig cfg = single_kcqf(preset_scenarios("example-a"), 2);
    cfg.master_seed = seed;
    cfg.record_timing = false;
    const std::vector<SweepPoint> s = sample_count_sweep(cfg, 2, {2000, 5000});
    at2000 += s[0].e_rms_bar / static_cast<double>(kSeeds.size());
    at5000 += s[1].e_rms_bar / static_cast<double>(kSeeds.size());
  }
  const double t = seconds_since(start);
  const bool ok = at2000 >= 4.0 && at2000 <= 5.0 && std::abs(at2000 - at5000) <= 0.5 && t < 300.0;
  return {ok, "N_s=2000: " + fmt(at2000) + " in [4, 5]; N_s=5000: " + fmt(at5000) + "; |diff| = " +
                  fmt(std::abs(at2000 - at5000)) + " (<= 0.5), " + fmt(t) + " s"};
}

Verdict c3(const PresetRuns& a) {
  int held = 0;
  std::string values;
  for (const RunReport& r : a.reports) {
    const double e1 = erms_bar(r, FilterKind::kcqf, 1);
    const double e2 = erms_bar(r, FilterKind::kcqf, 2);
    const double e3 = erms_bar(r, FilterKind::kcqf, 3);
    const double e4 = erms_bar(r, FilterKind::kcqf, 4);
    held += (e2 < e1 && e2 < e4 && e3 < e1 && e3 < e4) ? 1 : 0;
    values += " [" + fmt(e1) + " " + fmt(e2) + " " + fmt(e3) + " " + fmt(e4) + "]";
  }
  return {held >= 4, std::to_string(held) + "/5 seeds with d=2,3 below d=1,4 (need 4);" + values};
}

Verdict c4(const PresetRuns& b) {
  struct Band {
    FilterKind kind;
    int d;
    double lo;
    double hi;
  };
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<Band> bands{{FilterKind::kcqf, 3, 1.32, 2.44}, {FilterKind::kcqf, 2, 1.48, 2.76},
                                {FilterKind::kcqf, 1, 3.36, 6.24}, {FilterKind::pf_rr, 0, 3.62, 6.72},
                                {FilterKind::pf_sr, 0, 3.85, 7.16}, {FilterKind::ukf, 0, 6.1, 11.4},
                                {FilterKind::ekf, 0, 12.0, inf},   {FilterKind::ckf, 0, 12.0, inf}};
  const RunReport& r = b.reports.front();
  bool ok = b.seconds_first < 120.0;
  std::string detail;
  for (const Band& band : bands) {
    const double e = erms_bar(r, band.kind, band.d);
    const bool in = band.hi == inf ? e > band.lo : (e >= band.lo && e <= band.hi);
    ok = ok && in;
    detail += column_label(band.kind, band.d) + "=" + fmt(e) + (in ? "" : "(out)") + " ";
  }
  return {ok, detail + fmt(b.seconds_first) + " s"};
}

Verdict c5(const PresetRuns& b) {
  int held = 0;
  for (const RunReport& r : b.reports) {
    const double k3 = erms_bar(r, FilterKind::kcqf, 3);
    const double pf = erms_bar(r, FilterKind::pf_rr);
    const double ukf = erms_bar(r, FilterKind::ukf);
    const double ekf = erms_bar(r, FilterKind::ekf);
    held += (k3 < pf && pf < ukf && ukf < ekf) ? 1 : 0;
  }
  return {held == 5, "KCQF-3 < PF-RR < UKF < EKF in " + std::to_string(held) + "/5 seeds (need 5)"};
}

Verdict c6(const PresetRuns& b) {
  int held = 0;
  std::string detail;
  for (const RunReport& r : b.reports) {
    std::vector<double> e;
    for (int d = 1; d <= 7; ++d) {
      e.push_back(erms_bar(r, FilterKind::kcqf, d));
    }
    const bool down = e[0] > e[1] && e[1] > e[2];
    const std::vector<double> tail(e.begin() + 2, e.end());
    const double tau = kcqf::testing::kendall_tau(tail);
    held += (down && tau >= 0.0) ? 1 : 0;
    detail += " [" + std::string(down ? "down" : "not-down") + ", tau=" + fmt(tau) + "]";
  }
  return {held >= 4, std::to_string(held) + "/5 seeds decrease d=1..3 and trend up d=3..7 (need 4);" + detail};
}

Verdict c7() {
  const kcqf::testing::OneStepLinearGaussian lg;
  Rng truth_rng(derive_seed(1, 0, fnv1a("truth")));
  const Trajectory tr = simulate_truth(lg.model, lg.init, lg.proc, lg.meas, 1, truth_rng);
  const double y = tr.measurements(0, 0);
  const double target = kcqf::testing::OneStepLinearGaussian::posterior_mean(y);
  bool ok = true;
  std::string detail = "target " + fmt(target) + ":";

  const auto monte_carlo = [&](const std::string& name, const Estimate& e) {
    const double se = std::sqrt(e.covariance(0, 0) / e.ess);
    const double z = std::abs(e.mean(0) - target) / se;
    ok = ok && z <= 5.0;
    detail += " " + name + " " + fmt(z) + " se;";
  };
  KcqfConfig kc;
  kc.d = 1;
  kc.sample_count = 10000;
  Rng kq_rng(derive_seed(1, 0, fnv1a("kcqf-1")));
  monte_carlo("KCQF", kcqf_run(lg.model, lg.init, lg.proc, lg.meas, tr.measurements, kc, kq_rng).front());
  Rng pf_rng(derive_seed(1, 0, fnv1a("pf-rr")));
  monte_carlo("PF", baselines::pf_run(lg.model, lg.init, lg.proc, lg.meas, tr.measurements, 10000, {}, pf_rng).front());

  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  for (const auto& [name, kind] : {std::pair{"EKF", baselines::GaussianFilter::ekf},
                                   std::pair{"UKF", baselines::GaussianFilter::ukf},
                                   std::pair{"CKF", baselines::GaussianFilter::ckf}}) {
    const double err =
        std::abs(baselines::gaussian_run(kind, lg.model, lg.init, tr.measurements, one, one).front().mean(0) - target);
    ok = ok && err <= 1e-8;
    detail += std::string(" ") + name + " |err|=" + fmt(err) + ";";
  }
  return {ok, detail};
}

Verdict c8() {
  const kcqf::testing::OneStepLinearGaussian lg;
  const std::vector<double> grid{1e2, 1e3, 1e4, 1e5};
  std::vector<double> err;
  for (const double n : grid) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng truth_rng(derive_seed(seed, 0, fnv1a("truth")));
      const Trajectory tr = simulate_truth(lg.model, lg.init, lg.proc, lg.meas, 1, truth_rng);
      KcqfConfig kc;
      kc.d = 1;
      kc.sample_count = static_cast<Eigen::Index>(n);
      Rng rng(derive_seed(seed, 0, fnv1a("kcqf-1")));
      const double m = kcqf_run(lg.model, lg.init, lg.proc, lg.meas, tr.measurements, kc, rng).front().mean(0);
      total += std::abs(m - kcqf::testing::OneStepLinearGaussian::posterior_mean(tr.measurements(0, 0)));
    }
    err.push_back(total / 20.0);
  }
  const double slope = kcqf::testing::log_log_slope(grid, err);
  return {slope >= -0.7 && slope <= -0.3, "slope " + fmt(slope) + " in [-0.7, -0.3]; errors " + fmt(err[0]) + " " +
                                              fmt(err[1]) + " " + fmt(err[2]) + " " + fmt(err[3])};
}

Verdict c9() {
  const ScenarioConfig cfg = preset_scenarios("example-a");
  const ScenarioContext ctx(cfg);
  int naive_low = 0;
  int kcqf_high = 0;
  KcqfConfig kc;
  kc.d = 2;
  kc.sample_count = cfg.sample_count;
  for (int m = 0; m < cfg.mc_runs; ++m) {
    Rng truth_rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(m), fnv1a("truth")));
    const Trajectory tr = simulate_truth(ctx.model, ctx.init, ctx.proc, ctx.meas, cfg.horizon, truth_rng);
    Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(m), fnv1a("kcqf-2")));
    const Ensemble ens = init_ensemble(ctx.model, ctx.init, ctx.proc, cfg.sample_count, cfg.horizon, rng);
    const std::vector<double> naive = naive_full_quotient_weights(ens, tr.measurements, ctx.meas, cfg.horizon);
    std::vector<double> w(naive.size());
    const double lse = normalize_log_weights(naive, w);
    const double naive_ess = std::isfinite(lse) ? effective_sample_size(w) : 0.0;
    naive_low += naive_ess < 2.0 ? 1 : 0;
    kcqf_high += kcqf_filter(ens, ctx.meas, tr.measurements, kc).back().ess > 2.0 ? 1 : 0;
  }
  const int need = static_cast<int>(std::ceil(0.9 * cfg.mc_runs));
  return {naive_low >= need && kcqf_high >= need, "naive ESS(52) < 2 in " + std::to_string(naive_low) +
                                                      "/50 runs, KCQF-2 ESS(52) > 2 in " + std::to_string(kcqf_high) +
                                                      "/50 runs (need " + std::to_string(need) + " each)"};
}

Verdict c10() {
  const ScenarioConfig b = preset_scenarios("example-b");
  const kl::CorrelationMatrix r = kl::build_correlation(52, b.process_noise.length_scale);
  const kl::KLBasis basis = kl::kl_decompose(r, b.process_noise.order);
  const double ortho =
      (basis.eigenvectors.transpose() * basis.eigenvectors - Eigen::MatrixXd::Identity(basis.order(), basis.order()))
          .cwiseAbs()
          .maxCoeff();
  const double trace_err = std::abs(basis.spectrum.sum() - 52.0);

  constexpr int kPaths = 100000;
  Rng rng(derive_seed(b.master_seed, 0, fnv1a("kl-variance")));
  Eigen::MatrixXd paths(52, kPaths);
  for (int p = 0; p < kPaths; ++p) {
    paths.col(p) = kl::kl_sample_path(basis, rng);
  }
  double worst_var = 0.0;
  const Eigen::VectorXd mean = paths.rowwise().mean();
  for (Eigen::Index k = 1; k <= 52; ++k) {
    const double var = (paths.row(k - 1).array() - mean(k - 1)).square().mean();
    worst_var = std::max(worst_var, std::abs(var - basis.marginal_variance(k)) / basis.marginal_variance(k));
  }

  constexpr std::size_t kDraws = 1000000;
  constexpr std::size_t kReplicates = 5;
  const double gauss_stat = gaussianity_pair(sample_noise_marginal(b.process_noise, 52, 26, kDraws,
                                                                   derive_seed(b.master_seed, 0, fnv1a("w"))))
                                .sup_distance;
  const double gauss_null = gaussianity_null(kDraws, kReplicates, b.master_seed);
  MarkovWitnessConfig wc;
  wc.draws = kDraws;
  const double markov_stat =
      markov_witness(b, b.process_noise, wc, derive_seed(b.master_seed, 0, fnv1a("markov"))).sup_distance;
  const double markov_null = markov_witness_null(b, wc, kReplicates, b.master_seed);

  const bool ok = ortho <= 1e-8 && trace_err <= 1e-8 && worst_var <= 0.05 && gauss_stat > gauss_null &&
                  markov_stat > markov_null;
  return {ok, "orthonormality " + fmt(ortho) + ", trace error " + fmt(trace_err) + ", worst variance error " +
                  fmt(100.0 * worst_var) + "%, w_26 sup-distance " + fmt(gauss_stat) + " vs null " + fmt(gauss_null) +
                  ", x_2 conditional sup-distance " + fmt(markov_stat) + " vs null " + fmt(markov_null)};
}

Verdict c11() {
  using namespace kcqf::testing;
  const std::vector<std::pair<std::string, std::function<PropertyResult()>>> suites{
      {"normalization", [] { return check_weight_normalization(); }},
      {"covariance", [] { return check_covariance_validity(); }},
      {"permutation", [] { return check_permutation_invariance(); }},
      {"determinism", [] { return check_seed_determinism(); }},
      {"resampling", [] { return check_resampling(); }}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, run] : suites) {
    const PropertyResult r = run();
    ok = ok && r.ok;
    detail += name + (r.ok ? " ok" : " FAILED (" + r.detail + ")") + "; ";
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const PresetRuns a = run_preset("example-a");
  const PresetRuns b = run_preset("example-b");
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"C1 example-a KCQF-2 headline error", c1},
      {"C2 example-a KCQF-2 convergence in N_s", c2},
      {"C3 example-a error is lowest at d=2,3", [&] { return c3(a); }},
      {"C4 example-b error bands", [&] { return c4(b); }},
      {"C5 example-b filter ordering", [&] { return c5(b); }},
      {"C6 example-b d-sweep shape", [&] { return c6(b); }},
      {"C7 one-step linear-Gaussian oracle", c7},
      {"C8 Monte Carlo error rate", c8},
      {"C9 all-conditions weights degenerate, key-condition weights do not", c9},
      {"C10 K-L noise suite", c10},
      {"C11 property suites", c11}};
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
