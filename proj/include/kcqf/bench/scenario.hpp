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

#ifndef KCQF_BENCH_SCENARIO_HPP
#define KCQF_BENCH_SCENARIO_HPP

#include <kcqf/baselines.hpp>
#include <kcqf/klnoise.hpp>
#include <kcqf/models.hpp>
#include <kcqf/ssm.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

/**
 * \file
 * \brief Benchmark scenarios: presets and the JSON scenario file.
 *
 * Scenario files are JSON objects whose keys mirror ScenarioConfig. A file may name a `preset`
 * and override any subset of its fields:
 *
 * \code{.json}
 * {
 *   "preset": "example-b",
 *   "model": "univariate-growth",
 *   "horizon": 52, "mc_runs": 50, "sample_count": 50, "particle_count": 50, "master_seed": 1,
 *   "initial_state": {"mean": 0.0, "variance": 2.0},
 *   "process_noise": {"kind": "kl-uniform", "order": 6, "length_scale": 15.0,
 *                     "xi_half_width": 5.477225575051661, "mean": 0.0},
 *   "measurement_noise": {"kind": "white", "variance": 1.0},
 *   "baseline_process_variance": 10.0,
 *   "ut": {"alpha": 1.0, "beta": 2.0, "kappa": 0.0},
 *   "record_timing": true,
 *   "filters": [{"id": "kcqf", "d": [1, 2, 3], "window_len": 0}, {"id": "ukf"}],
 *   "output": {"csv": "report.csv", "plot_dir": "plots"}
 * }
 * \endcode
 */

namespace kcqf::bench {

enum class FilterKind { kcqf, ekf, ukf, ckf, pf_rr, pf_sr };

inline constexpr std::string_view filter_id(FilterKind kind) {
  switch (kind) {
    case FilterKind::kcqf:
      return "kcqf";
    case FilterKind::ekf:
      return "ekf";
    case FilterKind::ukf:
      return "ukf";
    case FilterKind::ckf:
      return "ckf";
    case FilterKind::pf_rr:
      return "pf-rr";
    case FilterKind::pf_sr:
      return "pf-sr";
  }
  return "?";
}

inline const std::vector<std::string>& filter_ids() {
  static const std::vector<std::string> ids{"kcqf", "ekf", "ukf", "ckf", "pf-rr", "pf-sr"};
  return ids;
}

inline FilterKind parse_filter_id(std::string_view id) {
  for (const FilterKind k : {FilterKind::kcqf, FilterKind::ekf, FilterKind::ukf, FilterKind::ckf, FilterKind::pf_rr,
                             FilterKind::pf_sr}) {
    if (filter_id(k) == id) {
      return k;
    }
  }
  throw std::invalid_argument("unknown filter '" + std::string(id) + "'; valid filters: kcqf, ekf, ukf, ckf, pf-rr, pf-sr");
}

struct FilterSpec {
  FilterKind kind = FilterKind::kcqf;
  std::vector<int> d;  ///< key-condition counts; KCQF only
  int window_len = 0;  ///< KCQF only, 0 = d
};

/// Scalar noise law as it appears in a scenario.
struct NoiseConfig {
  std::string kind = "white";  ///< "white" or "kl-uniform"
  double variance = 1.0;       ///< white only
  int order = 6;               ///< kl-uniform: kept modes
  double length_scale = 15.0;  ///< kl-uniform: kernel length
  double xi_half_width = kl::kDefaultXiHalfWidth;
  double mean = 0.0;  ///< kl-uniform offset
};

struct InitConfig {
  double mean = 0.0;
  double variance = 2.0;
};

struct ScenarioConfig {
  std::string name = "custom";
  std::string model = "univariate-growth";
  InitConfig initial_state;
  NoiseConfig process_noise;
  NoiseConfig measurement_noise;
  int horizon = 52;
  int mc_runs = 50;
  Eigen::Index sample_count = 50;
  Eigen::Index particle_count = 50;
  std::vector<FilterSpec> filters;
  std::optional<double> baseline_process_variance;  ///< Gaussian stand-in Q for EKF/UKF/CKF/PF
  baselines::UtParams ut{1.0, 2.0, 0.0};
  std::uint64_t master_seed = 1;
  bool record_timing = true;
  std::string csv_path;
  std::string plot_dir;

  void validate() const {
    if (mc_runs < 1) {
      throw std::invalid_argument("scenario: mc_runs must be at least 1");
    }
    if (horizon < 1) {
      throw std::invalid_argument("scenario: horizon must be at least 1");
    }
    if (sample_count < 2 || particle_count < 1) {
      throw std::invalid_argument("scenario: sample_count must be >= 2 and particle_count >= 1");
    }
    if (model != "univariate-growth" && model != "random-walk") {
      throw std::invalid_argument("scenario: unknown model '" + model + "'; valid models: univariate-growth, random-walk");
    }
    for (const NoiseConfig* n : {&process_noise, &measurement_noise}) {
      if (n->kind != "white" && n->kind != "kl-uniform") {
        throw std::invalid_argument("scenario: unknown noise kind '" + n->kind + "'");
      }
      if (n->kind == "white" && !(n->variance >= 0.0)) {
        throw std::invalid_argument("scenario: white noise variance must be nonnegative");
      }
    }
    for (const FilterSpec& f : filters) {
      if (f.kind == FilterKind::kcqf) {
        if (f.d.empty()) {
          throw std::invalid_argument("scenario: kcqf filter needs at least one d");
        }
        for (const int d : f.d) {
          if (d < 1) {
            throw std::invalid_argument("scenario: d must be at least 1");
          }
        }
      }
    }
  }
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"example-a", "example-b"};
  return names;
}

inline std::string joined_presets() {
  std::string out;
  for (const std::string& n : preset_names()) {
    out += (out.empty() ? "" : ", ") + n;
  }
  return out;
}

/// The two benchmark scenarios on the univariate growth model.
/**
 * example-a: w ~ N(0, 10), v ~ N(0, 1), x_0 ~ N(0, 2), K = 52, M = 50, N_s = N_p = 50.
 * example-b: as example-a but the process noise is the six-mode K-L process with kernel length 15
 * and xi ~ U[-sqrt(30), sqrt(30)]; the Gaussian-assuming baselines get white N(0, 10) instead.
 */
inline ScenarioConfig preset_scenarios(std::string_view name) {
  ScenarioConfig cfg;
  cfg.name = std::string(name);
  cfg.initial_state = {0.0, 2.0};
  cfg.measurement_noise = NoiseConfig{"white", 1.0};
  cfg.horizon = 52;
  cfg.mc_runs = 50;
  cfg.sample_count = 50;
  cfg.particle_count = 50;
  if (name == "example-a") {
    cfg.process_noise = NoiseConfig{"white", 10.0};
    cfg.filters = {{FilterKind::kcqf, {1, 2, 3, 4}, 0}, {FilterKind::pf_rr, {}, 0}, {FilterKind::pf_sr, {}, 0},
                   {FilterKind::ukf, {}, 0},          {FilterKind::ekf, {}, 0},   {FilterKind::ckf, {}, 0}};
    return cfg;
  }
  if (name == "example-b") {
    cfg.process_noise = NoiseConfig{"kl-uniform"};
    cfg.process_noise.order = 6;
    cfg.process_noise.length_scale = 15.0;
    cfg.process_noise.mean = 0.0;
    cfg.baseline_process_variance = 10.0;
    cfg.filters = {{FilterKind::kcqf, {1, 2, 3, 4, 5, 6, 7}, 0}, {FilterKind::pf_rr, {}, 0},
                   {FilterKind::pf_sr, {}, 0},                   {FilterKind::ekf, {}, 0},
                   {FilterKind::ukf, {}, 0},                     {FilterKind::ckf, {}, 0}};
    return cfg;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'; valid presets: " + joined_presets());
}

// Materialization --------------------------------------------------------------------------------

/// Noise law built from a config for a given horizon.
inline NoiseSpec build_noise(const NoiseConfig& cfg, int horizon) {
  if (cfg.kind == "white") {
    return WhiteGaussian{Eigen::MatrixXd::Constant(1, 1, cfg.variance)};
  }
  if (cfg.kind == "kl-uniform") {
    auto basis = std::make_shared<const kl::KLBasis>(
        kl::kl_decompose(kl::build_correlation(horizon, cfg.length_scale), cfg.order, cfg.xi_half_width, cfg.mean));
    return KLUniform{std::move(basis)};
  }
  throw std::invalid_argument("unknown noise kind '" + cfg.kind + "'");
}

/// Nominal variance used when a Gaussian stand-in is needed.
inline double nominal_variance(const NoiseConfig& cfg) {
  return cfg.kind == "white" ? cfg.variance : cfg.xi_half_width * cfg.xi_half_width / 3.0;
}

inline SystemModel build_model(const ScenarioConfig& cfg) {
  if (cfg.model == "univariate-growth") {
    return models::univariate_growth();
  }
  if (cfg.model == "random-walk") {
    return models::scalar_random_walk();
  }
  throw std::invalid_argument("unknown model '" + cfg.model + "'");
}

inline InitialStateSpec build_initial(const ScenarioConfig& cfg) {
  return GaussianInit{Eigen::VectorXd::Constant(1, cfg.initial_state.mean),
                      Eigen::MatrixXd::Constant(1, 1, cfg.initial_state.variance)};
}

// JSON -------------------------------------------------------------------------------------------

inline nlohmann::json to_json(const NoiseConfig& n) {
  if (n.kind == "white") {
    return {{"kind", n.kind}, {"variance", n.variance}};
  }
  return {{"kind", n.kind},
          {"order", n.order},
          {"length_scale", n.length_scale},
          {"xi_half_width", n.xi_half_width},
          {"mean", n.mean}};
}

inline nlohmann::json to_json(const ScenarioConfig& cfg) {
  nlohmann::json filters = nlohmann::json::array();
  for (const FilterSpec& f : cfg.filters) {
    nlohmann::json j{{"id", std::string(filter_id(f.kind))}};
    if (f.kind == FilterKind::kcqf) {
      j["d"] = f.d;
      j["window_len"] = f.window_len;
    }
    filters.push_back(std::move(j));
  }
  nlohmann::json j{{"name", cfg.name},
                   {"model", cfg.model},
                   {"horizon", cfg.horizon},
                   {"mc_runs", cfg.mc_runs},
                   {"sample_count", cfg.sample_count},
                   {"particle_count", cfg.particle_count},
                   {"master_seed", cfg.master_seed},
                   {"initial_state", {{"mean", cfg.initial_state.mean}, {"variance", cfg.initial_state.variance}}},
                   {"process_noise", to_json(cfg.process_noise)},
                   {"measurement_noise", to_json(cfg.measurement_noise)},
                   {"ut", {{"alpha", cfg.ut.alpha}, {"beta", cfg.ut.beta}, {"kappa", cfg.ut.kappa}}},
                   {"record_timing", cfg.record_timing},
                   {"filters", filters},
                   {"output", {{"csv", cfg.csv_path}, {"plot_dir", cfg.plot_dir}}}};
  if (cfg.baseline_process_variance) {
    j["baseline_process_variance"] = *cfg.baseline_process_variance;
  }
  return j;
}

namespace detail {

inline void merge_noise(NoiseConfig& n, const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("scenario: noise section must be an object");
  }
  n.kind = j.value("kind", n.kind);
  n.variance = j.value("variance", n.variance);
  n.order = j.value("order", n.order);
  n.length_scale = j.value("length_scale", n.length_scale);
  n.xi_half_width = j.value("xi_half_width", n.xi_half_width);
  n.mean = j.value("mean", n.mean);
}

}  // namespace detail

/// Parses a scenario document; unknown top-level keys are rejected.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{"preset",        "name",           "model",
                                              "horizon",       "mc_runs",        "sample_count",
                                              "particle_count", "master_seed",   "initial_state",
                                              "process_noise", "measurement_noise", "baseline_process_variance",
                                              "ut",            "record_timing",  "filters",
                                              "output"};
  if (!j.is_object()) {
    throw std::invalid_argument("scenario: top level must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("scenario: unknown key '" + key + "'");
    }
  }
  ScenarioConfig cfg = j.contains("preset") ? preset_scenarios(j.at("preset").get<std::string>()) : ScenarioConfig{};
  try {
    cfg.name = j.value("name", cfg.name);
    cfg.model = j.value("model", cfg.model);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.mc_runs = j.value("mc_runs", cfg.mc_runs);
    cfg.sample_count = j.value("sample_count", cfg.sample_count);
    cfg.particle_count = j.value("particle_count", cfg.particle_count);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.record_timing = j.value("record_timing", cfg.record_timing);
    if (j.contains("initial_state")) {
      const auto& s = j.at("initial_state");
      cfg.initial_state.mean = s.value("mean", cfg.initial_state.mean);
      cfg.initial_state.variance = s.value("variance", cfg.initial_state.variance);
    }
    if (j.contains("process_noise")) {
      detail::merge_noise(cfg.process_noise, j.at("process_noise"));
    }
    if (j.contains("measurement_noise")) {
      detail::merge_noise(cfg.measurement_noise, j.at("measurement_noise"));
    }
    if (j.contains("baseline_process_variance")) {
      cfg.baseline_process_variance = j.at("baseline_process_variance").get<double>();
    }
    if (j.contains("ut")) {
      const auto& u = j.at("ut");
      cfg.ut.alpha = u.value("alpha", cfg.ut.alpha);
      cfg.ut.beta = u.value("beta", cfg.ut.beta);
      cfg.ut.kappa = u.value("kappa", cfg.ut.kappa);
    }
    if (j.contains("filters")) {
      cfg.filters.clear();
      for (const auto& f : j.at("filters")) {
        FilterSpec spec;
        spec.kind = parse_filter_id(f.at("id").get<std::string>());
        if (f.contains("d")) {
          spec.d = f.at("d").is_array() ? f.at("d").get<std::vector<int>>() : std::vector<int>{f.at("d").get<int>()};
        } else if (spec.kind == FilterKind::kcqf) {
          spec.d = {2};
        }
        spec.window_len = f.value("window_len", 0);
        cfg.filters.push_back(std::move(spec));
      }
    }
    if (j.contains("output")) {
      cfg.csv_path = j.at("output").value("csv", cfg.csv_path);
      cfg.plot_dir = j.at("output").value("plot_dir", cfg.plot_dir);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scenario file '" + path + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("scenario file '" + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace kcqf::bench

#endif  // KCQF_BENCH_SCENARIO_HPP
