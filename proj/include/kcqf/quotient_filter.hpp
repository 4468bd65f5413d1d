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

#ifndef KCQF_QUOTIENT_FILTER_HPP
#define KCQF_QUOTIENT_FILTER_HPP

#include <kcqf/linalg.hpp>
#include <kcqf/random.hpp>
#include <kcqf/ssm.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * \file
 * \brief Key conditional quotient filter.
 *
 * The posterior moments of x_t are written as a quotient of two prior expectations,
 *
 *   E[x_t | z_t] = E_prior[x_t p_beta(z_t - g(x))] / E_prior[p_beta(z_t - g(x))],
 *
 * where z_t holds only a few "key" measurement entries picked from a recent window by their
 * correlation with x_t, and p_beta is the marginal density of the matching measurement noise.
 * Both expectations are estimated with one fixed bank of prior trajectories (the ensemble), so
 * the filter never resamples. Restricting the conditioning set keeps the weights from collapsing
 * the way they do when every past measurement enters the likelihood.
 */

namespace kcqf {

/// Bank of prior sample trajectories with cached noise-free measurements.
struct Ensemble {
  std::vector<Eigen::MatrixXd> states;     ///< K + 1 entries; entry t is n_x x N_s, column j = x_t of sample j
  std::vector<Eigen::MatrixXd> predicted;  ///< K entries; entry t - 1 is n_y x N_s, column j = g_t(x_t of sample j)

  [[nodiscard]] int horizon() const { return static_cast<int>(predicted.size()); }
  [[nodiscard]] Eigen::Index sample_count() const { return states.empty() ? 0 : states.front().cols(); }
  [[nodiscard]] Eigen::Index state_dim() const { return states.empty() ? 0 : states.front().rows(); }
  [[nodiscard]] Eigen::Index meas_dim() const { return predicted.empty() ? 0 : predicted.front().rows(); }
  [[nodiscard]] Eigen::VectorXd state(Eigen::Index sample, int t) const { return states[t].col(sample); }
  [[nodiscard]] double prediction(Eigen::Index sample, const MeasIndex& idx) const {
    return predicted[idx.time - 1](idx.component, sample);
  }
};

/// Wraps explicit state paths; `paths[t]` is n_x x N_s. Predictions are recomputed from the model.
inline Ensemble make_ensemble(const SystemModel& model, std::vector<Eigen::MatrixXd> paths) {
  if (paths.size() < 2) {
    throw std::invalid_argument("make_ensemble: need at least x_0 and x_1");
  }
  Ensemble e;
  e.states = std::move(paths);
  const Eigen::Index n = e.states.front().cols();
  for (std::size_t t = 1; t < e.states.size(); ++t) {
    if (e.states[t].rows() != model.state_dim || e.states[t].cols() != n) {
      throw std::invalid_argument("make_ensemble: inconsistent path shapes");
    }
    Eigen::MatrixXd pred(model.meas_dim, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      pred.col(j) = evaluate_measurement(model, static_cast<int>(t), e.states[t].col(j));
    }
    e.predicted.push_back(std::move(pred));
  }
  return e;
}

/// Draws N_s initial states and process-noise paths and propagates them over the horizon.
/**
 * Sample j consumes, in order, its x_0 draw and then its whole noise path.
 */
inline Ensemble init_ensemble(const SystemModel& model, const InitialStateSpec& init, const NoiseSpec& proc,
                              Eigen::Index sample_count, int horizon, Rng& rng) {
  if (sample_count < 1) {
    throw std::invalid_argument("init_ensemble: sample count must be positive");
  }
  if (horizon < 1) {
    throw std::invalid_argument("init_ensemble: horizon must be at least 1");
  }
  if (initial_dim(init) != model.state_dim || noise_dim(proc) != model.noise_dim) {
    throw std::invalid_argument("init_ensemble: initial state or process noise dimension does not match the model");
  }
  Ensemble e;
  e.states.assign(horizon + 1, Eigen::MatrixXd(model.state_dim, sample_count));
  e.predicted.assign(horizon, Eigen::MatrixXd(model.meas_dim, sample_count));
  for (Eigen::Index j = 0; j < sample_count; ++j) {
    e.states[0].col(j) = sample_initial(init, rng);
    const NoisePath w = sample_noise_path(proc, horizon, rng);
    for (int t = 1; t <= horizon; ++t) {
      e.states[t].col(j) = evaluate_transition(model, t - 1, e.states[t - 1].col(j), w.col(t - 1));
      e.predicted[t - 1].col(j) = evaluate_measurement(model, t, e.states[t].col(j));
    }
  }
  return e;
}

/// Reference values r[(i, c), m] for every candidate measurement in the window.
struct ReferenceTable {
  std::vector<MeasIndex> candidates;
  Eigen::MatrixXd values;  ///< candidates.size() x n_x
};

/// |corr(y_{i,c}, x_{t,m})| over the ensemble for candidates with window_start <= i <= t.
/**
 * cov(y, x) uses the cached noise-free predictions (the noise is independent of the state) and
 * Var(y) adds the known marginal variance of the measurement noise. Candidates or state
 * components without spread get 0.
 */
inline ReferenceTable reference_values(const Ensemble& ensemble, int target_step, int window_start,
                                       const NoiseSpec& meas_noise) {
  if (window_start < 1 || window_start > target_step || target_step > ensemble.horizon()) {
    throw std::invalid_argument("reference_values: need 1 <= window_start <= target_step <= K");
  }
  const Eigen::Index n = ensemble.sample_count();
  const Eigen::Index nx = ensemble.state_dim();
  const Eigen::Index ny = ensemble.meas_dim();
  const double inv_n = 1.0 / static_cast<double>(n);

  const Eigen::MatrixXd& x = ensemble.states[target_step];
  const Eigen::VectorXd x_mean = x.rowwise().sum() * inv_n;
  const Eigen::MatrixXd x_dev = x.colwise() - x_mean;
  Eigen::VectorXd x_var = x_dev.rowwise().squaredNorm() * inv_n;
  for (Eigen::Index m = 0; m < nx; ++m) {
    if (x.row(m).maxCoeff() == x.row(m).minCoeff()) {
      x_var(m) = 0.0;
    }
  }

  ReferenceTable table;
  for (int i = window_start; i <= target_step; ++i) {
    for (Eigen::Index c = 0; c < ny; ++c) {
      table.candidates.push_back({i, static_cast<int>(c)});
    }
  }
  table.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(table.candidates.size()), nx);
  for (std::size_t a = 0; a < table.candidates.size(); ++a) {
    const MeasIndex& idx = table.candidates[a];
    const auto y = ensemble.predicted[idx.time - 1].row(idx.component);
    if (y.maxCoeff() == y.minCoeff()) {
      continue;
    }
    const double y_mean = y.sum() * inv_n;
    const Eigen::RowVectorXd y_dev = y.array() - y_mean;
    const double y_var = y_dev.squaredNorm() * inv_n + noise_marginal_variance(meas_noise, idx);
    for (Eigen::Index m = 0; m < nx; ++m) {
      const double denom = std::sqrt(y_var * x_var(m));
      if (!(denom > 0.0)) {
        continue;
      }
      const double cov = y_dev.dot(x_dev.row(m)) * inv_n;
      table.values(static_cast<Eigen::Index>(a), m) = std::min(1.0, std::abs(cov) / denom);
    }
  }
  return table;
}

/// The selected key measurement coordinates.
struct KeySelection {
  std::vector<MeasIndex> pairs;  ///< in selection order (best first)
  int window_start = 1;
  int requested = 0;  ///< d asked for; pairs.size() can be smaller when the window is short
};

/// Picks the d candidates with the largest reference value.
/**
 * A candidate's score is its maximum over state components. Ties go to the more recent time,
 * then to the smaller component index. If fewer than d candidates exist all are returned.
 */
inline KeySelection select_key_conditions(const ReferenceTable& table, int d) {
  if (d < 1) {
    throw std::invalid_argument("select_key_conditions: d must be at least 1");
  }
  if (table.candidates.empty()) {
    throw std::invalid_argument("select_key_conditions: empty candidate set");
  }
  struct Scored {
    MeasIndex idx;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(table.candidates.size());
  int window_start = std::numeric_limits<int>::max();
  for (std::size_t a = 0; a < table.candidates.size(); ++a) {
    const double score = table.values.cols() > 0 ? table.values.row(static_cast<Eigen::Index>(a)).maxCoeff() : 0.0;
    scored.push_back({table.candidates[a], score});
    window_start = std::min(window_start, table.candidates[a].time);
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& l, const Scored& r) {
    if (l.score != r.score) {
      return l.score > r.score;
    }
    if (l.idx.time != r.idx.time) {
      return l.idx.time > r.idx.time;
    }
    return l.idx.component < r.idx.component;
  });
  KeySelection keys;
  keys.window_start = window_start;
  keys.requested = d;
  const std::size_t take = std::min(static_cast<std::size_t>(d), scored.size());
  for (std::size_t a = 0; a < take; ++a) {
    keys.pairs.push_back(scored[a].idx);
  }
  return keys;
}

namespace detail {

// Log weights conditioned on the given coordinates, evaluated in canonical (time, component) order
// so that equal index sets always give bit-identical results.
inline std::vector<double> conditioned_log_weights(const Ensemble& ensemble, std::vector<MeasIndex> indices,
                                                   const Eigen::MatrixXd& measurements, const NoiseSpec& meas_noise) {
  std::sort(indices.begin(), indices.end());
  for (const MeasIndex& idx : indices) {
    if (idx.time < 1 || idx.time > std::min<int>(ensemble.horizon(), static_cast<int>(measurements.cols())) ||
        idx.component < 0 || idx.component >= ensemble.meas_dim()) {
      throw std::invalid_argument("key_log_weights: index " + to_string(std::span(&idx, 1)) +
                                  " is not covered by the measurements");
    }
  }
  const MarginalDensity density(meas_noise, indices);
  const Eigen::Index n = ensemble.sample_count();
  const auto d = static_cast<Eigen::Index>(indices.size());
  std::vector<double> out(static_cast<std::size_t>(n));
  Eigen::VectorXd residual(d);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index a = 0; a < d; ++a) {
      const MeasIndex& idx = indices[a];
      residual(a) = measurements(idx.component, idx.time - 1) - ensemble.prediction(j, idx);
    }
    out[j] = density.log_pdf(residual);
  }
  return out;
}

}  // namespace detail

/// Unnormalized log weight of each sample: log p_beta(z - predicted z).
inline std::vector<double> key_log_weights(const Ensemble& ensemble, const KeySelection& keys,
                                           const Eigen::MatrixXd& measurements, const NoiseSpec& meas_noise) {
  if (keys.pairs.empty()) {
    throw std::invalid_argument("key_log_weights: no key conditions");
  }
  return detail::conditioned_log_weights(ensemble, keys.pairs, measurements, meas_noise);
}

inline std::vector<double> key_log_weights(const Ensemble& ensemble, const KeySelection& keys,
                                           const Trajectory& truth, const NoiseSpec& meas_noise) {
  return key_log_weights(ensemble, keys, truth.measurements, meas_noise);
}

/// Diagnostic: log weights conditioned on every measurement 1..up_to_step.
/**
 * This is the all-conditions quotient estimator. Its weights degenerate as the step count grows,
 * which is what the key-condition restriction avoids.
 */
inline std::vector<double> naive_full_quotient_weights(const Ensemble& ensemble, const Eigen::MatrixXd& measurements,
                                                       const NoiseSpec& meas_noise, int up_to_step) {
  if (up_to_step < 1 || up_to_step > ensemble.horizon()) {
    throw std::invalid_argument("naive_full_quotient_weights: step out of range");
  }
  std::vector<MeasIndex> all;
  for (int t = 1; t <= up_to_step; ++t) {
    for (Eigen::Index c = 0; c < ensemble.meas_dim(); ++c) {
      all.push_back({t, static_cast<int>(c)});
    }
  }
  return detail::conditioned_log_weights(ensemble, std::move(all), measurements, meas_noise);
}

struct Estimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double ess = 0.0;
  double log_normalizer = 0.0;  ///< log of (1/N_s) sum_j exp(log_weight_j)
  bool degenerate = false;
  std::vector<MeasIndex> keys;  ///< conditions used for this step, when produced by the filter
};

/// Unweighted moments (1/N_s normalization) of the ensemble at step t.
inline Estimate ensemble_moments(const Ensemble& ensemble, int target_step) {
  const Eigen::MatrixXd& x = ensemble.states.at(target_step);
  const double inv_n = 1.0 / static_cast<double>(x.cols());
  Estimate est;
  est.mean = x.rowwise().sum() * inv_n;
  const Eigen::MatrixXd dev = x.colwise() - est.mean;
  est.covariance = symmetrized(dev * dev.transpose() * inv_n);
  est.ess = static_cast<double>(x.cols());
  return est;
}

/// Self-normalized weighted moments of x_t.
/**
 * Weights are normalized through log-sum-exp. If every weight underflows or the effective sample
 * size drops below `floor`, the unweighted ensemble moments are returned with `degenerate` set.
 * With the default floor of 1 only total underflow counts: a single dominant sample is still a
 * valid (if noisy) estimate and beats the unconditioned prior mean.
 */
inline Estimate weighted_estimate(const Ensemble& ensemble, std::span<const double> log_weights, int target_step,
                                  double floor = 1.0) {
  const Eigen::Index n = ensemble.sample_count();
  if (static_cast<Eigen::Index>(log_weights.size()) != n) {
    throw std::invalid_argument("weighted_estimate: need one log weight per sample");
  }
  if (target_step < 0 || target_step > ensemble.horizon()) {
    throw std::invalid_argument("weighted_estimate: step out of range");
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  const double lse = normalize_log_weights(log_weights, w);
  // ESS >= 1 for any normalized weights; clamp away the round-off of a one-hot vector
  const double ess = std::isfinite(lse) ? std::max(1.0, effective_sample_size(w)) : 0.0;
  if (!std::isfinite(lse) || ess < floor) {
    Estimate fallback = ensemble_moments(ensemble, target_step);
    fallback.ess = ess;
    fallback.log_normalizer = lse - std::log(static_cast<double>(n));
    fallback.degenerate = true;
    return fallback;
  }
  const Eigen::MatrixXd& x = ensemble.states[target_step];
  const Eigen::Map<const Eigen::VectorXd> weights(w.data(), n);
  Estimate est;
  est.mean = x * weights;
  const Eigen::MatrixXd dev = x.colwise() - est.mean;
  est.covariance = symmetrized(dev * weights.asDiagonal() * dev.transpose());
  est.ess = ess;
  est.log_normalizer = lse - std::log(static_cast<double>(n));
  return est;
}

struct KcqfConfig {
  int d = 2;                                ///< key conditions per step
  int window_len = 0;                       ///< candidate window in steps; 0 means d
  Eigen::Index sample_count = 50;           ///< N_s
  double degeneracy_floor = 1.0;            ///< minimum acceptable ESS
  std::uint64_t seed = 0;

  [[nodiscard]] int effective_window() const { return window_len > 0 ? window_len : d; }

  void validate(Eigen::Index meas_dim) const {
    if (d < 1) {
      throw std::invalid_argument("KcqfConfig: d must be at least 1");
    }
    if (static_cast<Eigen::Index>(d) > effective_window() * meas_dim) {
      throw std::invalid_argument("KcqfConfig: d exceeds the number of candidates in the window");
    }
    if (sample_count < 2) {
      throw std::invalid_argument("KcqfConfig: sample count must be at least 2");
    }
    if (!(degeneracy_floor >= 1.0)) {
      throw std::invalid_argument("KcqfConfig: degeneracy floor must be at least 1");
    }
  }
};

/// Runs the estimation loop over a prebuilt ensemble; returns estimates for t = 1..K.
inline std::vector<Estimate> kcqf_filter(const Ensemble& ensemble, const NoiseSpec& meas_noise,
                                         const Eigen::MatrixXd& measurements, const KcqfConfig& cfg) {
  cfg.validate(ensemble.meas_dim());
  const int horizon = ensemble.horizon();
  if (measurements.cols() < horizon || measurements.rows() != ensemble.meas_dim()) {
    throw std::invalid_argument("kcqf_filter: measurements do not cover the horizon");
  }
  const int window = cfg.effective_window();
  std::vector<Estimate> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int t = 1; t <= horizon; ++t) {
    const int start = std::max(1, t + 1 - window);
    const ReferenceTable table = reference_values(ensemble, t, start, meas_noise);
    const KeySelection keys = select_key_conditions(table, cfg.d);
    const std::vector<double> lw = key_log_weights(ensemble, keys, measurements, meas_noise);
    Estimate est = weighted_estimate(ensemble, lw, t, cfg.degeneracy_floor);
    est.keys = keys.pairs;
    out.push_back(std::move(est));
  }
  return out;
}

/// Full filter: builds the ensemble once from `rng`, then estimates every step.
inline std::vector<Estimate> kcqf_run(const SystemModel& model, const InitialStateSpec& init, const NoiseSpec& proc,
                                      const NoiseSpec& meas, const Eigen::MatrixXd& measurements,
                                      const KcqfConfig& cfg, Rng& rng) {
  cfg.validate(model.meas_dim);
  const auto horizon = static_cast<int>(measurements.cols());
  const Ensemble ensemble = init_ensemble(model, init, proc, cfg.sample_count, horizon, rng);
  return kcqf_filter(ensemble, meas, measurements, cfg);
}

inline std::vector<Estimate> kcqf_run(const SystemModel& model, const InitialStateSpec& init, const NoiseSpec& proc,
                                      const NoiseSpec& meas, const Trajectory& truth, const KcqfConfig& cfg) {
  Rng rng(cfg.seed);
  return kcqf_run(model, init, proc, meas, truth.measurements, cfg, rng);
}

}  // namespace kcqf

#endif  // KCQF_QUOTIENT_FILTER_HPP
