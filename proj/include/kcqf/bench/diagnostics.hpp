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

#ifndef KCQF_BENCH_DIAGNOSTICS_HPP
#define KCQF_BENCH_DIAGNOSTICS_HPP

#include <kcqf/bench/scenario.hpp>
#include <kcqf/klnoise.hpp>
#include <kcqf/random.hpp>
#include <kcqf/ssm.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * \file
 * \brief Noise-law diagnostics: marginal non-Gaussianity and the non-Markov witness.
 *
 * Both statistics are sup-distances between histogram densities. Their thresholds come from
 * null replicates of the same statistic under a Gaussian, Markovian surrogate at the same sample
 * size, so the comparison is against sampling noise rather than a fixed constant.
 */

namespace kcqf::bench {

/// Two densities on a shared abscissa grid.
struct DensityPair {
  std::vector<double> x;
  std::vector<double> first;
  std::vector<double> second;
  double sup_distance = 0.0;  ///< max_i |first_i - second_i|
};

/// Noise draws w_step (1-based) from a scenario noise law.
inline std::vector<double> sample_noise_marginal(const NoiseConfig& noise, int horizon, int step, std::size_t draws,
                                                 std::uint64_t seed) {
  if (step < 1 || step > horizon) {
    throw std::invalid_argument("sample_noise_marginal: step out of range");
  }
  Rng rng(seed);
  std::vector<double> out(draws);
  if (noise.kind == "white") {
    std::normal_distribution<double> normal(0.0, std::sqrt(noise.variance));
    for (double& v : out) {
      v = normal(rng);
    }
    return out;
  }
  const kl::KLBasis basis =
      kl::kl_decompose(kl::build_correlation(horizon, noise.length_scale), noise.order, noise.xi_half_width, noise.mean);
  const Eigen::VectorXd row =
      basis.eigenvectors.row(step - 1).transpose().cwiseProduct(basis.eigenvalues.cwiseSqrt());
  for (double& v : out) {
    v = row.dot(kl::kl_sample_coefficients(basis, rng)) + basis.mean_offset;
  }
  return out;
}

inline std::pair<double, double> sample_moments(const std::vector<double>& v) {
  double mean = 0.0;
  for (const double s : v) {
    mean += s;
  }
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (const double s : v) {
    var += (s - mean) * (s - mean);
  }
  return {mean, var / static_cast<double>(v.size())};
}

/// Empirical density of the samples against the moment-matched Gaussian.
inline DensityPair gaussianity_pair(const std::vector<double>& samples, std::size_t bins = 100) {
  const kl::Histogram h = kl::empirical_density(samples, bins);
  const auto [mean, var] = sample_moments(samples);
  DensityPair out;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out.x.push_back(h.center(i));
    out.first.push_back(h.density[i]);
    out.second.push_back(kl::gaussian_density(h.center(i), mean, var));
  }
  out.sup_distance = kl::sup_distance_to_gaussian(h, mean, var);
  return out;
}

/// Statistic of `gaussianity_pair` on `draws` true Gaussian samples; max over `replicates`.
inline double gaussianity_null(std::size_t draws, std::size_t replicates, std::uint64_t seed,
                               std::size_t bins = 100) {
  double tau = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng rng(derive_seed(seed, r, fnv1a("gaussian-null")));
    std::normal_distribution<double> normal;
    std::vector<double> s(draws);
    for (double& v : s) {
      v = normal(rng);
    }
    tau = std::max(tau, gaussianity_pair(s, bins).sup_distance);
  }
  return tau;
}

/// Conditioning setup of the non-Markov witness.
struct MarkovWitnessConfig {
  double x0 = -0.5;
  double x1 = -0.2;
  double half_width = 0.025;  ///< bins are [c - h, c + h)
  std::size_t bins = 30;
  std::size_t draws = 1000000;
};

/// Histograms of x_2 given x_1 in its bin, and given both x_1 and x_0 in their bins.
/**
 * Paths x_0, x_1, x_2 are simulated under the scenario's model, initial law and process noise
 * (measurements are irrelevant). Both densities share the grid spanned by the x_1-only sample.
 */
inline DensityPair markov_witness(const ScenarioConfig& scenario, const NoiseConfig& process,
                                  const MarkovWitnessConfig& wc, std::uint64_t seed) {
  const SystemModel model = build_model(scenario);
  const InitialStateSpec init = build_initial(scenario);
  const NoiseSpec proc = build_noise(process, scenario.horizon);
  Rng rng(seed);
  std::vector<double> given_x1;
  std::vector<double> given_both;
  const auto in_bin = [&](double v, double c) { return v >= c - wc.half_width && v < c + wc.half_width; };
  for (std::size_t i = 0; i < wc.draws; ++i) {
    const Eigen::VectorXd x0 = sample_initial(init, rng);
    const NoisePath w = sample_noise_path(proc, scenario.horizon, rng);
    const Eigen::VectorXd x1 = evaluate_transition(model, 0, x0, w.col(0));
    if (!in_bin(x1(0), wc.x1)) {
      continue;
    }
    const double x2 = evaluate_transition(model, 1, x1, w.col(1))(0);
    given_x1.push_back(x2);
    if (in_bin(x0(0), wc.x0)) {
      given_both.push_back(x2);
    }
  }
  if (given_x1.size() < 2 || given_both.size() < 2) {
    throw std::runtime_error("markov_witness: too few samples in the conditioning bins (" +
                             std::to_string(given_both.size()) + "); increase the draw count");
  }
  const auto [lo, hi] = std::minmax_element(given_x1.begin(), given_x1.end());
  const double upper = std::nextafter(*hi, std::numeric_limits<double>::infinity());
  const kl::Histogram a = kl::empirical_density(given_x1, wc.bins, *lo, upper);
  const kl::Histogram b = kl::empirical_density(given_both, wc.bins, *lo, upper);
  DensityPair out;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    out.x.push_back(a.center(i));
    out.first.push_back(a.density[i]);
    out.second.push_back(b.density[i]);
  }
  out.sup_distance = kl::sup_distance(a, b);
  return out;
}

/// The same witness under white Gaussian process noise of matching variance; max over replicates.
inline double markov_witness_null(const ScenarioConfig& scenario, const MarkovWitnessConfig& wc,
                                  std::size_t replicates, std::uint64_t seed) {
  const NoiseConfig white{"white", nominal_variance(scenario.process_noise)};
  double tau = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) {
    tau = std::max(tau, markov_witness(scenario, white, wc, derive_seed(seed, r, fnv1a("markov-null"))).sup_distance);
  }
  return tau;
}

}  // namespace kcqf::bench

#endif  // KCQF_BENCH_DIAGNOSTICS_HPP
