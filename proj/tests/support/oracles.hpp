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


#ifndef KCQF_TESTS_SUPPORT_ORACLES_HPP
#define KCQF_TESTS_SUPPORT_ORACLES_HPP

#include <kcqf/models.hpp>
#include <kcqf/ssm.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <vector>

/// Reference implementations used only by the tests. Kept free of library numerics on purpose.
namespace kcqf::testing {

/// Textbook Kalman filter with explicit inverses.
struct KalmanOracle {
  Eigen::MatrixXd f, g, h, q, r;

  struct Belief {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
  };

  [[nodiscard]] Belief step(const Belief& prior, const Eigen::VectorXd& y) const {
    const Eigen::VectorXd m = f * prior.mean;
    const Eigen::MatrixXd p = f * prior.cov * f.transpose() + g * q * g.transpose();
    const Eigen::MatrixXd s = h * p * h.transpose() + r;
    const Eigen::MatrixXd k = p * h.transpose() * s.inverse();
    return {m + k * (y - h * m), (Eigen::MatrixXd::Identity(p.rows(), p.cols()) - k * h) * p};
  }
};

/// x_1 = x_0 + w, y_1 = x_1 + v with x_0, w, v all standard normal.
struct OneStepLinearGaussian {
  SystemModel model = models::scalar_random_walk();
  InitialStateSpec init = GaussianInit{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
  NoiseSpec proc = WhiteGaussian{Eigen::MatrixXd::Identity(1, 1)};
  NoiseSpec meas = WhiteGaussian{Eigen::MatrixXd::Identity(1, 1)};

  /// Posterior mean of x_1 given y_1: P^- = 2, gain 2/3.
  static double posterior_mean(double y) { return 2.0 / 3.0 * y; }
  static double posterior_variance() { return 2.0 / 3.0; }

  [[nodiscard]] KalmanOracle oracle() const {
    const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
    return {one, one, one, one, one};
  }
};

/// Least-squares slope of log(err) against log(n).
inline double log_log_slope(const std::vector<double>& n, const std::vector<double>& err) {
  const std::size_t m = n.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(n[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

/// Kendall tau-a of a sequence against its index.
inline double kendall_tau(const std::vector<double>& v) {
  double concordant = 0.0;
  double discordant = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (v[j] > v[i]) {
        concordant += 1.0;
      } else if (v[j] < v[i]) {
        discordant += 1.0;
      }
    }
  }
  const double pairs = static_cast<double>(v.size() * (v.size() - 1) / 2);
  return pairs > 0.0 ? (concordant - discordant) / pairs : 0.0;
}

}  // namespace kcqf::testing

#endif  // KCQF_TESTS_SUPPORT_ORACLES_HPP
