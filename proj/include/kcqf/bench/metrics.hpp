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

#ifndef KCQF_BENCH_METRICS_HPP
#define KCQF_BENCH_METRICS_HPP

#include <kcqf/quotient_filter.hpp>
#include <kcqf/ssm.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kcqf::bench {

/// Monte Carlo RMS error per step and its time average.
struct ErmsResult {
  Eigen::MatrixXd per_component;  ///< K x n_x, sqrt(mean_m (x - xhat)^2) per component
  std::vector<double> aggregate;  ///< K entries, sqrt(mean_m |x - xhat|^2); equals per_component for scalar states
  double mean = 0.0;              ///< time average of `aggregate`
};

/// Time average of a per-step error curve.
inline double time_average(const std::vector<double>& curve) {
  if (curve.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const double e : curve) {
    sum += e;
  }
  return sum / static_cast<double>(curve.size());
}

/// E_rms(k) = sqrt((1/M) sum_m (x^m(k) - xhat^m(k))^2) over runs m, for k = 1..K.
/**
 * `truths[m]` holds x_{0:K} as columns; `estimates[m][k-1]` is the estimate of x_k.
 */
inline ErmsResult compute_erms(const std::vector<Eigen::MatrixXd>& truths,
                               const std::vector<std::vector<Estimate>>& estimates) {
  if (truths.size() != estimates.size() || truths.empty()) {
    throw std::invalid_argument("compute_erms: need the same positive number of truths and estimate sequences");
  }
  const auto runs = static_cast<double>(truths.size());
  const Eigen::Index nx = truths.front().rows();
  const auto horizon = static_cast<Eigen::Index>(estimates.front().size());
  ErmsResult out;
  out.per_component = Eigen::MatrixXd::Zero(horizon, nx);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(horizon);
  for (std::size_t m = 0; m < truths.size(); ++m) {
    if (truths[m].rows() != nx || truths[m].cols() != horizon + 1 ||
        static_cast<Eigen::Index>(estimates[m].size()) != horizon) {
      throw std::invalid_argument("compute_erms: run " + std::to_string(m) + " has mismatched shape");
    }
    for (Eigen::Index k = 1; k <= horizon; ++k) {
      const Eigen::VectorXd& est = estimates[m][k - 1].mean;
      if (est.size() != nx) {
        throw std::invalid_argument("compute_erms: estimate dimension mismatch");
      }
      const Eigen::VectorXd err = truths[m].col(k) - est;
      out.per_component.row(k - 1) += err.cwiseAbs2().transpose();
      total(k - 1) += err.squaredNorm();
    }
  }
  out.per_component = (out.per_component / runs).cwiseSqrt();
  out.aggregate.resize(static_cast<std::size_t>(horizon));
  for (Eigen::Index k = 0; k < horizon; ++k) {
    out.aggregate[k] = std::sqrt(total(k) / runs);
  }
  out.mean = time_average(out.aggregate);
  return out;
}

}  // namespace kcqf::bench

#endif  // KCQF_BENCH_METRICS_HPP
