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

#ifndef KCQF_MODELS_HPP
#define KCQF_MODELS_HPP

#include <kcqf/ssm.hpp>

#include <Eigen/Dense>

#include <cmath>

namespace kcqf::models {

/// Univariate nonstationary growth model.
/**
 *   x_t = x/2 + 25 x / (1 + x^2) + 8 cos(1.2 k) + w,   with k = t - 1 and x = x_{t-1}
 *   y_t = x_t^2 / 20 + v_t
 */
inline SystemModel univariate_growth() {
  SystemModel m;
  m.state_dim = 1;
  m.meas_dim = 1;
  m.noise_dim = 1;
  m.transition = [](int k, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    const double s = x(0);
    return Eigen::VectorXd::Constant(1, 0.5 * s + 25.0 * s / (1.0 + s * s) + 8.0 * std::cos(1.2 * k) + w(0));
  };
  m.measurement = [](int, const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) * x(0) / 20.0); };
  m.transition_jacobian = [](int, const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    const double s = x(0);
    const double q = 1.0 + s * s;
    return Eigen::MatrixXd::Constant(1, 1, 0.5 + 25.0 * (1.0 - s * s) / (q * q));
  };
  m.measurement_jacobian = [](int, const Eigen::VectorXd& x) { return Eigen::MatrixXd::Constant(1, 1, x(0) / 10.0); };
  return m;
}

/// Time-invariant linear model x_t = F x_{t-1} + G w_t, y_t = H x_t (+ v_t added by the caller's noise law).
inline SystemModel linear(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) {
  SystemModel m;
  m.state_dim = f.rows();
  m.meas_dim = h.rows();
  m.noise_dim = g.cols();
  m.transition = [f, g](int, const Eigen::VectorXd& x, const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return f * x + g * w;
  };
  m.measurement = [h](int, const Eigen::VectorXd& x) -> Eigen::VectorXd { return h * x; };
  m.transition_jacobian = [f](int, const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd { return f; };
  m.measurement_jacobian = [h](int, const Eigen::VectorXd&) -> Eigen::MatrixXd { return h; };
  return m;
}

/// Scalar random walk x_t = x_{t-1} + w_t observed directly, y_t = x_t + v_t.
inline SystemModel scalar_random_walk() {
  return linear(Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1));
}

}  // namespace kcqf::models

#endif  // KCQF_MODELS_HPP
