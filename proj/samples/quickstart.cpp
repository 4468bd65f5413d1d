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


// Filters one simulated trajectory of the univariate growth model with KCQF-2 and an EKF.

#include <kcqf/kcqf.hpp>

#include <cmath>
#include <cstdio>

int main() {
  using namespace kcqf;
  const SystemModel model = models::univariate_growth();
  const InitialStateSpec init = GaussianInit{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 2.0)};
  const Eigen::MatrixXd q = Eigen::MatrixXd::Constant(1, 1, 10.0);
  const Eigen::MatrixXd r = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const NoiseSpec proc = WhiteGaussian{q};
  const NoiseSpec meas = WhiteGaussian{r};

  Rng truth_rng(derive_seed(1, 0, fnv1a("truth")));
  const Trajectory truth = simulate_truth(model, init, proc, meas, 52, truth_rng);

  KcqfConfig cfg;
  cfg.d = 2;
  cfg.sample_count = 200;
  cfg.seed = derive_seed(1, 0, fnv1a("kcqf-2"));
  const std::vector<Estimate> kcqf = kcqf_run(model, init, proc, meas, truth, cfg);
  const std::vector<Estimate> ekf =
      baselines::gaussian_run(baselines::GaussianFilter::ekf, model, init, truth.measurements, q, r);

  double se_kcqf = 0.0;
  double se_ekf = 0.0;
  std::printf("%4s %10s %10s %10s %8s\n", "k", "truth", "kcqf-2", "ekf", "ess");
  for (std::size_t t = 1; t <= kcqf.size(); ++t) {
    const double x = truth.states(0, static_cast<Eigen::Index>(t));
    se_kcqf += std::pow(x - kcqf[t - 1].mean(0), 2);
    se_ekf += std::pow(x - ekf[t - 1].mean(0), 2);
    std::printf("%4zu %10.4f %10.4f %10.4f %8.2f\n", t, x, kcqf[t - 1].mean(0), ekf[t - 1].mean(0), kcqf[t - 1].ess);
  }
  std::printf("rmse  kcqf-2 %.4f  ekf %.4f\n", std::sqrt(se_kcqf / kcqf.size()), std::sqrt(se_ekf / ekf.size()));
  return 0;
}
