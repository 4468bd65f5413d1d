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

#ifndef KCQF_LINALG_HPP
#define KCQF_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

/**
 * \file
 * \brief Small dense linear-algebra and log-domain helpers shared by the filters.
 */

namespace kcqf {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2*pi)

/// Raised when a factorization cannot be completed even after jitter escalation.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Returns the largest absolute asymmetry |A(i,j) - A(j,i)|.
inline double asymmetry(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

/// Checks a covariance-like matrix: symmetric within `sym_tol` and min eigenvalue >= -`psd_tol`.
inline bool is_symmetric_psd(const Eigen::MatrixXd& a, double sym_tol = 1e-12, double psd_tol = 1e-10) {
  if (a.rows() != a.cols()) {
    return false;
  }
  if (a.size() == 0) {
    return true;
  }
  if (asymmetry(a) > sym_tol) {
    return false;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(a), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -psd_tol;
}

/// Symmetric square root S with S*S^T = A for a PSD matrix (negative eigenvalues clamped to zero).
/**
 * Used for sampling: handles singular and zero covariances, which a plain Cholesky rejects.
 */
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(a));
  const Eigen::VectorXd root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

/// Lower Cholesky factor with jitter escalation.
/**
 * Tries the plain factorization first; on failure adds 1e-12*trace*I and multiplies the jitter by
 * ten up to three more times before giving up with numerical_error.
 */
inline Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd sym = symmetrized(a);
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  const double trace = sym.trace();
  double jitter = 1e-12 * (trace > 0.0 ? trace : 1.0);
  for (int attempt = 0; attempt < 4; ++attempt, jitter *= 10.0) {
    const Eigen::MatrixXd shifted = sym + jitter * Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) {
      return llt.matrixL();
    }
  }
  throw numerical_error("covariance square root failed after jitter escalation");
}

/// log(sum(exp(v))) computed stably; -inf for an empty input or all -inf entries.
inline double log_sum_exp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (const double v : values) {
    peak = std::max(peak, v);
  }
  if (!std::isfinite(peak)) {
    return peak;
  }
  double acc = 0.0;
  for (const double v : values) {
    acc += std::exp(v - peak);
  }
  return peak + std::log(acc);
}

/// Normalizes log weights in place into linear weights summing to one.
/**
 * Returns the log normalizer. When it is -inf (every weight underflowed) the output is left
 * uniform so callers always receive a valid probability vector.
 */
inline double normalize_log_weights(std::span<const double> log_weights, std::span<double> out) {
  const double lse = log_sum_exp(log_weights);
  const std::size_t n = log_weights.size();
  if (!std::isfinite(lse)) {
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = 1.0 / static_cast<double>(n);
    }
    return lse;
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::exp(log_weights[j] - lse);
    total += out[j];
  }
  // exp/log round-off leaves the sum a few ulps off one
  for (std::size_t j = 0; j < n; ++j) {
    out[j] /= total;
  }
  return lse;
}

/// Effective sample size 1/sum(w^2) of normalized weights.
inline double effective_sample_size(std::span<const double> weights) {
  double sq = 0.0;
  for (const double w : weights) {
    sq += w * w;
  }
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

}  // namespace kcqf

#endif  // KCQF_LINALG_HPP
