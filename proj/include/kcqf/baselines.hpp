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

#ifndef KCQF_BASELINES_HPP
#define KCQF_BASELINES_HPP

#include <kcqf/linalg.hpp>
#include <kcqf/quotient_filter.hpp>
#include <kcqf/random.hpp>
#include <kcqf/ssm.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * \file
 * \brief Reference filters: EKF, UKF, CKF and bootstrap particle filters.
 *
 * The Gaussian filters treat process and measurement noise as zero-mean Gaussians with the given
 * covariances Q and R. Process noise enters through the transition, so the sigma-point filters
 * augment the state with w.
 */

namespace kcqf::baselines {

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

namespace detail {

inline GaussianBelief kalman_update(const Eigen::VectorXd& x_pred, const Eigen::MatrixXd& p_pred,
                                    const Eigen::VectorXd& y_pred, const Eigen::MatrixXd& s,
                                    const Eigen::MatrixXd& cross, const Eigen::VectorXd& y) {
  const Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(s));
  if (llt.info() != Eigen::Success) {
    throw numerical_error("innovation covariance is singular");
  }
  const Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();
  GaussianBelief post;
  post.mean = x_pred + gain * (y - y_pred);
  post.covariance = symmetrized(p_pred - gain * s * gain.transpose());
  return post;
}

inline Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace detail

/// Extended Kalman filter step: x_k -> x_{k+1}, then update with y_{k+1}.
inline GaussianBelief ekf_step(const SystemModel& model, const GaussianBelief& belief, int k,
                               const Eigen::VectorXd& y_next, const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(model.noise_dim);
  const Eigen::VectorXd x_pred = evaluate_transition(model, k, belief.mean, w0);
  const Eigen::MatrixXd f = transition_jacobian(model, k, belief.mean, w0);
  const Eigen::MatrixXd g = noise_jacobian(model, k, belief.mean, w0);
  const Eigen::MatrixXd p_pred = symmetrized(f * belief.covariance * f.transpose() + g * q * g.transpose());

  const Eigen::MatrixXd h = measurement_jacobian(model, k + 1, x_pred);
  const Eigen::VectorXd y_pred = evaluate_measurement(model, k + 1, x_pred);
  const Eigen::MatrixXd s = h * p_pred * h.transpose() + r;
  const Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(s));
  if (llt.info() != Eigen::Success) {
    throw numerical_error("ekf_step: innovation covariance is singular");
  }
  const Eigen::MatrixXd gain = llt.solve(h * p_pred).transpose();
  const Eigen::MatrixXd i_kh = Eigen::MatrixXd::Identity(model.state_dim, model.state_dim) - gain * h;
  GaussianBelief post;
  post.mean = x_pred + gain * (y_next - y_pred);
  // Joseph form keeps the covariance PSD
  post.covariance = symmetrized(i_kh * p_pred * i_kh.transpose() + gain * r * gain.transpose());
  return post;
}

/// Weighted point set approximating a Gaussian.
struct SigmaPoints {
  Eigen::MatrixXd points;  ///< n x (number of points)
  Eigen::VectorXd mean_weights;
  Eigen::VectorXd cov_weights;
};

struct UtParams {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
};

/// Scaled unscented transform points: 2n + 1 points with lambda = alpha^2 (n + kappa) - n.
inline SigmaPoints unscented_points(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const UtParams& ut = {}) {
  const Eigen::Index n = mean.size();
  const double nd = static_cast<double>(n);
  const double lambda = ut.alpha * ut.alpha * (nd + ut.kappa) - nd;
  const Eigen::MatrixXd root = jittered_cholesky((nd + lambda) * cov);
  SigmaPoints sp{Eigen::MatrixXd(n, 2 * n + 1), Eigen::VectorXd(2 * n + 1), Eigen::VectorXd(2 * n + 1)};
  sp.points.col(0) = mean;
  sp.mean_weights(0) = lambda / (nd + lambda);
  sp.cov_weights(0) = sp.mean_weights(0) + (1.0 - ut.alpha * ut.alpha + ut.beta);
  const double wi = 1.0 / (2.0 * (nd + lambda));
  for (Eigen::Index i = 0; i < n; ++i) {
    sp.points.col(1 + i) = mean + root.col(i);
    sp.points.col(1 + n + i) = mean - root.col(i);
    sp.mean_weights(1 + i) = sp.mean_weights(1 + n + i) = wi;
    sp.cov_weights(1 + i) = sp.cov_weights(1 + n + i) = wi;
  }
  return sp;
}

/// Third-degree spherical-radial cubature: 2n points mean +/- sqrt(n) L e_i, weights 1/(2n).
inline SigmaPoints cubature_points(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const Eigen::Index n = mean.size();
  const Eigen::MatrixXd root = jittered_cholesky(cov) * std::sqrt(static_cast<double>(n));
  SigmaPoints sp{Eigen::MatrixXd(n, 2 * n), Eigen::VectorXd::Constant(2 * n, 0.5 / static_cast<double>(n)),
                 Eigen::VectorXd::Constant(2 * n, 0.5 / static_cast<double>(n))};
  for (Eigen::Index i = 0; i < n; ++i) {
    sp.points.col(i) = mean + root.col(i);
    sp.points.col(n + i) = mean - root.col(i);
  }
  return sp;
}

namespace detail {

template <class PointRule>
GaussianBelief sigma_point_step(const SystemModel& model, const GaussianBelief& belief, int k,
                                const Eigen::VectorXd& y_next, const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                                PointRule rule) {
  const Eigen::Index nx = model.state_dim;
  const Eigen::Index nw = model.noise_dim;

  // predict through the augmented state [x; w]
  Eigen::VectorXd aug_mean = Eigen::VectorXd::Zero(nx + nw);
  aug_mean.head(nx) = belief.mean;
  const SigmaPoints aug = rule(aug_mean, block_diagonal(belief.covariance, q));
  const Eigen::Index np = aug.points.cols();
  Eigen::MatrixXd propagated(nx, np);
  for (Eigen::Index i = 0; i < np; ++i) {
    propagated.col(i) = evaluate_transition(model, k, aug.points.col(i).head(nx), aug.points.col(i).tail(nw));
  }
  const Eigen::VectorXd x_pred = propagated * aug.mean_weights;
  const Eigen::MatrixXd dx = propagated.colwise() - x_pred;
  const Eigen::MatrixXd p_pred = symmetrized(dx * aug.cov_weights.asDiagonal() * dx.transpose());

  // update with points redrawn from the predicted belief
  const SigmaPoints pred = rule(x_pred, p_pred);
  const Eigen::Index nm = pred.points.cols();
  Eigen::MatrixXd ys(model.meas_dim, nm);
  for (Eigen::Index i = 0; i < nm; ++i) {
    ys.col(i) = evaluate_measurement(model, k + 1, pred.points.col(i));
  }
  const Eigen::VectorXd y_pred = ys * pred.mean_weights;
  const Eigen::MatrixXd dy = ys.colwise() - y_pred;
  const Eigen::MatrixXd dxp = pred.points.colwise() - x_pred;
  const Eigen::MatrixXd s = dy * pred.cov_weights.asDiagonal() * dy.transpose() + r;
  const Eigen::MatrixXd cross = dxp * pred.cov_weights.asDiagonal() * dy.transpose();
  return kalman_update(x_pred, p_pred, y_pred, s, cross, y_next);
}

}  // namespace detail

inline GaussianBelief ukf_step(const SystemModel& model, const GaussianBelief& belief, int k,
                               const Eigen::VectorXd& y_next, const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                               const UtParams& ut = {}) {
  return detail::sigma_point_step(model, belief, k, y_next, q, r,
                                  [&](const Eigen::VectorXd& m, const Eigen::MatrixXd& c) {
                                    return unscented_points(m, c, ut);
                                  });
}

inline GaussianBelief ckf_step(const SystemModel& model, const GaussianBelief& belief, int k,
                               const Eigen::VectorXd& y_next, const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
  return detail::sigma_point_step(model, belief, k, y_next, q, r,
                                  [](const Eigen::VectorXd& m, const Eigen::MatrixXd& c) {
                                    return cubature_points(m, c);
                                  });
}

// Particle filters ---------------------------------------------------------------------------

struct ParticleSet {
  Eigen::MatrixXd particles;    ///< n_x x N_p
  std::vector<double> weights;  ///< nonnegative, sums to one
  bool degenerate = false;      ///< every likelihood underflowed on the last step

  [[nodiscard]] Eigen::Index size() const { return particles.cols(); }

  [[nodiscard]] Eigen::VectorXd mean() const {
    return particles * Eigen::Map<const Eigen::VectorXd>(weights.data(), size());
  }

  [[nodiscard]] Eigen::MatrixXd covariance() const {
    const Eigen::VectorXd m = mean();
    const Eigen::MatrixXd dev = particles.colwise() - m;
    return symmetrized(dev * Eigen::Map<const Eigen::VectorXd>(weights.data(), size()).asDiagonal() *
                       dev.transpose());
  }
};

/// Index counts: entry i is how many copies of particle i survive.
using ResampleCounts = std::vector<std::size_t>;

/// floor(N w_i) deterministic copies, the rest drawn multinomially from the residual weights.
inline ResampleCounts resample_residual(std::span<const double> weights, std::size_t count, Rng& rng) {
  ResampleCounts out(weights.size(), 0);
  std::vector<double> residual(weights.size(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double expected = static_cast<double>(count) * weights[i];
    const auto copies = static_cast<std::size_t>(std::floor(expected));
    out[i] = copies;
    assigned += copies;
    residual[i] = std::max(0.0, expected - static_cast<double>(copies));
  }
  // round-off can push the floors one past the budget
  for (std::size_t i = weights.size(); assigned > count && i-- > 0;) {
    const std::size_t take = std::min(out[i], assigned - count);
    out[i] -= take;
    assigned -= take;
  }
  if (assigned < count) {
    std::discrete_distribution<std::size_t> pick(residual.begin(), residual.end());
    const bool any_residual = std::any_of(residual.begin(), residual.end(), [](double r) { return r > 0.0; });
    for (; assigned < count; ++assigned) {
      if (any_residual) {
        ++out[pick(rng)];
      } else {
        ++out[std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng)];
      }
    }
  }
  return out;
}

/// One uniform per stratum [i/N, (i+1)/N), each mapped through the inverse weight CDF.
inline ResampleCounts resample_stratified(std::span<const double> weights, std::size_t count, Rng& rng) {
  ResampleCounts out(weights.size(), 0);
  if (weights.empty() || count == 0) {
    return out;
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::size_t i = 0;
  double cumulative = weights[0] / total;
  for (std::size_t s = 0; s < count; ++s) {
    const double u = (static_cast<double>(s) + uniform(rng)) / static_cast<double>(count);
    while (u >= cumulative && i + 1 < weights.size()) {
      ++i;
      cumulative += weights[i] / total;
    }
    ++out[i];
  }
  return out;
}

enum class Resampler { residual, stratified };

inline std::string to_string(Resampler r) { return r == Resampler::residual ? "residual" : "stratified"; }

struct PfOptions {
  Resampler resampler = Resampler::residual;
  bool resample = true;
  double threshold_ratio = 0.5;  ///< resample when ESS < ratio * N_p
};

struct PfStep {
  ParticleSet set;        ///< after resampling, if it happened
  Eigen::VectorXd mean;   ///< weighted posterior mean before resampling
  Eigen::MatrixXd covariance;
  double ess = 0.0;
  bool resampled = false;
};

/// A draw of the process noise at 1-based time t. Correlated laws are sampled through their marginal.
inline Eigen::VectorXd sample_noise_step(const NoiseSpec& spec, int t, Rng& rng) {
  if (const auto* white = std::get_if<WhiteGaussian>(&spec)) {
    return psd_sqrt(white->covariance) * standard_normal_vector(white->covariance.rows(), rng);
  }
  int horizon = t;
  if (const auto* joint = std::get_if<JointGaussian>(&spec)) {
    horizon = static_cast<int>(joint->horizon());
  } else if (const auto* klu = std::get_if<KLUniform>(&spec)) {
    horizon = static_cast<int>(klu->basis->horizon());
  }
  return sample_noise_path(spec, horizon, rng).col(t - 1);
}

/// Bootstrap particle filter step from x_k to x_{k+1} with measurement y_{k+1}.
inline PfStep pf_step(const SystemModel& model, const ParticleSet& prior, int k, const Eigen::VectorXd& y_next,
                      const NoiseSpec& proc, const NoiseSpec& meas, const PfOptions& options, Rng& rng) {
  const Eigen::Index n = prior.size();
  if (n < 1 || static_cast<Eigen::Index>(prior.weights.size()) != n) {
    throw std::invalid_argument("pf_step: particle set is empty or weights do not match");
  }
  const int t = k + 1;
  std::vector<MeasIndex> indices;
  for (Eigen::Index c = 0; c < model.meas_dim; ++c) {
    indices.push_back({t, static_cast<int>(c)});
  }
  const MarginalDensity likelihood(meas, indices);
  const Eigen::MatrixXd proc_root =
      std::holds_alternative<WhiteGaussian>(proc) ? psd_sqrt(std::get<WhiteGaussian>(proc).covariance)
                                                  : Eigen::MatrixXd();

  PfStep out;
  out.set.particles.resize(model.state_dim, n);
  std::vector<double> log_w(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd w = proc_root.size() > 0 ? Eigen::VectorXd(proc_root * standard_normal_vector(model.noise_dim, rng))
                                                   : sample_noise_step(proc, t, rng);
    out.set.particles.col(j) = evaluate_transition(model, k, prior.particles.col(j), w);
    const Eigen::VectorXd residual = y_next - evaluate_measurement(model, t, out.set.particles.col(j));
    log_w[j] = std::log(prior.weights[j]) + likelihood.log_pdf(residual);
  }
  out.set.weights.resize(static_cast<std::size_t>(n));
  const double lse = normalize_log_weights(log_w, out.set.weights);
  out.set.degenerate = !std::isfinite(lse);
  out.mean = out.set.mean();
  out.covariance = out.set.covariance();
  out.ess = effective_sample_size(out.set.weights);

  if (options.resample && out.ess < options.threshold_ratio * static_cast<double>(n)) {
    const ResampleCounts counts = options.resampler == Resampler::residual
                                      ? resample_residual(out.set.weights, static_cast<std::size_t>(n), rng)
                                      : resample_stratified(out.set.weights, static_cast<std::size_t>(n), rng);
    Eigen::MatrixXd next(model.state_dim, n);
    Eigen::Index slot = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      for (std::size_t c = 0; c < counts[i]; ++c) {
        next.col(slot++) = out.set.particles.col(static_cast<Eigen::Index>(i));
      }
    }
    out.set.particles = std::move(next);
    std::fill(out.set.weights.begin(), out.set.weights.end(), 1.0 / static_cast<double>(n));
    out.resampled = true;
  }
  return out;
}

/// N_p particles drawn from the initial law with equal weights.
inline ParticleSet initial_particles(const InitialStateSpec& init, Eigen::Index count, Rng& rng) {
  ParticleSet set;
  set.particles.resize(initial_dim(init), count);
  for (Eigen::Index j = 0; j < count; ++j) {
    set.particles.col(j) = sample_initial(init, rng);
  }
  set.weights.assign(static_cast<std::size_t>(count), 1.0 / static_cast<double>(count));
  return set;
}

// Whole-horizon drivers ----------------------------------------------------------------------

enum class GaussianFilter { ekf, ukf, ckf };

/// Runs a Gaussian filter from the moments of x_0; returns estimates for t = 1..K.
inline std::vector<Estimate> gaussian_run(GaussianFilter kind, const SystemModel& model, const InitialStateSpec& init,
                                          const Eigen::MatrixXd& measurements, const Eigen::MatrixXd& q,
                                          const Eigen::MatrixXd& r, const UtParams& ut = {}) {
  auto [m0, p0] = initial_moments(init);
  GaussianBelief belief{std::move(m0), std::move(p0)};
  std::vector<Estimate> out;
  out.reserve(static_cast<std::size_t>(measurements.cols()));
  for (Eigen::Index t = 1; t <= measurements.cols(); ++t) {
    const int k = static_cast<int>(t - 1);
    const Eigen::VectorXd y = measurements.col(t - 1);
    switch (kind) {
      case GaussianFilter::ekf:
        belief = ekf_step(model, belief, k, y, q, r);
        break;
      case GaussianFilter::ukf:
        belief = ukf_step(model, belief, k, y, q, r, ut);
        break;
      case GaussianFilter::ckf:
        belief = ckf_step(model, belief, k, y, q, r);
        break;
    }
    Estimate e;
    e.mean = belief.mean;
    e.covariance = belief.covariance;
    out.push_back(std::move(e));
  }
  return out;
}

/// Bootstrap particle filter over the horizon; estimates are pre-resampling weighted moments.
inline std::vector<Estimate> pf_run(const SystemModel& model, const InitialStateSpec& init, const NoiseSpec& proc,
                                    const NoiseSpec& meas, const Eigen::MatrixXd& measurements,
                                    Eigen::Index particle_count, const PfOptions& options, Rng& rng) {
  ParticleSet set = initial_particles(init, particle_count, rng);
  std::vector<Estimate> out;
  out.reserve(static_cast<std::size_t>(measurements.cols()));
  for (Eigen::Index t = 1; t <= measurements.cols(); ++t) {
    PfStep step = pf_step(model, set, static_cast<int>(t - 1), measurements.col(t - 1), proc, meas, options, rng);
    Estimate e;
    e.mean = std::move(step.mean);
    e.covariance = std::move(step.covariance);
    e.ess = step.ess;
    e.degenerate = step.set.degenerate;
    out.push_back(std::move(e));
    set = std::move(step.set);
  }
  return out;
}

}  // namespace kcqf::baselines

#endif  // KCQF_BASELINES_HPP
