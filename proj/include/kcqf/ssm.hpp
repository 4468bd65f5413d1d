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

#ifndef KCQF_SSM_HPP
#define KCQF_SSM_HPP

#include <kcqf/klnoise.hpp>
#include <kcqf/linalg.hpp>
#include <kcqf/random.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

/**
 * \file
 * \brief Discrete-time nonlinear state-space models, noise laws and truth simulation.
 *
 * The model is
 *
 *   x_t = transition(t - 1, x_{t-1}, w_t),   y_t = measurement(t, x_t) + v_t,   t = 1..K,
 *
 * with the process noise passed into the transition explicitly. Noise paths are always drawn for
 * the whole horizon at once, which is what the ensemble filter needs for correlated noise.
 */

namespace kcqf {

/// A (time, component) coordinate in a measurement or noise sequence. Time is 1-based.
struct MeasIndex {
  int time = 1;
  int component = 0;

  friend bool operator==(const MeasIndex&, const MeasIndex&) = default;
  friend auto operator<=>(const MeasIndex&, const MeasIndex&) = default;
};

inline std::string to_string(std::span<const MeasIndex> indices) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out << (i ? ", " : "") << '(' << indices[i].time << ',' << indices[i].component << ')';
  }
  out << '}';
  return out.str();
}

struct SystemModel {
  using Transition = std::function<Eigen::VectorXd(int, const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using Measurement = std::function<Eigen::VectorXd(int, const Eigen::VectorXd&)>;
  using TransitionJacobian = std::function<Eigen::MatrixXd(int, const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using MeasurementJacobian = std::function<Eigen::MatrixXd(int, const Eigen::VectorXd&)>;

  Eigen::Index state_dim = 1;
  Eigen::Index meas_dim = 1;
  Eigen::Index noise_dim = 1;
  Transition transition;
  Measurement measurement;
  TransitionJacobian transition_jacobian;    ///< d transition / dx; finite differences when empty
  MeasurementJacobian measurement_jacobian;  ///< d measurement / dx; finite differences when empty
};

// Noise laws ---------------------------------------------------------------------------------

/// Independent zero-mean Gaussian draws with the same per-step covariance.
struct WhiteGaussian {
  Eigen::MatrixXd covariance;
};

/// One Gaussian over the stacked horizon; entry (t, c) sits at (t - 1) * dim + c.
struct JointGaussian {
  Eigen::Index dim = 1;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  [[nodiscard]] Eigen::Index horizon() const { return dim > 0 ? mean.size() / dim : 0; }
};

/// Scalar K-L process with uniform coefficients.
struct KLUniform {
  std::shared_ptr<const kl::KLBasis> basis;
};

/// User-supplied law: path sampler plus marginal log density over arbitrary index subsets.
struct CustomNoise {
  Eigen::Index dim = 1;
  std::function<Eigen::MatrixXd(int horizon, Rng&)> sampler;
  std::function<double(std::span<const MeasIndex>, const Eigen::VectorXd&)> marginal_log_pdf;
  std::function<double(const MeasIndex&)> marginal_variance;  ///< optional
};

using NoiseSpec = std::variant<WhiteGaussian, JointGaussian, KLUniform, CustomNoise>;

/// Noise path: dim x K matrix, column t - 1 holds the draw for time t.
using NoisePath = Eigen::MatrixXd;

struct GaussianInit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

struct CustomInit {
  Eigen::Index dim = 1;
  std::function<Eigen::VectorXd(Rng&)> sampler;
  std::function<double(const Eigen::VectorXd&)> log_density;  ///< optional
};

using InitialStateSpec = std::variant<GaussianInit, CustomInit>;

/// Truth trajectory: states n_x x (K + 1) with column t = x_t, measurements n_y x K with column t - 1 = y_t.
struct Trajectory {
  Eigen::MatrixXd states;
  Eigen::MatrixXd measurements;

  [[nodiscard]] int horizon() const { return static_cast<int>(measurements.cols()); }
  [[nodiscard]] Eigen::VectorXd state(int t) const { return states.col(t); }
  [[nodiscard]] double measurement(const MeasIndex& idx) const { return measurements(idx.component, idx.time - 1); }
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void check_length(const Eigen::VectorXd& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(expected) + ", got " +
                                std::to_string(v.size()));
  }
}

inline void check_covariance(const Eigen::MatrixXd& cov, const char* what) {
  if (!is_symmetric_psd(cov, 1e-12, 1e-10)) {
    throw std::invalid_argument(std::string(what) + ": covariance must be symmetric PSD");
  }
}

}  // namespace detail

// Model evaluation ---------------------------------------------------------------------------

inline Eigen::VectorXd evaluate_transition(const SystemModel& model, int k, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& w) {
  detail::check_length(x, model.state_dim, "evaluate_transition state");
  detail::check_length(w, model.noise_dim, "evaluate_transition noise");
  Eigen::VectorXd next = model.transition(k, x, w);
  detail::check_length(next, model.state_dim, "evaluate_transition output");
  return next;
}

inline Eigen::VectorXd evaluate_measurement(const SystemModel& model, int k, const Eigen::VectorXd& x) {
  detail::check_length(x, model.state_dim, "evaluate_measurement state");
  Eigen::VectorXd y = model.measurement(k, x);
  detail::check_length(y, model.meas_dim, "evaluate_measurement output");
  return y;
}

inline double finite_difference_step(double v) { return std::max(1e-6, 1e-6 * std::abs(v)); }

/// d transition / dx, analytic when supplied, central differences otherwise.
inline Eigen::MatrixXd transition_jacobian(const SystemModel& model, int k, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& w) {
  if (model.transition_jacobian) {
    return model.transition_jacobian(k, x, w);
  }
  Eigen::MatrixXd jac(model.state_dim, model.state_dim);
  for (Eigen::Index i = 0; i < model.state_dim; ++i) {
    const double h = finite_difference_step(x(i));
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up(i) += h;
    down(i) -= h;
    jac.col(i) = (model.transition(k, up, w) - model.transition(k, down, w)) / (2.0 * h);
  }
  return jac;
}

/// d transition / dw by central differences.
inline Eigen::MatrixXd noise_jacobian(const SystemModel& model, int k, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& w) {
  Eigen::MatrixXd jac(model.state_dim, model.noise_dim);
  for (Eigen::Index i = 0; i < model.noise_dim; ++i) {
    const double h = finite_difference_step(w(i));
    Eigen::VectorXd up = w;
    Eigen::VectorXd down = w;
    up(i) += h;
    down(i) -= h;
    jac.col(i) = (model.transition(k, x, up) - model.transition(k, x, down)) / (2.0 * h);
  }
  return jac;
}

inline Eigen::MatrixXd measurement_jacobian(const SystemModel& model, int k, const Eigen::VectorXd& x) {
  if (model.measurement_jacobian) {
    return model.measurement_jacobian(k, x);
  }
  Eigen::MatrixXd jac(model.meas_dim, model.state_dim);
  for (Eigen::Index i = 0; i < model.state_dim; ++i) {
    const double h = finite_difference_step(x(i));
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up(i) += h;
    down(i) -= h;
    jac.col(i) = (model.measurement(k, up) - model.measurement(k, down)) / (2.0 * h);
  }
  return jac;
}

// Noise --------------------------------------------------------------------------------------

inline Eigen::Index noise_dim(const NoiseSpec& spec) {
  return std::visit(detail::overloaded{
                        [](const WhiteGaussian& s) { return s.covariance.rows(); },
                        [](const JointGaussian& s) { return s.dim; },
                        [](const KLUniform&) { return Eigen::Index{1}; },
                        [](const CustomNoise& s) { return s.dim; },
                    },
                    spec);
}

/// Draws a full path over `horizon` steps.
inline NoisePath sample_noise_path(const NoiseSpec& spec, int horizon, Rng& rng) {
  if (horizon < 1) {
    throw std::invalid_argument("sample_noise_path: horizon must be at least 1");
  }
  return std::visit(
      detail::overloaded{
          [&](const WhiteGaussian& s) -> NoisePath {
            const Eigen::MatrixXd root = psd_sqrt(s.covariance);
            NoisePath path(s.covariance.rows(), horizon);
            for (int t = 0; t < horizon; ++t) {
              path.col(t) = root * standard_normal_vector(s.covariance.rows(), rng);
            }
            return path;
          },
          [&](const JointGaussian& s) -> NoisePath {
            if (s.horizon() != horizon) {
              throw std::invalid_argument("sample_noise_path: joint Gaussian horizon " + std::to_string(s.horizon()) +
                                          " does not match " + std::to_string(horizon));
            }
            const Eigen::VectorXd stacked = s.mean + psd_sqrt(s.covariance) * standard_normal_vector(s.mean.size(), rng);
            return stacked.reshaped(s.dim, horizon);
          },
          [&](const KLUniform& s) -> NoisePath {
            if (!s.basis || s.basis->horizon() != horizon) {
              throw std::invalid_argument("sample_noise_path: K-L basis horizon does not match " +
                                          std::to_string(horizon));
            }
            return kl::kl_sample_path(*s.basis, rng).transpose();
          },
          [&](const CustomNoise& s) -> NoisePath {
            NoisePath path = s.sampler(horizon, rng);
            if (path.rows() != s.dim || path.cols() != horizon) {
              throw std::invalid_argument("sample_noise_path: custom sampler returned the wrong shape");
            }
            return path;
          },
      },
      spec);
}

/// Var of a single noise coordinate.
inline double noise_marginal_variance(const NoiseSpec& spec, const MeasIndex& idx) {
  return std::visit(detail::overloaded{
                        [&](const WhiteGaussian& s) { return s.covariance(idx.component, idx.component); },
                        [&](const JointGaussian& s) {
                          const Eigen::Index flat = (idx.time - 1) * s.dim + idx.component;
                          return s.covariance(flat, flat);
                        },
                        [&](const KLUniform& s) { return s.basis->marginal_variance(idx.time); },
                        [&](const CustomNoise& s) { return s.marginal_variance ? s.marginal_variance(idx) : 0.0; },
                    },
                    spec);
}

/// Marginal density of the noise restricted to an index set, prepared once and evaluated many times.
/**
 * Gaussian laws reduce to the sub-mean and sub-covariance over the selected coordinates.
 * Coordinates with exactly zero variance and no cross-covariance are treated as point masses:
 * they contribute nothing when the residual equals the mean and -inf otherwise. Any other
 * singular sub-covariance is an error.
 */
class MarginalDensity {
 public:
  MarginalDensity(const NoiseSpec& spec, std::span<const MeasIndex> indices)
      : indices_(indices.begin(), indices.end()) {
    std::visit(detail::overloaded{
                   [&](const WhiteGaussian& s) { prepare_white(s); },
                   [&](const JointGaussian& s) { prepare_joint(s); },
                   [&](const KLUniform&) {
                     throw std::invalid_argument(
                         "marginal density: the K-L uniform law has no closed-form marginal; wrap it in CustomNoise");
                   },
                   [&](const CustomNoise& s) {
                     if (!s.marginal_log_pdf) {
                       throw std::invalid_argument("marginal density: custom noise has no marginal evaluator");
                     }
                     custom_ = s.marginal_log_pdf;
                   },
               },
               spec);
  }

  [[nodiscard]] std::size_t size() const { return indices_.size(); }
  [[nodiscard]] std::span<const MeasIndex> indices() const { return indices_; }

  [[nodiscard]] double log_pdf(const Eigen::VectorXd& residual) const {
    if (residual.size() != static_cast<Eigen::Index>(indices_.size())) {
      throw std::invalid_argument("marginal density: residual length does not match the index set");
    }
    if (custom_) {
      return custom_(indices_, residual);
    }
    for (const Eigen::Index i : point_mass_) {
      if (residual(i) != mean_(i)) {
        return -std::numeric_limits<double>::infinity();
      }
    }
    Eigen::VectorXd centered(gaussian_.size());
    for (Eigen::Index i = 0; i < gaussian_.size(); ++i) {
      centered(i) = residual(gaussian_(i)) - mean_(gaussian_(i));
    }
    const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(centered);
    return log_norm_ - 0.5 * z.squaredNorm();
  }

 private:
  void prepare_white(const WhiteGaussian& s) {
    const auto n = static_cast<Eigen::Index>(indices_.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      check_component(indices_[a], s.covariance.rows());
      for (Eigen::Index b = 0; b < n; ++b) {
        if (indices_[a].time == indices_[b].time) {
          cov(a, b) = s.covariance(indices_[a].component, indices_[b].component);
        }
      }
    }
    finish(Eigen::VectorXd::Zero(n), cov);
  }

  void prepare_joint(const JointGaussian& s) {
    const auto n = static_cast<Eigen::Index>(indices_.size());
    Eigen::VectorXd mean(n);
    Eigen::MatrixXd cov(n, n);
    std::vector<Eigen::Index> flat(indices_.size());
    for (Eigen::Index a = 0; a < n; ++a) {
      check_component(indices_[a], s.dim);
      if (indices_[a].time > s.horizon()) {
        throw std::invalid_argument("marginal density: index " + to_string(std::span(&indices_[a], 1)) +
                                    " is beyond the joint horizon");
      }
      flat[a] = (indices_[a].time - 1) * s.dim + indices_[a].component;
      mean(a) = s.mean(flat[a]);
    }
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        cov(a, b) = s.covariance(flat[a], flat[b]);
      }
    }
    finish(mean, cov);
  }

  void check_component(const MeasIndex& idx, Eigen::Index dim) const {
    if (idx.time < 1 || idx.component < 0 || idx.component >= dim) {
      throw std::invalid_argument("marginal density: index " + to_string(std::span(&idx, 1)) + " is out of range");
    }
  }

  void finish(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    mean_ = mean;
    const Eigen::Index n = cov.rows();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool isolated_zero = cov(i, i) == 0.0 && cov.row(i).cwiseAbs().sum() == 0.0;
      if (isolated_zero) {
        point_mass_.push_back(i);
      } else {
        keep.push_back(i);
      }
    }
    gaussian_.resize(static_cast<Eigen::Index>(keep.size()));
    Eigen::MatrixXd sub(gaussian_.size(), gaussian_.size());
    for (Eigen::Index a = 0; a < gaussian_.size(); ++a) {
      gaussian_(a) = keep[a];
      for (Eigen::Index b = 0; b < gaussian_.size(); ++b) {
        sub(a, b) = cov(keep[a], keep[b]);
      }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) {
      throw numerical_error("marginal density: singular sub-covariance over index set " + to_string(indices_));
    }
    chol_ = llt.matrixL();
    const Eigen::VectorXd diag = chol_.diagonal();
    if ((diag.array() <= 0.0).any()) {
      throw numerical_error("marginal density: singular sub-covariance over index set " + to_string(indices_));
    }
    log_norm_ = -0.5 * static_cast<double>(gaussian_.size()) * kLog2Pi - diag.array().log().sum();
  }

  std::vector<MeasIndex> indices_;
  std::function<double(std::span<const MeasIndex>, const Eigen::VectorXd&)> custom_;
  Eigen::VectorXd mean_;
  Eigen::VectorXi gaussian_;
  Eigen::MatrixXd chol_;
  std::vector<Eigen::Index> point_mass_;
  double log_norm_ = 0.0;
};

/// log p(residual) for the noise marginal over `indices`.
inline double marginal_noise_log_pdf(const NoiseSpec& spec, std::span<const MeasIndex> indices,
                                     const Eigen::VectorXd& residual) {
  return MarginalDensity(spec, indices).log_pdf(residual);
}

// Initial state and truth --------------------------------------------------------------------

inline Eigen::Index initial_dim(const InitialStateSpec& init) {
  return std::visit(detail::overloaded{
                        [](const GaussianInit& g) { return g.mean.size(); },
                        [](const CustomInit& c) { return c.dim; },
                    },
                    init);
}

/// Draws x_0.
inline Eigen::VectorXd sample_initial(const InitialStateSpec& init, Rng& rng) {
  return std::visit(detail::overloaded{
                        [&](const GaussianInit& g) -> Eigen::VectorXd {
                          return g.mean + psd_sqrt(g.covariance) * standard_normal_vector(g.mean.size(), rng);
                        },
                        [&](const CustomInit& c) -> Eigen::VectorXd { return c.sampler(rng); },
                    },
                    init);
}

/// Gaussian moments of x_0. Custom laws are moment-matched from 10^4 draws of a fixed stream.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> initial_moments(const InitialStateSpec& init) {
  if (const auto* g = std::get_if<GaussianInit>(&init)) {
    return {g->mean, g->covariance};
  }
  const auto& c = std::get<CustomInit>(init);
  Rng rng(0x5EEDULL);
  constexpr int kDraws = 10000;
  Eigen::MatrixXd draws(c.dim, kDraws);
  for (int i = 0; i < kDraws; ++i) {
    draws.col(i) = c.sampler(rng);
  }
  const Eigen::VectorXd mean = draws.rowwise().mean();
  const Eigen::MatrixXd centered = draws.colwise() - mean;
  return {mean, centered * centered.transpose() / kDraws};
}

/// Simulates x_{0:K} and y_{1:K}. Draw order: x_0, process path, measurement path.
inline Trajectory simulate_truth(const SystemModel& model, const InitialStateSpec& init, const NoiseSpec& proc,
                                 const NoiseSpec& meas, int horizon, Rng& rng) {
  if (horizon < 1) {
    throw std::invalid_argument("simulate_truth: horizon must be at least 1");
  }
  if (noise_dim(proc) != model.noise_dim || noise_dim(meas) != model.meas_dim) {
    throw std::invalid_argument("simulate_truth: noise dimensions do not match the model");
  }
  Trajectory traj{Eigen::MatrixXd(model.state_dim, horizon + 1), Eigen::MatrixXd(model.meas_dim, horizon)};
  const Eigen::VectorXd x0 = sample_initial(init, rng);
  detail::check_length(x0, model.state_dim, "simulate_truth initial state");
  const NoisePath w = sample_noise_path(proc, horizon, rng);
  const NoisePath v = sample_noise_path(meas, horizon, rng);
  traj.states.col(0) = x0;
  for (int t = 1; t <= horizon; ++t) {
    traj.states.col(t) = evaluate_transition(model, t - 1, traj.states.col(t - 1), w.col(t - 1));
    traj.measurements.col(t - 1) = evaluate_measurement(model, t, traj.states.col(t)) + v.col(t - 1);
  }
  return traj;
}

}  // namespace kcqf

#endif  // KCQF_SSM_HPP
