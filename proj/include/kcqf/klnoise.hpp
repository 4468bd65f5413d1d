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

#ifndef KCQF_KLNOISE_HPP
#define KCQF_KLNOISE_HPP

#include <kcqf/linalg.hpp>
#include <kcqf/random.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * \file
 * \brief Karhunen-Loeve construction of correlated, non-Gaussian process noise.
 *
 * A stationary kernel rho(i, j) over a discrete horizon is eigendecomposed and the noise path is
 * synthesized as w_k = mean + sum_n xi_n sqrt(lambda_n) f_{n,k} with independent uniform xi_n.
 * Uniform coefficients make every w_k non-Gaussian, and the long kernel makes the path
 * non-Markovian.
 */

namespace kcqf::kl {

/// Half-width of the uniform coefficient law. U[-sqrt(30), sqrt(30)] has variance 10.
inline const double kDefaultXiHalfWidth = std::sqrt(30.0);

/// K x K kernel matrix with unit diagonal.
struct CorrelationMatrix {
  Eigen::MatrixXd values;

  [[nodiscard]] Eigen::Index horizon() const { return values.rows(); }
};

/// Truncated K-L basis.
struct KLBasis {
  Eigen::VectorXd eigenvalues;   ///< lambda_1 > ... > lambda_M > 0
  Eigen::MatrixXd eigenvectors;  ///< K x M, column n is f_n
  Eigen::VectorXd spectrum;      ///< all K eigenvalues of the kernel, descending
  double xi_half_width = kDefaultXiHalfWidth;
  double mean_offset = 0.0;

  [[nodiscard]] Eigen::Index order() const { return eigenvalues.size(); }
  [[nodiscard]] Eigen::Index horizon() const { return eigenvectors.rows(); }
  [[nodiscard]] double xi_variance() const { return xi_half_width * xi_half_width / 3.0; }

  /// Var(w_k) for 1-based step k under the truncated expansion.
  [[nodiscard]] double marginal_variance(Eigen::Index k) const {
    double var = 0.0;
    for (Eigen::Index n = 0; n < order(); ++n) {
      const double f = eigenvectors(k - 1, n);
      var += eigenvalues(n) * f * f;
    }
    return xi_variance() * var;
  }

  /// Hard bound on |w_k - mean| implied by the bounded coefficients.
  [[nodiscard]] double support_bound(Eigen::Index k) const {
    double bound = 0.0;
    for (Eigen::Index n = 0; n < order(); ++n) {
      bound += std::sqrt(eigenvalues(n)) * std::abs(eigenvectors(k - 1, n));
    }
    return xi_half_width * bound;
  }
};

/// Squared-exponential kernel rho(i, j) = exp(-((i - j) / length_scale)^2).
inline CorrelationMatrix build_correlation(Eigen::Index horizon, double length_scale = 15.0) {
  if (horizon < 2) {
    throw std::invalid_argument("build_correlation: horizon must be at least 2");
  }
  if (!(length_scale > 0.0)) {
    throw std::invalid_argument("build_correlation: length scale must be positive");
  }
  CorrelationMatrix r{Eigen::MatrixXd(horizon, horizon)};
  for (Eigen::Index i = 0; i < horizon; ++i) {
    r.values(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double u = static_cast<double>(i - j) / length_scale;
      const double rho = std::exp(-u * u);
      r.values(i, j) = rho;
      r.values(j, i) = rho;
    }
  }
  return r;
}

namespace detail {

// Flip so the first component with magnitude above `tol` is positive.
inline void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v, double tol = 1e-12) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol) {
      if (v(i) < 0.0) {
        v = -v;
      }
      return;
    }
  }
}

struct Spectrum {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // matching columns
};

inline Spectrum descending_spectrum(const Eigen::MatrixXd& r) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r);
  if (solver.info() != Eigen::Success) {
    throw numerical_error("kl_decompose: symmetric eigensolver did not converge");
  }
  const Eigen::Index n = r.rows();
  Spectrum out{solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
  for (Eigen::Index c = 0; c < n; ++c) {
    canonicalize_sign(out.vectors.col(c));
  }
  return out;
}

}  // namespace detail

/// Keeps the `order` leading eigenpairs of the kernel.
/**
 * Rejects non-symmetric input and any pair of kept eigenvalues closer than 1e-12, since the
 * expansion requires a strictly decreasing spectrum. Eigenvectors are orthonormal with the first
 * nonzero component positive.
 */
inline KLBasis kl_decompose(const CorrelationMatrix& r, Eigen::Index order, double xi_half_width = kDefaultXiHalfWidth,
                            double mean_offset = 0.0) {
  const Eigen::Index horizon = r.horizon();
  if (r.values.cols() != horizon) {
    throw std::invalid_argument("kl_decompose: correlation matrix must be square");
  }
  if (order < 1 || order > horizon) {
    throw std::invalid_argument("kl_decompose: order must lie in [1, K]");
  }
  if (asymmetry(r.values) > 1e-12) {
    throw std::invalid_argument("kl_decompose: correlation matrix is not symmetric");
  }
  const detail::Spectrum spec = detail::descending_spectrum(r.values);
  for (Eigen::Index n = 0; n < order; ++n) {
    if (!(spec.values(n) > 0.0)) {
      throw std::invalid_argument("kl_decompose: kept eigenvalue " + std::to_string(n + 1) + " is not positive");
    }
    if (n > 0 && spec.values(n - 1) - spec.values(n) <= 1e-12) {
      throw std::invalid_argument("kl_decompose: eigenvalues " + std::to_string(n) + " and " + std::to_string(n + 1) +
                                  " coincide; the expansion needs a strictly decreasing spectrum");
    }
  }
  KLBasis basis;
  basis.eigenvalues = spec.values.head(order);
  basis.eigenvectors = spec.vectors.leftCols(order);
  basis.spectrum = spec.values;
  basis.xi_half_width = xi_half_width;
  basis.mean_offset = mean_offset;
  return basis;
}

/// sum_{n<order} lambda_n f_n f_n^T without the strict-ordering check (trailing modes may be tied).
inline Eigen::MatrixXd truncated_reconstruction(const CorrelationMatrix& r, Eigen::Index order) {
  const detail::Spectrum spec = detail::descending_spectrum(r.values);
  const Eigen::MatrixXd f = spec.vectors.leftCols(order);
  return f * spec.values.head(order).asDiagonal() * f.transpose();
}

/// Draws the coefficient vector xi, one uniform per kept mode.
inline Eigen::VectorXd kl_sample_coefficients(const KLBasis& basis, Rng& rng) {
  std::uniform_real_distribution<double> uniform(-basis.xi_half_width, basis.xi_half_width);
  Eigen::VectorXd xi(basis.order());
  for (Eigen::Index n = 0; n < basis.order(); ++n) {
    xi(n) = uniform(rng);
  }
  return xi;
}

/// Maps coefficients to the noise path w_{1:K}.
inline Eigen::VectorXd kl_synthesize(const KLBasis& basis, const Eigen::VectorXd& xi) {
  const Eigen::VectorXd scaled = xi.cwiseProduct(basis.eigenvalues.cwiseSqrt());
  return (basis.eigenvectors * scaled).array() + basis.mean_offset;
}

/// One noise path w_{1:K}; entry k-1 holds w_k.
inline Eigen::VectorXd kl_sample_path(const KLBasis& basis, Rng& rng) {
  return kl_synthesize(basis, kl_sample_coefficients(basis, rng));
}

/// Normalized histogram.
struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> density;  ///< per bin, integrates to one over [lower, upper)
  std::size_t counted = 0;      ///< samples that fell inside the range

  [[nodiscard]] std::size_t bins() const { return density.size(); }
  [[nodiscard]] double bin_width() const { return (upper - lower) / static_cast<double>(density.size()); }
  [[nodiscard]] double center(std::size_t i) const { return lower + (static_cast<double>(i) + 0.5) * bin_width(); }
};

/// Histogram density estimate over [lower, upper). Samples outside the range are dropped.
inline Histogram empirical_density(std::span<const double> samples, std::size_t bin_count, double lower,
                                   double upper) {
  if (samples.size() < 2) {
    throw std::invalid_argument("empirical_density: need at least two samples");
  }
  if (bin_count < 2) {
    throw std::invalid_argument("empirical_density: need at least two bins");
  }
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower)) {
    throw std::invalid_argument("empirical_density: degenerate range");
  }
  Histogram h{lower, upper, std::vector<double>(bin_count, 0.0), 0};
  const double width = h.bin_width();
  std::vector<std::size_t> counts(bin_count, 0);
  for (const double s : samples) {
    if (!(s >= lower && s < upper)) {
      continue;
    }
    auto bin = static_cast<std::size_t>((s - lower) / width);
    bin = std::min(bin, bin_count - 1);
    ++counts[bin];
    ++h.counted;
  }
  if (h.counted == 0) {
    throw std::invalid_argument("empirical_density: no samples inside the range");
  }
  const double scale = 1.0 / (static_cast<double>(h.counted) * width);
  for (std::size_t i = 0; i < bin_count; ++i) {
    h.density[i] = static_cast<double>(counts[i]) * scale;
  }
  return h;
}

/// Histogram spanning [min, max] of the samples.
inline Histogram empirical_density(std::span<const double> samples, std::size_t bin_count) {
  if (samples.empty()) {
    throw std::invalid_argument("empirical_density: need at least two samples");
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  // nudge the top edge so the maximum lands in the last bin
  return empirical_density(samples, bin_count, *lo, std::nextafter(*hi, std::numeric_limits<double>::infinity()));
}

inline double gaussian_density(double x, double mean, double variance) {
  const double z = x - mean;
  return std::exp(-0.5 * (z * z / variance + kLog2Pi + std::log(variance)));
}

/// max_i |h(center_i) - N(center_i; mean, variance)|.
inline double sup_distance_to_gaussian(const Histogram& h, double mean, double variance) {
  double sup = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    sup = std::max(sup, std::abs(h.density[i] - gaussian_density(h.center(i), mean, variance)));
  }
  return sup;
}

/// max_i |a_i - b_i| for two histograms on the same grid.
inline double sup_distance(const Histogram& a, const Histogram& b) {
  if (a.bins() != b.bins() || a.lower != b.lower || a.upper != b.upper) {
    throw std::invalid_argument("sup_distance: histograms are on different grids");
  }
  double sup = 0.0;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    sup = std::max(sup, std::abs(a.density[i] - b.density[i]));
  }
  return sup;
}

}  // namespace kcqf::kl

#endif  // KCQF_KLNOISE_HPP
