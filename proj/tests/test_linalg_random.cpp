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


#include <gtest/gtest.h>

#include <kcqf/linalg.hpp>
#include <kcqf/random.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

namespace {

using kcqf::derive_seed;
using kcqf::fnv1a;
using kcqf::splitmix64;

TEST(LogSumExp, MatchesDirectSumOnModerateValues) {
  const std::vector<double> v{-1.0, 0.5, 2.0, -3.0};
  double direct = 0.0;
  for (const double x : v) {
    direct += std::exp(x);
  }
  EXPECT_NEAR(kcqf::log_sum_exp(v), std::log(direct), 1e-14);
}

TEST(LogSumExp, StableFarBelowUnderflow) {
  const std::vector<double> v{-1e5, -1e5};
  EXPECT_NEAR(kcqf::log_sum_exp(v), -1e5 + std::log(2.0), 1e-9);
}

TEST(LogSumExp, AllMinusInfinity) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const std::vector<double> v{ninf, ninf};
  EXPECT_EQ(kcqf::log_sum_exp(v), ninf);
  EXPECT_EQ(kcqf::log_sum_exp(std::vector<double>{}), ninf);
}

TEST(NormalizeLogWeights, SumsToOne) {
  const std::vector<double> lw{-1000.0, -1001.0, -999.5, -1200.0};
  std::vector<double> w(lw.size());
  kcqf::normalize_log_weights(lw, w);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  EXPECT_GT(w[2], w[0]);
  EXPECT_GT(w[0], w[1]);
}

TEST(NormalizeLogWeights, TotalUnderflowGivesUniform) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const std::vector<double> lw{ninf, ninf, ninf};
  std::vector<double> w(3);
  EXPECT_EQ(kcqf::normalize_log_weights(lw, w), ninf);
  for (const double x : w) {
    EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
  }
}

TEST(EffectiveSampleSize, UniformAndOneHot) {
  EXPECT_DOUBLE_EQ(kcqf::effective_sample_size(std::vector<double>(8, 0.125)), 8.0);
  EXPECT_DOUBLE_EQ(kcqf::effective_sample_size(std::vector<double>{0.0, 1.0, 0.0}), 1.0);
}

TEST(PsdSqrt, ReconstructsAndHandlesSingular) {
  Eigen::MatrixXd a(2, 2);
  a << 4.0, 2.0, 2.0, 3.0;
  const Eigen::MatrixXd r = kcqf::psd_sqrt(a);
  EXPECT_LT((r * r.transpose() - a).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 1.0, 1.0, 1.0;
  const Eigen::MatrixXd rs = kcqf::psd_sqrt(s);
  EXPECT_LT((rs * rs.transpose() - s).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(kcqf::psd_sqrt(Eigen::MatrixXd::Zero(3, 3)).isZero());
}

TEST(JitteredCholesky, PlainWhenPositiveDefinite) {
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  const Eigen::MatrixXd l = kcqf::jittered_cholesky(a);
  EXPECT_LT((l * l.transpose() - a).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(JitteredCholesky, RecoversRankDeficient) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 1.0, 1.0, 1.0;
  const Eigen::MatrixXd l = kcqf::jittered_cholesky(a);
  EXPECT_LT((l * l.transpose() - a).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(JitteredCholesky, GivesUpOnIndefinite) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(kcqf::jittered_cholesky(a), kcqf::numerical_error);
}

TEST(SymmetricPsd, Detects) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.2, 0.2, 1.0;
  EXPECT_TRUE(kcqf::is_symmetric_psd(a));
  a(0, 1) = 0.3;
  EXPECT_FALSE(kcqf::is_symmetric_psd(a));
  a << 1.0, 2.0, 2.0, 1.0;
  EXPECT_FALSE(kcqf::is_symmetric_psd(a));
}

// Reference outputs of the published SplitMix64 generator seeded with 0.
TEST(Seeding, SplitMix64ReferenceValues) {
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(splitmix64(0x9E3779B97F4A7C15ULL), 0x6E789E6AA1B965F4ULL);
}

// Published FNV-1a 64-bit test vectors.
TEST(Seeding, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xCBF29CE484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xAF63DC4C8601EC8CULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171F73967E8ULL);
}

TEST(Seeding, DeriveSeedIsStableAndSpreads) {
  static_assert(derive_seed(1, 2, 3) == splitmix64(splitmix64(splitmix64(1) ^ 2) ^ 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t run = 0; run < 50; ++run) {
    for (const char* label : {"truth", "kcqf-1", "kcqf-2", "pf-rr", "pf-sr"}) {
      seen.insert(derive_seed(1, run, fnv1a(label)));
    }
  }
  EXPECT_EQ(seen.size(), 250U);
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
}

TEST(Seeding, StandardNormalMoments) {
  kcqf::Rng rng(5);
  const Eigen::VectorXd z = kcqf::standard_normal_vector(200000, rng);
  EXPECT_NEAR(z.mean(), 0.0, 0.01);
  EXPECT_NEAR((z.array() - z.mean()).square().mean(), 1.0, 0.02);
}

}  // namespace
