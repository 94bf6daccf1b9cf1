// Copyright 2026 The nucleartight Authors.
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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nucleartight/diagnostics.hpp"
#include "nucleartight/rng.hpp"

namespace nt = nucleartight;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double shift = 0.0) {
  nt::NormalStream rng({seed, nt::StreamPurpose::test, 0, 0, 0});
  std::vector<double> v(n);
  for (auto& x : v) x = shift + rng.next();
  return v;
}

Eigen::MatrixXd as_matrix(const std::vector<double>& v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return m;
}

// O(mn) oracle: evaluate both empirical CDFs at every pooled point.
double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double v : pooled) {
    const double fa = static_cast<double>(std::count_if(a.begin(), a.end(), [v](double x) { return x <= v; })) / a.size();
    const double fb = static_cast<double>(std::count_if(b.begin(), b.end(), [v](double x) { return x <= v; })) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace

TEST(Ks, IdenticalAndDisjointSamples) {
  const auto a = normals(300, 1);
  EXPECT_EQ(nt::ks_two_sample(a, a).statistic, 0.0);
  std::vector<double> neg, pos;
  for (double x : a) (x < 0 ? neg : pos).push_back(x);
  EXPECT_EQ(nt::ks_two_sample(neg, pos).statistic, 1.0);
  const std::vector<double> one{1.0};
  EXPECT_THROW(nt::ks_two_sample(one, a), std::invalid_argument);
}

TEST(Ks, MatchesBruteForceWithTies) {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> u(0, 9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(37), b(53);
    for (auto& x : a) x = u(gen);
    for (auto& x : b) x = u(gen) + (trial % 3);
    EXPECT_NEAR(nt::ks_two_sample(a, b).statistic, brute_ks(a, b), 1e-15);
  }
}

TEST(Ks, CriticalValuesAndPValues) {
  const auto r = nt::ks_two_sample(normals(2000, 3), normals(2000, 4));
  EXPECT_NEAR(r.critical_01, 1.628 * std::sqrt(2.0 / 2000.0), 1e-15);
  EXPECT_NEAR(r.critical_05, 1.358 * std::sqrt(2.0 / 2000.0), 1e-15);
  EXPECT_NEAR(nt::kolmogorov_survival(1.358), 0.05, 5e-4);
  EXPECT_NEAR(nt::kolmogorov_survival(1.628), 0.01, 2e-4);
  // Both series branches agree where they meet.
  EXPECT_NEAR(nt::kolmogorov_survival(1.1799999), nt::kolmogorov_survival(1.1800001), 1e-6);
  EXPECT_EQ(nt::kolmogorov_survival(0.0), 1.0);
  EXPECT_LT(nt::kolmogorov_survival(4.0), 1e-12);
}

TEST(Ks, NullCalibrationOfTwoSampleTest) {
  int below = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const auto r = nt::ks_two_sample(normals(2000, 1000 + 2 * rep), normals(2000, 1001 + 2 * rep));
    below += r.statistic < r.critical_01;
  }
  EXPECT_GE(below, 98);
}

TEST(Ks, InvariantUnderMonotoneTransforms) {
  auto a = normals(500, 5), b = normals(700, 6, 0.2);
  const double d = nt::ks_two_sample(a, b).statistic;
  for (auto& x : a) x = std::exp(3 * x) + 1;
  for (auto& x : b) x = std::exp(3 * x) + 1;
  EXPECT_EQ(nt::ks_two_sample(a, b).statistic, d);
  EXPECT_GE(d, 0.0);
  EXPECT_LE(d, 1.0);
}

TEST(Ks, OneSampleAgainstNormal) {
  const auto a = normals(2000, 7);
  const auto r = nt::ks_one_sample(a, nt::standard_normal_cdf);
  EXPECT_LT(r.statistic, r.critical_01);
  const auto shifted = normals(2000, 7, 0.5);
  EXPECT_GT(nt::ks_one_sample(shifted, nt::standard_normal_cdf).statistic, r.critical_01);
  EXPECT_NEAR(nt::standard_normal_cdf(1.0), 0.8413447460685429, 1e-15);
}

TEST(Energy, EqualMultisetsNearZero) {
  const auto x = normals(500, 8);
  auto y = x;
  std::reverse(y.begin(), y.end());
  const auto r = nt::energy_distance(as_matrix(x), as_matrix(y));
  // The cross mean keeps its zero diagonal: statistic = -2 mean_{i!=j}|x_i - x_j| / m.
  double off = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) off += std::abs(x[i] - x[j]);
  }
  off /= static_cast<double>(x.size() * (x.size() - 1));
  EXPECT_NEAR(r.statistic, -2.0 * off / static_cast<double>(x.size()), 1e-12);
  // Within twice the null standard error at this size (jackknife SE averaged
  // over independent null pairs).
  double se = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    se += nt::energy_distance(as_matrix(normals(500, 80 + 2 * rep)), as_matrix(normals(500, 81 + 2 * rep))).standard_error;
  }
  EXPECT_LE(std::abs(r.statistic), 2 * se / 10.0);
}

TEST(Energy, ShiftedGaussians) {
  // Oracle: 2 E|x - y| - 2 E|x - x'| with x - y ~ N(10, 2), x - x' ~ N(0, 2).
  const double sd = std::sqrt(2.0);
  const double e_xy = sd * std::sqrt(2 / std::numbers::pi) * std::exp(-100.0 / 4.0) +
                      10.0 * (1.0 - 2.0 * 0.5 * std::erfc(10.0 / sd / std::numbers::sqrt2));
  const double oracle = 2 * e_xy - 2 * 2 / std::sqrt(std::numbers::pi);
  const auto r = nt::energy_distance(as_matrix(normals(2000, 9)), as_matrix(normals(2000, 10, 10.0)));
  EXPECT_GE(r.statistic, 15.0);
  EXPECT_NEAR(r.statistic, oracle, 3 * r.standard_error + 0.02);
}

TEST(Energy, PermutationAndThreadInvariance) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(200, 3), y(150, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(gen);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = z(gen) + 0.3;
  const auto a = nt::energy_distance(x, y, 1);
  const auto b = nt::energy_distance(x, y, 4);
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_EQ(a.standard_error, b.standard_error);
  Eigen::MatrixXd xp = x.colwise().reverse();
  EXPECT_NEAR(nt::energy_distance(xp, y).statistic, a.statistic, 1e-12);
  EXPECT_NEAR(nt::energy_distance(y, x).statistic, a.statistic, 1e-12);
  EXPECT_THROW(nt::energy_distance(x, Eigen::MatrixXd::Zero(5, 2)), std::invalid_argument);
  EXPECT_TRUE(std::isnan(nt::energy_distance(x.topRows(2), y).standard_error));
}

TEST(Energy, NullCalibration) {
  int within = 0;
  for (std::uint64_t rep = 0; rep < 40; ++rep) {
    const auto r = nt::energy_distance(as_matrix(normals(300, 500 + 2 * rep)), as_matrix(normals(300, 501 + 2 * rep)));
    within += std::abs(r.statistic) <= 3 * r.standard_error;
  }
  EXPECT_GE(within, 36);
}

TEST(Moments, KnownValues) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = nt::summarize_moments(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.variance, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.mean_se, std::sqrt(5.0 / 3.0 / 4.0));
  EXPECT_THROW(nt::summarize_moments(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Report, RoundTripAndFingerprint) {
  std::vector<nlohmann::json> cells{{{"n", 10}, {"ks", 0.01}, {"p_value", 0.4}}, {{"n", 40}, {"ks", 0.02}}};
  const auto r = nt::assemble_report("unit", cells, {{"seed", 1}}, 2, {{"energy_trend_ok", true}});
  EXPECT_TRUE(r.complete);
  const auto back = nt::ConvergenceReport::parse(r.serialize());
  EXPECT_EQ(back.serialize(), r.serialize());
  EXPECT_EQ(back.fingerprint(), r.fingerprint());
  EXPECT_EQ(r.fingerprint().size(), 16u);
  EXPECT_THROW(nt::ConvergenceReport::parse("{\"schema\": \"other\"}"), std::invalid_argument);
}

TEST(Report, IncompleteEmptyAndInvalidValues) {
  EXPECT_THROW(nt::assemble_report("unit", {}, {}, 1), std::invalid_argument);
  const auto partial = nt::assemble_report("unit", {{{"n", 1}}}, {}, 3);
  EXPECT_FALSE(partial.complete);
  EXPECT_THROW(nt::assemble_report("unit", {{{"ks", NAN}}}, {}, 1), nt::NumericalIntegrityError);
  EXPECT_THROW(nt::assemble_report("unit", {{{"p_value", 1.5}}}, {}, 1), nt::NumericalIntegrityError);
  EXPECT_THROW(nt::assemble_report("unit", {{{"n", 1}}}, {}, 1, {{"exceedance", {0.2, -0.1}}}),
               nt::NumericalIntegrityError);
}

TEST(Fnv, ReferenceValues) {
  EXPECT_EQ(nt::fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(nt::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(nt::hex64(0xabcull), "0000000000000abc");
}
