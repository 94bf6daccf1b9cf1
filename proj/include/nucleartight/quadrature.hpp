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

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace nucleartight {

/// Orthonormal Hermite functions h_0..h_{out.size()-1} at x by the
/// normalized three-term recurrence
///   h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}.
/// Never forms raw Hermite polynomials, so it stays finite for large k.
inline void hermite_functions(double x, std::span<double> out) noexcept {
  if (out.empty()) return;
  // pi^{-1/4}
  constexpr double kNorm = 0.75112554446494248286;
  out[0] = kNorm * std::exp(-0.5 * x * x);
  if (out.size() == 1) return;
  out[1] = std::numbers::sqrt2 * x * out[0];
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = std::sqrt(2.0 / (kk + 1.0)) * x * out[k] -
                 std::sqrt(kk / (kk + 1.0)) * out[k - 1];
  }
}

inline std::vector<double> hermite_functions(double x, std::size_t count) {
  std::vector<double> out(count);
  hermite_functions(x, out);
  return out;
}

/// Gauss-Hermite rule for the weight e^{-x^2}.
/// `weights` integrate f(x) e^{-x^2}; `folded_weights` = weights * e^{x^2}
/// integrate f(x) directly and are computed without the overflowing factor.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> folded_weights;
};

inline GaussHermiteRule gauss_hermite(std::size_t order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  const auto q = static_cast<Eigen::Index>(order);

  // Golub-Welsch: Jacobi matrix off-diagonal sqrt(k/2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index k = 1; k < q; ++k) {
    const double b = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);
  std::vector<double> x(eig.eigenvalues().data(), eig.eigenvalues().data() + q);

  // Newton polish on h_Q, then enforce exact symmetry about 0.
  std::vector<double> h(order + 2);
  const double qd = static_cast<double>(order);
  for (double& xi : x) {
    for (int it = 0; it < 3; ++it) {
      hermite_functions(xi, h);
      const double deriv = std::sqrt(qd / 2.0) * h[order - 1] -
                           std::sqrt((qd + 1.0) / 2.0) * h[order + 1];
      if (deriv == 0.0) break;
      xi -= h[order] / deriv;
    }
  }
  for (std::size_t i = 0; i < order / 2; ++i) {
    const double m = 0.5 * (x[order - 1 - i] - x[i]);
    x[i] = -m;
    x[order - 1 - i] = m;
  }
  if (order % 2 == 1) x[order / 2] = 0.0;

  GaussHermiteRule rule;
  rule.nodes = x;
  rule.weights.resize(order);
  rule.folded_weights.resize(order);
  std::vector<double> hv(order);
  for (std::size_t i = 0; i < order; ++i) {
    hermite_functions(x[i], hv);
    double christoffel = 0.0;
    for (double v : hv) christoffel += v * v;
    rule.folded_weights[i] = 1.0 / christoffel;
    rule.weights[i] = rule.folded_weights[i] * std::exp(-x[i] * x[i]);
  }
  return rule;
}

/// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(std::size_t order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double n = static_cast<double>(order);
  for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (std::size_t k = 2; k <= order; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * z * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[order - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

}  // namespace nucleartight
