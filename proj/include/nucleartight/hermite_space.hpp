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

// Finite-dimensional model of the Schwartz space S(R) and its dual.
//
// A test function is a coefficient vector in the orthonormal Hermite basis
// h_0..h_{N-1}; a dual element is a coefficient vector paired coordinatewise.
// The Hilbertian seminorm ladder
//
//   p_r(phi)^2  = sum_k (2k+1)^{2r}  c_k^2
//   p'_r(f)^2   = sum_k (2k+1)^{-2r} f_k^2
//
// generates the countably Hilbertian topology; the inclusion between the
// completions for r < s is Hilbert-Schmidt exactly when s - r > 1/2.

#include <cmath>
#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nucleartight/expm.hpp"
#include "nucleartight/quadrature.hpp"

namespace nucleartight {

/// Basis truncation N and Gauss-Hermite order Q. Q >= 2N integrates every
/// product h_j h_k (j, k < N) exactly.
struct BasisSpec {
  std::size_t N = 64;
  std::size_t Q = 128;

  static BasisSpec make(std::size_t n, std::size_t q = 0) {
    BasisSpec spec{n, q == 0 ? 2 * n : q};
    spec.validate();
    return spec;
  }

  void validate() const {
    if (N < 2) throw std::invalid_argument("BasisSpec: N must be >= 2");
    if (Q < 2 * N) throw std::invalid_argument("BasisSpec: Q must be >= 2N");
  }

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

inline void require_same_basis(const BasisSpec& a, const BasisSpec& b, const char* where) {
  if (a.N != b.N) {
    throw std::invalid_argument(std::string(where) + ": basis mismatch (N=" +
                                std::to_string(a.N) + " vs " + std::to_string(b.N) + ")");
  }
}

namespace detail {
inline void require_finite(const Eigen::VectorXd& v, const char* where) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(where) + ": non-finite coefficient");
}
}  // namespace detail

/// phi = sum_k coeffs[k] h_k.
struct TestFunction {
  BasisSpec basis;
  Eigen::VectorXd coeffs;

  TestFunction(BasisSpec b, Eigen::VectorXd c) : basis(b), coeffs(std::move(c)) {
    if (static_cast<std::size_t>(coeffs.size()) != basis.N) {
      throw std::invalid_argument("TestFunction: coefficient count must equal N");
    }
    detail::require_finite(coeffs, "TestFunction");
  }

  static TestFunction zero(BasisSpec b) {
    return {b, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.N))};
  }
  static TestFunction unit(BasisSpec b, std::size_t k) {
    if (k >= b.N) throw std::invalid_argument("TestFunction::unit: index out of range");
    auto f = zero(b);
    f.coeffs[static_cast<Eigen::Index>(k)] = 1.0;
    return f;
  }
};

/// <f, phi> = sum_k coeffs[k] c_k.
struct DualElement {
  BasisSpec basis;
  Eigen::VectorXd coeffs;

  DualElement(BasisSpec b, Eigen::VectorXd c) : basis(b), coeffs(std::move(c)) {
    if (static_cast<std::size_t>(coeffs.size()) != basis.N) {
      throw std::invalid_argument("DualElement: coefficient count must equal N");
    }
    detail::require_finite(coeffs, "DualElement");
  }

  static DualElement zero(BasisSpec b) {
    return {b, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.N))};
  }
  static DualElement unit(BasisSpec b, std::size_t k) {
    if (k >= b.N) throw std::invalid_argument("DualElement::unit: index out of range");
    auto f = zero(b);
    f.coeffs[static_cast<Eigen::Index>(k)] = 1.0;
    return f;
  }
};

/// Regularity index r >= 0 with weights w_k = (2k+1)^r.
class SeminormIndex {
 public:
  explicit SeminormIndex(double r) : r_(r) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("SeminormIndex: r must be finite and >= 0");
    }
  }
  double r() const noexcept { return r_; }
  double weight(std::size_t k) const noexcept {
    return std::pow(2.0 * static_cast<double>(k) + 1.0, r_);
  }

 private:
  double r_;
};

/// Increasing chain r_1 < ... < r_m with every consecutive gap > 1/2, so
/// each canonical inclusion in the chain is Hilbert-Schmidt.
class SeminormFamily {
 public:
  explicit SeminormFamily(std::vector<double> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) throw std::invalid_argument("SeminormFamily: empty");
    for (std::size_t j = 0; j < indices_.size(); ++j) {
      SeminormIndex check(indices_[j]);
      if (j > 0 && !(indices_[j] - indices_[j - 1] > 0.5)) {
        throw std::invalid_argument("SeminormFamily: consecutive gaps must exceed 1/2");
      }
    }
  }
  const std::vector<double>& indices() const noexcept { return indices_; }
  SeminormIndex at(std::size_t j) const { return SeminormIndex(indices_.at(j)); }
  std::size_t size() const noexcept { return indices_.size(); }

 private:
  std::vector<double> indices_;
};

/// Quadrature nodes, folded weights and the Q x N table h_k(x_i) for one
/// BasisSpec. Immutable after construction.
class HermiteBasis {
 public:
  explicit HermiteBasis(BasisSpec spec) : spec_(spec) {
    spec_.validate();
    auto rule = gauss_hermite(spec_.Q);
    nodes_ = std::move(rule.nodes);
    folded_weights_ = std::move(rule.folded_weights);
    values_.resize(static_cast<Eigen::Index>(spec_.Q), static_cast<Eigen::Index>(spec_.N));
    std::vector<double> row(spec_.N);
    for (std::size_t i = 0; i < spec_.Q; ++i) {
      hermite_functions(nodes_[i], row);
      for (std::size_t k = 0; k < spec_.N; ++k) {
        values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
      }
    }
  }

  const BasisSpec& spec() const noexcept { return spec_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& folded_weights() const noexcept { return folded_weights_; }
  /// values()(i, k) = h_k(nodes()[i]).
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Gram matrix of h_0..h_{N-1} under the quadrature rule.
  Eigen::MatrixXd gram() const {
    const Eigen::Map<const Eigen::VectorXd> w(folded_weights_.data(),
                                              static_cast<Eigen::Index>(folded_weights_.size()));
    return values_.transpose() * w.asDiagonal() * values_;
  }

  /// Values of phi at the quadrature nodes.
  Eigen::VectorXd reconstruct(const TestFunction& phi) const {
    require_same_basis(spec_, phi.basis, "HermiteBasis::reconstruct");
    return values_ * phi.coeffs;
  }

 private:
  BasisSpec spec_;
  std::vector<double> nodes_;
  std::vector<double> folded_weights_;
  Eigen::MatrixXd values_;
};

/// c_k = sum_i w_i phi(x_i) h_k(x_i) with the e^{x^2}-folded Gauss-Hermite
/// weights, i.e. the quadrature value of the integral of phi h_k.
inline TestFunction project_function(std::span<const double> samples, const HermiteBasis& basis) {
  if (samples.size() != basis.spec().Q) {
    throw std::invalid_argument("project_function: expected one sample per quadrature node");
  }
  Eigen::VectorXd weighted(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw std::invalid_argument("project_function: non-finite sample at node " + std::to_string(i));
    }
    weighted[static_cast<Eigen::Index>(i)] = samples[i] * basis.folded_weights()[i];
  }
  return {basis.spec(), basis.values().transpose() * weighted};
}

/// (N+1) x N matrix of d/dx from span{h_0..h_{N-1}} into span{h_0..h_N}:
///   h_k' = sqrt(k/2) h_{k-1} - sqrt((k+1)/2) h_{k+1}.
inline Eigen::MatrixXd derivative_op_extended(std::size_t n) {
  const auto rows = static_cast<Eigen::Index>(n + 1);
  const auto cols = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const double kd = static_cast<double>(k);
    if (k > 0) d(k - 1, k) = std::sqrt(kd / 2.0);
    d(k + 1, k) = -std::sqrt((kd + 1.0) / 2.0);
  }
  return d;
}

/// Truncated N x N derivative matrix; skew-symmetric.
inline Eigen::MatrixXd derivative_op(const BasisSpec& basis) {
  return derivative_op_extended(basis.N).topRows(static_cast<Eigen::Index>(basis.N));
}

/// L = D^2 = -D D^T: symmetric, negative semidefinite, pentadiagonal.
inline Eigen::MatrixXd laplacian_op(const BasisSpec& basis) {
  const Eigen::MatrixXd d = derivative_op(basis);
  Eigen::MatrixXd l = d * d;
  return 0.5 * (l + l.transpose());
}

/// E(t) = exp(tL), the truncated heat semigroup.
inline Eigen::MatrixXd heat_matrix(double t, const BasisSpec& basis) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("heat_matrix: t must be >= 0");
  const auto n = static_cast<Eigen::Index>(basis.N);
  if (t == 0.0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd e = expm(t * laplacian_op(basis));
  return 0.5 * (e + e.transpose());
}

inline double seminorm(const TestFunction& phi, const SeminormIndex& r) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < phi.coeffs.size(); ++k) {
    const double v = r.weight(static_cast<std::size_t>(k)) * phi.coeffs[k];
    acc += v * v;
  }
  return std::sqrt(acc);
}

inline double dual_norm(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const SeminormIndex& r) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    const double v = coeffs[k] / r.weight(static_cast<std::size_t>(k));
    acc += v * v;
  }
  return std::sqrt(acc);
}

inline double dual_norm(const DualElement& f, const SeminormIndex& r) {
  return dual_norm(f.coeffs, r);
}

struct HsNorm {
  double value = 0.0;
  /// Whether the untruncated series converges (index gap > 1/2).
  bool summable = false;
};

/// Hilbert-Schmidt norm of the N-truncated inclusion i_{p_r, p_s}.
inline HsNorm hs_norm(const SeminormIndex& r, const SeminormIndex& s, std::size_t n) {
  const double gap = s.r() - r.r();
  if (!(gap > 0.0)) throw std::invalid_argument("hs_norm: requires s > r");
  // Smallest terms first for a stable partial sum.
  double acc = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    acc += std::pow(2.0 * static_cast<double>(k) + 1.0, -2.0 * gap);
  }
  return {std::sqrt(acc), gap > 0.5};
}

/// Upper bound on sum_{k >= N} (2k+1)^{-2a}, a = s - r > 1/2, by the integral
/// test: (2N-1)^{1-2a} / (2(2a-1)).
inline double hs_tail_bound(const SeminormIndex& r, const SeminormIndex& s, std::size_t n) {
  const double a = s.r() - r.r();
  if (!(a > 0.5)) throw std::invalid_argument("hs_tail_bound: requires s - r > 1/2");
  if (n == 0) throw std::invalid_argument("hs_tail_bound: requires N >= 1");
  return std::pow(2.0 * static_cast<double>(n) - 1.0, 1.0 - 2.0 * a) / (2.0 * (2.0 * a - 1.0));
}

inline double pairing(const DualElement& f, const TestFunction& phi) {
  require_same_basis(f.basis, phi.basis, "pairing");
  return f.coeffs.dot(phi.coeffs);
}

/// phi(x) from coefficients.
inline double evaluate(const Eigen::Ref<const Eigen::VectorXd>& coeffs, double x) {
  std::vector<double> h(static_cast<std::size_t>(coeffs.size()));
  hermite_functions(x, h);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * h[static_cast<std::size_t>(k)];
  return acc;
}

/// Coefficients of phi' in h_0..h_N (length N+1).
inline Eigen::VectorXd derivative_coefficients(const TestFunction& phi) {
  return derivative_op_extended(phi.basis.N) * phi.coeffs;
}

/// Row-major "i,j,value" dump for debugging.
inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  out << "i,j,value\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << i << ',' << j << ',' << m(i, j) << '\n';
  }
}

}  // namespace nucleartight
