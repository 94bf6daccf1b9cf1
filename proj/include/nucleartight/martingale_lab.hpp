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

// Particle martingales and their Gaussian limit.
//
// For n independent Brownian particles B^i,
//
//   M^n_t(phi)   = n^{-1/2} sum_i int_0^t phi'(B^i_s) dB^i_s
//   <M^n(phi)>_t = n^{-1}   sum_i int_0^t phi'(B^i_s)^2 ds
//
// are simulated with left-point (Ito) sums on a uniform grid. The limit is
// the centred Gaussian martingale with covariance
//
//   C(t; phi, psi) = int_0^t E[phi'(B_s) psi'(B_s)] ds,   B_s ~ N(0, s),
//
// and A(t, phi) = C(t; phi, phi).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nucleartight/config.hpp"
#include "nucleartight/diagnostics.hpp"
#include "nucleartight/errors.hpp"
#include "nucleartight/hermite_space.hpp"
#include "nucleartight/parallel.hpp"
#include "nucleartight/path_space.hpp"
#include "nucleartight/quadrature.hpp"
#include "nucleartight/rng.hpp"

namespace nucleartight {

/// n one-dimensional Brownian particles on a grid, stored as increments.
struct ParticleEnsemble {
  std::size_t n = 0;
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::uint32_t repetition = 0;
  std::vector<double> increments;  // particle-major, n * J

  ParticleEnsemble(std::size_t count, TimeGrid g) : n(count), grid(g), increments(count * g.steps()) {}

  double increment(std::size_t particle, std::size_t step) const {
    return increments[particle * grid.steps() + step];
  }

  /// B^i at every grid node, starting from 0.
  std::vector<double> positions(std::size_t particle) const {
    std::vector<double> b(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.steps(); ++j) b[j + 1] = b[j] + increment(particle, j);
    return b;
  }
};

inline StreamId particle_stream(std::uint64_t seed, std::uint32_t repetition, std::size_t particle,
                                std::size_t group) {
  return {seed, StreamPurpose::particles, repetition, static_cast<std::uint32_t>(particle),
          static_cast<std::uint32_t>(group)};
}

/// Particle i of repetition `repetition` draws from stream
/// (seed, particles, repetition, i, n), so ensembles of different sizes
/// are independent and reproducible regardless of threading.
inline ParticleEnsemble simulate_particles(std::size_t n, const TimeGrid& grid, std::uint64_t seed,
                                           std::uint32_t repetition = 0) {
  if (n == 0) throw std::invalid_argument("simulate_particles: n must be >= 1");
  ParticleEnsemble e(n, grid);
  e.seed = seed;
  e.repetition = repetition;
  const double scale = std::sqrt(grid.dt());
  for (std::size_t i = 0; i < n; ++i) {
    NormalStream rng(particle_stream(seed, repetition, i, n));
    double* row = e.increments.data() + i * grid.steps();
    for (std::size_t j = 0; j < grid.steps(); ++j) row[j] = scale * rng.next();
  }
  return e;
}

/// The same Brownian paths on a grid `factor` times coarser: consecutive
/// increments are summed. Used for refinement studies.
inline ParticleEnsemble coarsen(const ParticleEnsemble& fine, std::size_t factor) {
  if (factor == 0 || fine.grid.steps() % factor != 0) {
    throw std::invalid_argument("coarsen: factor must divide the step count");
  }
  ParticleEnsemble out(fine.n, TimeGrid(fine.grid.horizon(), fine.grid.steps() / factor));
  out.seed = fine.seed;
  out.repetition = fine.repetition;
  for (std::size_t i = 0; i < fine.n; ++i) {
    for (std::size_t j = 0; j < out.grid.steps(); ++j) {
      double acc = 0.0;
      for (std::size_t m = 0; m < factor; ++m) acc += fine.increment(i, j * factor + m);
      out.increments[i * out.grid.steps() + j] = acc;
    }
  }
  return out;
}

// --- Ito sums ----------------------------------------------------------------

/// Martingale and quadratic-variation paths of several functionals driven by
/// the same particles. Row f of each matrix is functional f over grid nodes.
struct ItoPaths {
  Eigen::MatrixXd martingale;
  Eigen::MatrixXd quadratic_variation;
};

namespace detail {
/// Number of leading Hermite functions a set of coefficient vectors touches.
inline std::size_t support_size(const std::vector<Eigen::VectorXd>& coeffs) {
  std::size_t len = 1;
  for (const auto& c : coeffs) {
    for (Eigen::Index k = c.size(); k-- > 0;) {
      if (c[k] != 0.0) {
        len = std::max(len, static_cast<std::size_t>(k) + 1);
        break;
      }
    }
  }
  return len;
}
}  // namespace detail

/// Left-point sums for functionals g_f(x) = sum_m derivs[f][m] h_m(x).
/// Per step the particle contributions are accumulated in particle order.
inline ItoPaths ito_paths(const std::vector<Eigen::VectorXd>& derivs, const ParticleEnsemble& particles) {
  const std::size_t funcs = derivs.size();
  const std::size_t steps = particles.grid.steps();
  const std::size_t support = detail::support_size(derivs);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(funcs), static_cast<Eigen::Index>(support));
  g.setZero();
  for (std::size_t f = 0; f < funcs; ++f) {
    const auto len = std::min<Eigen::Index>(derivs[f].size(), static_cast<Eigen::Index>(support));
    g.row(static_cast<Eigen::Index>(f)).head(len) = derivs[f].head(len).transpose();
  }

  Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(funcs), static_cast<Eigen::Index>(steps));
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(funcs), static_cast<Eigen::Index>(steps));
  std::vector<double> hv(support);
  for (std::size_t i = 0; i < particles.n; ++i) {
    double b = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
      const double db = particles.increment(i, j);
      hermite_functions(b, hv);
      for (std::size_t f = 0; f < funcs; ++f) {
        double v = 0.0;
        for (std::size_t m = 0; m < support; ++m) v += g(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(m)) * hv[m];
        inc(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(j)) += v * db;
        sq(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(j)) += v * v;
      }
      b += db;
    }
  }

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(particles.n));
  const double qv_scale = particles.grid.dt() / static_cast<double>(particles.n);
  ItoPaths out;
  out.martingale = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(funcs), static_cast<Eigen::Index>(steps + 1));
  out.quadratic_variation = out.martingale;
  for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(funcs); ++f) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(steps); ++j) {
      out.martingale(f, j + 1) = out.martingale(f, j) + inv_sqrt_n * inc(f, j);
      out.quadratic_variation(f, j + 1) = out.quadratic_variation(f, j) + qv_scale * sq(f, j);
    }
  }
  return out;
}

inline ScalarPath row_path(const Eigen::MatrixXd& m, Eigen::Index row, const TimeGrid& grid) {
  ScalarPath p(grid);
  for (std::size_t j = 0; j < grid.size(); ++j) p.values[j] = m(row, static_cast<Eigen::Index>(j));
  return p;
}

/// M^n(phi) on the particle grid.
inline ScalarPath mn_scalar_path(const TestFunction& phi, const ParticleEnsemble& particles) {
  const auto paths = ito_paths({derivative_coefficients(phi)}, particles);
  return row_path(paths.martingale, 0, particles.grid);
}

/// <M^n(phi)> on the particle grid; nondecreasing from 0.
inline ScalarPath quadratic_variation_path(const TestFunction& phi, const ParticleEnsemble& particles) {
  const auto paths = ito_paths({derivative_coefficients(phi)}, particles);
  return row_path(paths.quadratic_variation, 0, particles.grid);
}

// --- limit covariance ----------------------------------------------------------

/// Covariance density G(s)_{ab} = E[g_a(B_s) g_b(B_s)], B_s ~ N(0, s), for
/// functionals g_a = sum_m coeffs[a][m] h_m, and its time integrals.
///
/// Each g_a g_b is a polynomial times e^{-x^2}, so against the N(0, s) density
/// the integrand is a polynomial times e^{-a x^2} with a = 1 + 1/(2s); after
/// rescaling the Gauss-Hermite rule of order Q integrates it exactly when the
/// polynomial degree is below 2Q. Time integrals use composite Gauss-Legendre.
class LimitCovariance {
 public:
  struct Settings {
    std::size_t hermite_order = 0;  // 0: support + 16
    std::size_t legendre_order = 10;
    double panel_width = 1.0 / 16.0;
  };

  explicit LimitCovariance(std::vector<Eigen::VectorXd> derivs) : LimitCovariance(std::move(derivs), Settings{}) {}

  LimitCovariance(std::vector<Eigen::VectorXd> derivs, Settings settings)
      : derivs_(std::move(derivs)), settings_(settings) {
    if (derivs_.empty()) throw std::invalid_argument("LimitCovariance: no functionals");
    support_ = detail::support_size(derivs_);
    coeffs_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(derivs_.size()), static_cast<Eigen::Index>(support_));
    for (std::size_t a = 0; a < derivs_.size(); ++a) {
      const auto len = std::min<Eigen::Index>(derivs_[a].size(), static_cast<Eigen::Index>(support_));
      coeffs_.row(static_cast<Eigen::Index>(a)).head(len) = derivs_[a].head(len).transpose();
    }
    hermite_ = gauss_hermite(settings_.hermite_order ? settings_.hermite_order : support_ + 16);
    legendre_ = gauss_legendre(settings_.legendre_order);
  }

  std::size_t dimension() const noexcept { return derivs_.size(); }

  /// G(s). At s = 0 this is the endpoint limit g_a(0) g_b(0).
  Eigen::MatrixXd density(double s) const {
    if (!(s >= 0.0)) throw std::invalid_argument("LimitCovariance: s must be >= 0");
    const auto k = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
    std::vector<double> hv(support_);
    if (s == 0.0) {
      hermite_functions(0.0, hv);
      const Eigen::VectorXd v = values(hv);
      return v * v.transpose();
    }
    const double a = 1.0 + 0.5 / s;
    const double root_a = std::sqrt(a);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * s * a);
    for (std::size_t i = 0; i < hermite_.nodes.size(); ++i) {
      const double y = hermite_.nodes[i] / root_a;
      hermite_functions(y, hv);
      // e^{y^2} cancels the Gaussian factor of g_a g_b; y stays O(sqrt(Q)).
      const double w = norm * hermite_.weights[i] * std::exp(y * y);
      const Eigen::VectorXd v = values(hv);
      for (Eigen::Index p = 0; p < k; ++p) {
        for (Eigen::Index q = 0; q <= p; ++q) out(p, q) += w * v[p] * v[q];
      }
    }
    for (Eigen::Index p = 0; p < k; ++p) {
      for (Eigen::Index q = p + 1; q < k; ++q) out(p, q) = out(q, p);
    }
    return out;
  }

  /// int_{t0}^{t1} G(s) ds.
  Eigen::MatrixXd integral(double t0, double t1) const {
    if (!(t0 >= 0.0) || !(t1 >= t0)) throw std::invalid_argument("LimitCovariance: requires 0 <= t0 <= t1");
    const auto k = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
    if (t1 == t0) return out;
    const auto panels =
        static_cast<std::size_t>(std::max(1.0, std::ceil((t1 - t0) / settings_.panel_width - 1e-12)));
    const double h = (t1 - t0) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = t0 + h * static_cast<double>(p);
      for (std::size_t i = 0; i < legendre_.nodes.size(); ++i) {
        const double s = lo + 0.5 * h * (legendre_.nodes[i] + 1.0);
        out += (0.5 * h * legendre_.weights[i]) * density(s);
      }
    }
    return out;
  }

  /// C(t) = int_0^t G(s) ds.
  Eigen::MatrixXd at(double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("LimitCovariance: t must be >= 0");
    return integral(0.0, t);
  }

 private:
  Eigen::VectorXd values(const std::vector<double>& hv) const {
    Eigen::VectorXd v(coeffs_.rows());
    for (Eigen::Index a = 0; a < coeffs_.rows(); ++a) {
      double acc = 0.0;
      for (std::size_t m = 0; m < support_; ++m) acc += coeffs_(a, static_cast<Eigen::Index>(m)) * hv[m];
      v[a] = acc;
    }
    return v;
  }

  std::vector<Eigen::VectorXd> derivs_;
  Settings settings_;
  std::size_t support_ = 1;
  Eigen::MatrixXd coeffs_;
  GaussHermiteRule hermite_;
  GaussLegendreRule legendre_;
};

/// t -> A(t, phi). A(0) = 0, nondecreasing, A(t, a phi) = a^2 A(t, phi).
class QuadraticForm {
 public:
  explicit QuadraticForm(const TestFunction& phi) : cov_({derivative_coefficients(phi)}) {}

  double operator()(double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("limit_variance: t must be >= 0");
    return cov_.at(t)(0, 0);
  }
  /// Inner expectation E[phi'(B_s)^2].
  double density(double s) const { return cov_.density(s)(0, 0); }

 private:
  LimitCovariance cov_;
};

inline double limit_variance(const TestFunction& phi, double t) { return QuadraticForm(phi)(t); }

inline double cross_covariance(const TestFunction& phi, const TestFunction& psi, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("cross_covariance: t must be >= 0");
  const LimitCovariance cov({derivative_coefficients(phi), derivative_coefficients(psi)});
  return cov.at(t)(0, 1);
}

// --- Gaussian limit --------------------------------------------------------------

/// Symmetric square root of a covariance increment; eigenvalues in
/// [-1e-8, 0) are clipped, anything below is a numerical-integrity failure.
inline Eigen::MatrixXd covariance_root(const Eigen::MatrixXd& cov, const std::string& where) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  if (lambda.size() > 0 && lambda.minCoeff() < -1e-8) {
    throw NumericalIntegrityError(where + ": covariance increment not positive semidefinite (min eigenvalue " +
                                  std::to_string(lambda.minCoeff()) + ")");
  }
  const Eigen::VectorXd root = lambda.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

/// Draws joint paths of the limit martingale for a list of functionals with
/// independent Gaussian increments whose covariance over [t_j, t_{j+1}] is
/// C(t_{j+1}) - C(t_j). Factors are precomputed once; path p draws from
/// stream (seed, limit_driver, p).
class LimitSampler {
 public:
  LimitSampler(std::vector<Eigen::VectorXd> derivs, TimeGrid grid, std::uint64_t seed)
      : grid_(grid), seed_(seed), dim_(derivs.size()) {
    if (derivs.empty()) throw std::invalid_argument("simulate_limit: empty functional list");
    const LimitCovariance cov(std::move(derivs));
    roots_.reserve(grid.steps());
    for (std::size_t j = 0; j < grid.steps(); ++j) {
      roots_.push_back(covariance_root(cov.integral(grid.node(j), grid.node(j + 1)), "simulate_limit"));
    }
  }

  std::size_t dimension() const noexcept { return dim_; }
  const TimeGrid& grid() const noexcept { return grid_; }

  /// dimension() x grid().size() matrix of one joint path, starting at 0.
  Eigen::MatrixXd sample(std::uint32_t path) const {
    const auto k = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(grid_.size()));
    NormalStream rng({seed_, StreamPurpose::limit_driver, path, 0, 0});
    Eigen::VectorXd xi(k);
    for (std::size_t j = 0; j < grid_.steps(); ++j) {
      for (Eigen::Index a = 0; a < k; ++a) xi[a] = rng.next();
      const auto jj = static_cast<Eigen::Index>(j);
      out.col(jj + 1) = out.col(jj) + roots_[j] * xi;
    }
    return out;
  }

 private:
  TimeGrid grid_;
  std::uint64_t seed_;
  std::size_t dim_;
  std::vector<Eigen::MatrixXd> roots_;
};

/// One ensemble per test function, sampled jointly (path p of every
/// ensemble comes from the same Gaussian draw).
inline std::vector<ScalarPathEnsemble> simulate_limit(const std::vector<TestFunction>& phis, const TimeGrid& grid,
                                                      std::size_t paths, std::uint64_t seed, unsigned threads = 1) {
  if (phis.empty()) throw std::invalid_argument("simulate_limit: empty phi list");
  std::vector<Eigen::VectorXd> derivs;
  for (const auto& phi : phis) derivs.push_back(derivative_coefficients(phi));
  const LimitSampler sampler(std::move(derivs), grid, seed);
  std::vector<Eigen::MatrixXd> joint(paths);
  parallel_for(paths, threads, [&](std::size_t p) { joint[p] = sampler.sample(static_cast<std::uint32_t>(p)); });

  std::vector<ScalarPathEnsemble> out(phis.size(), ScalarPathEnsemble(grid, seed));
  for (std::size_t f = 0; f < phis.size(); ++f) {
    out[f].paths.reserve(paths);
    for (std::size_t p = 0; p < paths; ++p) out[f].paths.push_back(row_path(joint[p], static_cast<Eigen::Index>(f), grid));
  }
  return out;
}

// --- CLT experiment ----------------------------------------------------------------

namespace detail {
/// What one Monte Carlo repetition contributes to the CLT report.
struct CltRecord {
  std::vector<double> martingale;  // [f * times + t]
  std::vector<double> qv;
  std::vector<double> sup_abs;                // per f
  std::vector<std::vector<double>> moduli;    // per f, per delta
};

inline std::vector<std::size_t> time_indices(const ScenarioConfig& c) {
  const auto grid = c.grid();
  std::vector<std::size_t> idx;
  for (double t : c.times) idx.push_back(grid.index_of(t));
  return idx;
}

inline bool energy_trend_ok(const nlohmann::json& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].at("energy").get<double>();
    const double cur = rows[i].at("energy").get<double>();
    const double se = std::hypot(rows[i - 1].at("energy_se").get<double>(), rows[i].at("energy_se").get<double>());
    if (cur > prev + 2.0 * se) return false;
  }
  return true;
}
}  // namespace detail

/// Runs the particle martingales for every n and compares them with the
/// Gaussian limit: QV law of large numbers, one-dimensional KS against the
/// normal law, energy distance of the joint (phi, t) vector against
/// simulate_limit, and scalar tightness summaries.
inline ConvergenceReport clt_report(const ScenarioConfig& config) {
  config.validate();
  const TimeGrid grid = config.grid();
  const auto phis = config.test_functions(config.basis);
  const auto tidx = detail::time_indices(config);
  const std::size_t nf = phis.size();
  const std::size_t nt = tidx.size();
  const std::size_t reps = config.reps;

  std::vector<Eigen::VectorXd> derivs;
  std::vector<QuadraticForm> forms;
  for (const auto& phi : phis) {
    derivs.push_back(derivative_coefficients(phi));
    forms.emplace_back(phi);
  }

  // Nontrivial (phi, t) coordinates enter the joint energy comparison.
  std::vector<std::pair<std::size_t, std::size_t>> joint;
  std::vector<Eigen::VectorXd> live_derivs;
  std::vector<std::size_t> live_index(nf, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    if (phis[f].coeffs.isZero(0.0)) continue;
    live_index[f] = live_derivs.size();
    live_derivs.push_back(derivs[f]);
    for (std::size_t t = 0; t < nt; ++t) {
      if (forms[f](config.times[t]) > 0.0) joint.emplace_back(f, t);
    }
  }

  Eigen::MatrixXd limit_sample;
  if (!joint.empty()) {
    const LimitSampler sampler(live_derivs, grid, config.seed);
    limit_sample.resize(static_cast<Eigen::Index>(reps), static_cast<Eigen::Index>(joint.size()));
    parallel_for(reps, config.threads, [&](std::size_t p) {
      const Eigen::MatrixXd path = sampler.sample(static_cast<std::uint32_t>(p));
      for (std::size_t c = 0; c < joint.size(); ++c) {
        limit_sample(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) =
            path(static_cast<Eigen::Index>(live_index[joint[c].first]), static_cast<Eigen::Index>(tidx[joint[c].second]));
      }
    });
  }

  std::vector<nlohmann::json> cells;
  nlohmann::json energy_rows = nlohmann::json::array();
  nlohmann::json tightness = nlohmann::json::array();
  for (std::size_t n : config.n_list) {
    std::vector<detail::CltRecord> records(reps);
    parallel_for(reps, config.threads, [&](std::size_t rep) {
      const auto particles = simulate_particles(n, grid, config.seed, static_cast<std::uint32_t>(rep));
      const auto paths = ito_paths(derivs, particles);
      auto& rec = records[rep];
      for (std::size_t f = 0; f < nf; ++f) {
        const auto row = static_cast<Eigen::Index>(f);
        for (std::size_t t = 0; t < nt; ++t) {
          rec.martingale.push_back(paths.martingale(row, static_cast<Eigen::Index>(tidx[t])));
          rec.qv.push_back(paths.quadratic_variation(row, static_cast<Eigen::Index>(tidx[t])));
        }
        const ScalarPath m = row_path(paths.martingale, row, grid);
        rec.sup_abs.push_back(sup_abs(m));
        std::vector<double> mods;
        for (double d : config.deltas) mods.push_back(modulus_scalar(m, d));
        rec.moduli.push_back(std::move(mods));
      }
    });

    EnergyResult energy;
    if (!joint.empty()) {
      Eigen::MatrixXd sample(static_cast<Eigen::Index>(reps), static_cast<Eigen::Index>(joint.size()));
      for (std::size_t rep = 0; rep < reps; ++rep) {
        for (std::size_t c = 0; c < joint.size(); ++c) {
          sample(static_cast<Eigen::Index>(rep), static_cast<Eigen::Index>(c)) =
              records[rep].martingale[joint[c].first * nt + joint[c].second];
        }
      }
      energy = energy_distance(sample, limit_sample, config.threads);
    }
    energy_rows.push_back({{"n", n}, {"energy", energy.statistic}, {"energy_se", energy.standard_error},
                           {"dimension", joint.size()}});

    for (std::size_t f = 0; f < nf; ++f) {
      for (std::size_t t = 0; t < nt; ++t) {
        std::vector<double> mv, qv;
        for (const auto& rec : records) {
          mv.push_back(rec.martingale[f * nt + t]);
          qv.push_back(rec.qv[f * nt + t]);
        }
        const double target = forms[f](config.times[t]);
        const auto ms = summarize_moments(mv);
        const auto qs = summarize_moments(qv);
        nlohmann::json cell{{"n", n},
                            {"phi", config.phi_list[f]},
                            {"t", config.times[t]},
                            {"qv_mean", qs.mean},
                            {"qv_mean_se", qs.mean_se},
                            {"qv_var", qs.variance},
                            {"qv_target", target},
                            {"m_mean", ms.mean},
                            {"m_var", ms.variance},
                            {"m_var_se", ms.variance_se},
                            {"energy", energy.statistic},
                            {"energy_se", energy.standard_error}};
        const double critical = kKsC01 / std::sqrt(static_cast<double>(reps));
        if (target > 0.0) {
          std::vector<double> z;
          for (double v : mv) z.push_back(v / std::sqrt(target));
          const auto ks = ks_one_sample(z, standard_normal_cdf);
          cell["ks"] = ks.statistic;
          cell["p_value"] = ks.p_value;
          cell["trivial"] = false;
        } else {
          // Degenerate limit (point mass at 0): the normal KS comparison is skipped.
          cell["ks"] = 0.0;
          cell["trivial"] = true;
        }
        cell["ks_critical"] = critical;
        cells.push_back(std::move(cell));
      }

      std::vector<double> sups;
      std::vector<std::vector<double>> mods;
      for (const auto& rec : records) {
        sups.push_back(rec.sup_abs[f]);
        mods.push_back(rec.moduli[f]);
      }
      auto rep_json = to_json(summarize_containment(0.0, sups, mods, config.levels, config.deltas));
      rep_json["n"] = n;
      rep_json["phi"] = config.phi_list[f];
      tightness.push_back(std::move(rep_json));
    }
  }

  nlohmann::json summaries{{"energy", energy_rows},
                           {"energy_trend_ok", detail::energy_trend_ok(energy_rows)},
                           {"tightness", tightness}};
  return assemble_report(config.scenario, std::move(cells), report_header(config),
                         config.n_list.size() * nf * nt, std::move(summaries));
}

}  // namespace nucleartight
