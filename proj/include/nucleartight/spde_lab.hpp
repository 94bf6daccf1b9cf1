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

// Stochastic heat equation dY = L Y dt + dM, Y_0 = eta, in the truncated
// Hermite coordinates, solved through the variation-of-constants formula
//
//   Y_t = E(t) eta + int_0^t E(t - s) L M_s ds + M_t,
//
// and the weak-convergence experiment Y^n => Y^0 built on top of it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nucleartight/config.hpp"
#include "nucleartight/diagnostics.hpp"
#include "nucleartight/hermite_space.hpp"
#include "nucleartight/martingale_lab.hpp"
#include "nucleartight/parallel.hpp"
#include "nucleartight/path_space.hpp"
#include "nucleartight/rng.hpp"

namespace nucleartight {

/// Coordinates M^n_t(h_k), k < N, from one particle realization. Coordinate
/// k uses the same left-point sums as mn_scalar_path(h_k), so the two agree
/// bit for bit.
inline DualPath mn_dual_path(const ParticleEnsemble& particles, const BasisSpec& basis) {
  const std::size_t n_modes = basis.N;
  const std::size_t steps = particles.grid.steps();
  std::vector<double> up(n_modes), down(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    up[k] = std::sqrt(static_cast<double>(k) / 2.0);
    down[k] = -std::sqrt((static_cast<double>(k) + 1.0) / 2.0);
  }

  Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_modes), static_cast<Eigen::Index>(steps));
  std::vector<double> hv(n_modes + 1);
  for (std::size_t i = 0; i < particles.n; ++i) {
    double b = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
      const double db = particles.increment(i, j);
      hermite_functions(b, hv);
      double* col = inc.col(static_cast<Eigen::Index>(j)).data();
      // h_k' = sqrt(k/2) h_{k-1} - sqrt((k+1)/2) h_{k+1}; the zero term for
      // k = 0 keeps the summation order identical to the dense kernel.
      col[0] += (0.0 + down[0] * hv[1]) * db;
      for (std::size_t k = 1; k < n_modes; ++k) col[k] += (up[k] * hv[k - 1] + down[k] * hv[k + 1]) * db;
      b += db;
    }
  }

  DualPath out(particles.grid, basis);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(particles.n));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(steps); ++j) {
    out.states.col(j + 1) = out.states.col(j) + inv_sqrt_n * inc.col(j);
  }
  return out;
}

/// Initial condition; each draw uses stream (seed, initial_condition,
/// major, 0, group), disjoint from every driver stream.
inline DualElement sample_initial(const InitialSpec& spec, const BasisSpec& basis, std::uint64_t seed,
                                  std::uint32_t major = 0, std::uint32_t group = 0) {
  switch (spec.kind) {
    case InitialSpec::Kind::zero:
      return DualElement::zero(basis);
    case InitialSpec::Kind::fixed: {
      if (spec.coeffs.size() > basis.N) throw std::invalid_argument("sample_initial: too many coefficients");
      auto f = DualElement::zero(basis);
      for (std::size_t k = 0; k < spec.coeffs.size(); ++k) f.coeffs[static_cast<Eigen::Index>(k)] = spec.coeffs[k];
      return DualElement(basis, f.coeffs);
    }
    case InitialSpec::Kind::gaussian: {
      if (!(spec.r > 0.5)) {
        throw std::invalid_argument("sample_initial: gaussian kind requires r > 1/2 for a summable dual norm");
      }
      NormalStream rng({seed, StreamPurpose::initial_condition, major, 0, group});
      auto f = DualElement::zero(basis);
      for (std::size_t k = 0; k < basis.N; ++k) {
        const double sd = spec.scale * std::pow(2.0 * static_cast<double>(k) + 1.0, -spec.r);
        f.coeffs[static_cast<Eigen::Index>(k)] = sd * rng.next();
      }
      return f;
    }
  }
  throw std::invalid_argument("sample_initial: unknown kind");
}

/// Quadrature rule for the Duhamel term. left_point sums l < j, which is
/// the non-anticipating choice and first order in dt; trapezoid halves the
/// l = 0 and l = j terms and is second order against the weak form.
enum class DuhamelRule { left_point, trapezoid };

/// Heat-semigroup solver for one (basis, grid) pair. E(dt) and L are built
/// once and reused across repetitions.
class HeatSolver {
 public:
  HeatSolver(const BasisSpec& basis, const TimeGrid& grid, DuhamelRule rule = DuhamelRule::left_point)
      : basis_(basis), grid_(grid), rule_(rule), laplacian_(laplacian_op(basis)), step_(heat_matrix(grid.dt(), basis)) {}

  const BasisSpec& basis() const noexcept { return basis_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& laplacian() const noexcept { return laplacian_; }

  /// Y_{t_j} = E(t_j) eta + dt sum_l w_l E(t_j - t_l) L M_{t_l} + M_{t_j},
  /// with E(t_j - t_l) = E(dt)^{j-l} applied recursively.
  DualPath solve(const DualPath& driver, const DualElement& eta) const {
    require_same_basis(basis_, driver.basis, "mild_solution");
    require_same_basis(basis_, eta.basis, "mild_solution");
    if (!(driver.grid == grid_)) throw std::invalid_argument("mild_solution: grid mismatch");
    const auto cols = static_cast<Eigen::Index>(grid_.size());
    const double dt = grid_.dt();

    const Eigen::MatrixXd forcing = laplacian_ * driver.states;  // v_l = L M_l
    DualPath y(grid_, basis_);
    Eigen::VectorXd heat = eta.coeffs;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.N));
    Eigen::VectorXd first = forcing.col(0);  // E(dt)^j v_0, trapezoid only
    for (Eigen::Index j = 0; j < cols; ++j) {
      Eigen::VectorXd duhamel;
      if (rule_ == DuhamelRule::left_point) {
        // acc = sum_{l<j} E^{j-l} v_l
        if (j > 0) acc = step_ * (acc + forcing.col(j - 1));
        duhamel = dt * acc;
      } else {
        // acc = sum_{l<=j} E^{j-l} v_l
        acc = (j > 0 ? Eigen::VectorXd(step_ * acc) : acc) + forcing.col(j);
        if (j > 0) first = step_ * first;
        duhamel = j > 0 ? Eigen::VectorXd(dt * (acc - 0.5 * first - 0.5 * forcing.col(j)))
                        : Eigen::VectorXd::Zero(acc.size());
      }
      if (j > 0) heat = step_ * heat;
      y.states.col(j) = heat + duhamel + driver.states.col(j);
    }
    return y;
  }

 private:
  BasisSpec basis_;
  TimeGrid grid_;
  DuhamelRule rule_;
  Eigen::MatrixXd laplacian_;
  Eigen::MatrixXd step_;
};

inline DualPath mild_solution(const DualPath& driver, const DualElement& eta,
                              DuhamelRule rule = DuhamelRule::left_point) {
  return HeatSolver(driver.basis, driver.grid, rule).solve(driver, eta);
}

/// max_j |Y_{t_j}(phi) - eta(phi) - trap int_0^{t_j} Y_r(L phi) dr - M_{t_j}(phi)|.
inline double weak_form_residual(const DualPath& y, const DualPath& driver, const DualElement& eta,
                                 const TestFunction& phi) {
  require_same_basis(y.basis, driver.basis, "weak_form_residual");
  require_same_basis(y.basis, eta.basis, "weak_form_residual");
  require_same_basis(y.basis, phi.basis, "weak_form_residual");
  if (!(y.grid == driver.grid)) throw std::invalid_argument("weak_form_residual: grid mismatch");
  const Eigen::VectorXd lphi = laplacian_op(phi.basis) * phi.coeffs;
  const Eigen::VectorXd y_phi = y.states.transpose() * phi.coeffs;
  const Eigen::VectorXd y_lphi = y.states.transpose() * lphi;
  const Eigen::VectorXd m_phi = driver.states.transpose() * phi.coeffs;
  const double eta_phi = eta.coeffs.dot(phi.coeffs);
  const double dt = y.grid.dt();
  double integral = 0.0;
  double worst = std::abs(y_phi[0] - eta_phi - m_phi[0]);
  for (Eigen::Index j = 1; j < y_phi.size(); ++j) {
    integral += 0.5 * dt * (y_lphi[j - 1] + y_lphi[j]);
    worst = std::max(worst, std::abs(y_phi[j] - eta_phi - integral - m_phi[j]));
  }
  return worst;
}

/// Size of the leading left-point error terms of the weak form:
/// max(1, sup_t |M_t(L phi)| + sup_t |Y_t(L^2 phi)|). The residual of a
/// correct solve is about dt/2 times this, so gates compare
/// residual / scale against a multiple of dt.
inline double weak_form_scale(const DualPath& y, const DualPath& driver, const TestFunction& phi) {
  require_same_basis(y.basis, phi.basis, "weak_form_scale");
  const Eigen::MatrixXd l = laplacian_op(phi.basis);
  const Eigen::VectorXd lphi = l * phi.coeffs;
  const Eigen::VectorXd l2phi = l * lphi;
  const double m_part = (driver.states.transpose() * lphi).cwiseAbs().maxCoeff();
  const double y_part = y.grid.horizon() * (y.states.transpose() * l2phi).cwiseAbs().maxCoeff();
  return std::max(1.0, m_part + y_part);
}

// --- weak-convergence experiment ------------------------------------------------

namespace detail {
struct HeatRecord {
  std::vector<double> values;  // [f * times + t]
  PathTightness tightness;
  double residual = 0.0;         // max over phi of the weak-form residual
  double scaled_residual = 0.0;  // max over phi of residual / weak_form_scale
};

/// Which side of the comparison a run belongs to; selects stream groups.
struct HeatSide {
  std::size_t n = 0;  // 0: Gaussian limit driver
  std::uint64_t seed = 0;
};

inline std::vector<HeatRecord> heat_ensemble(const ScenarioConfig& config, const HeatSide& side,
                                             const HeatSolver& solver, const std::vector<TestFunction>& phis,
                                             const std::vector<std::size_t>& tidx, const LimitSampler* limit,
                                             std::size_t reps) {
  const BasisSpec basis = solver.basis();
  const TimeGrid grid = solver.grid();
  const SeminormIndex r(config.seminorm_r);
  std::vector<HeatRecord> records(reps);
  parallel_for(reps, config.threads, [&](std::size_t rep) {
    const auto major = static_cast<std::uint32_t>(rep);
    DualPath driver(grid, basis);
    if (side.n == 0) {
      driver.states = limit->sample(major);
    } else {
      driver = mn_dual_path(simulate_particles(side.n, grid, side.seed, major), basis);
    }
    const DualElement eta = sample_initial(config.eta, basis, side.seed, major, static_cast<std::uint32_t>(side.n));
    const DualPath y = solver.solve(driver, eta);
    auto& rec = records[rep];
    for (const auto& phi : phis) {
      const Eigen::VectorXd proj = y.states.transpose() * phi.coeffs;
      for (std::size_t t : tidx) rec.values.push_back(proj[static_cast<Eigen::Index>(t)]);
      const double res = weak_form_residual(y, driver, eta, phi);
      rec.residual = std::max(rec.residual, res);
      rec.scaled_residual = std::max(rec.scaled_residual, res / weak_form_scale(y, driver, phi));
    }
    rec.tightness = dual_path_tightness(y, r, config.deltas);
  });
  return records;
}

inline std::vector<double> column(const std::vector<HeatRecord>& recs, std::size_t idx) {
  std::vector<double> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(r.values[idx]);
  return out;
}

inline Eigen::MatrixXd joint_matrix(const std::vector<HeatRecord>& recs) {
  const auto cols = static_cast<Eigen::Index>(recs.front().values.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(recs.size()), cols);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), c) = recs[i].values[static_cast<std::size_t>(c)];
  }
  return m;
}
}  // namespace detail

/// Compares Y^n (driver M^n, initial eta^n) with Y^0 (Gaussian-limit driver,
/// eta^0) through identical solver code: per (n, phi, t) a two-sample KS
/// test, per n an energy distance on the joint vector, tightness summaries
/// of every Y^n ensemble and the weak-form residual gate: every repetition
/// needs residual / weak_form_scale < gate_factor * dt.
inline ConvergenceReport heat_convergence_report(const ScenarioConfig& config, double gate_factor = 10.0) {
  config.validate();
  const TimeGrid grid = config.grid();
  const BasisSpec basis = config.mode_basis();
  const auto phis = config.test_functions(basis);
  const auto tidx = detail::time_indices(config);
  const std::size_t nt = tidx.size();
  const HeatSolver solver(basis, grid);

  std::vector<Eigen::VectorXd> unit_derivs;
  for (std::size_t k = 0; k < basis.N; ++k) unit_derivs.push_back(derivative_coefficients(TestFunction::unit(basis, k)));
  const LimitSampler limit(unit_derivs, grid, config.seed);
  const auto limit_recs = detail::heat_ensemble(config, {0, config.seed}, solver, phis, tidx, &limit, config.reps);

  const double gate = gate_factor * grid.dt();
  double worst_residual = 0.0, worst_scaled = 0.0;
  auto track = [&](const std::vector<detail::HeatRecord>& recs) {
    for (const auto& r : recs) {
      worst_residual = std::max(worst_residual, r.residual);
      worst_scaled = std::max(worst_scaled, r.scaled_residual);
    }
  };
  track(limit_recs);

  std::vector<nlohmann::json> cells;
  nlohmann::json energy_rows = nlohmann::json::array();
  nlohmann::json tightness = nlohmann::json::array();
  const Eigen::MatrixXd limit_joint = detail::joint_matrix(limit_recs);
  for (std::size_t n : config.n_list) {
    const auto recs = detail::heat_ensemble(config, {n, config.seed}, solver, phis, tidx, nullptr, config.reps);
    track(recs);

    const auto energy = energy_distance(detail::joint_matrix(recs), limit_joint, config.threads);
    energy_rows.push_back({{"n", n}, {"energy", energy.statistic}, {"energy_se", energy.standard_error},
                           {"dimension", phis.size() * nt}});

    for (std::size_t f = 0; f < phis.size(); ++f) {
      for (std::size_t t = 0; t < nt; ++t) {
        const auto a = detail::column(recs, f * nt + t);
        const auto b = detail::column(limit_recs, f * nt + t);
        const auto ms = summarize_moments(a);
        const auto ls = summarize_moments(b);
        nlohmann::json cell{{"n", n},
                            {"phi", config.phi_list[f]},
                            {"t", config.times[t]},
                            {"y_mean", ms.mean},
                            {"y_var", ms.variance},
                            {"limit_mean", ls.mean},
                            {"limit_var", ls.variance},
                            {"energy", energy.statistic},
                            {"energy_se", energy.standard_error}};
        if (ms.variance == 0.0 && ls.variance == 0.0) {
          cell["ks"] = 0.0;
          cell["trivial"] = true;
          cell["ks_critical"] = kKsC01 * std::sqrt(2.0 / static_cast<double>(config.reps));
        } else {
          const auto ks = ks_two_sample(a, b);
          cell["ks"] = ks.statistic;
          cell["ks_critical"] = ks.critical_01;
          cell["p_value"] = ks.p_value;
          cell["trivial"] = false;
        }
        cells.push_back(std::move(cell));
      }
    }

    std::vector<PathTightness> per_path;
    for (const auto& r : recs) per_path.push_back(r.tightness);
    auto rep_json = to_json(summarize_containment(config.seminorm_r, per_path, config.levels, config.deltas));
    rep_json["n"] = n;
    tightness.push_back(std::move(rep_json));
  }

  nlohmann::json summaries{{"energy", energy_rows},
                           {"energy_trend_ok", detail::energy_trend_ok(energy_rows)},
                           {"tightness", tightness},
                           {"residual_max", worst_residual},
                           {"residual_scaled_max", worst_scaled},
                           {"residual_gate", gate},
                           {"residual_gate_ok", worst_scaled < gate},
                           {"modes", basis.N}};
  return assemble_report(config.scenario, std::move(cells), report_header(config),
                         config.n_list.size() * phis.size() * nt, std::move(summaries));
}

/// Null calibration: two independent Y^n ensembles (same n, same initial
/// law, independent seeds) per replicate; returns the two-sample KS
/// p-values for (phi, t) = (phis[0], times.back()).
inline std::vector<double> heat_null_calibration(const ScenarioConfig& config, std::size_t n, std::size_t replicates) {
  config.validate();
  const TimeGrid grid = config.grid();
  const BasisSpec basis = config.mode_basis();
  const std::vector<TestFunction> phis{config.test_functions(basis).front()};
  const std::vector<std::size_t> tidx{grid.index_of(config.times.back())};
  const HeatSolver solver(basis, grid);
  std::vector<double> p_values;
  for (std::size_t c = 0; c < replicates; ++c) {
    const std::uint64_t seed_a = mix_seed(config.seed + 2 * c);
    const std::uint64_t seed_b = mix_seed(config.seed + 2 * c + 1);
    const auto a = detail::heat_ensemble(config, {n, seed_a}, solver, phis, tidx, nullptr, config.reps);
    const auto b = detail::heat_ensemble(config, {n, seed_b}, solver, phis, tidx, nullptr, config.reps);
    p_values.push_back(ks_two_sample(detail::column(a, 0), detail::column(b, 0)).p_value);
  }
  return p_values;
}

// --- tightness runs --------------------------------------------------------------

/// Exceedance tables and modulus quantiles of the M^n dual paths and the
/// Y^n solutions for every n, in the `modes`-function basis. Gate: the 99%
/// quantile of sup_t p'_r(M^n_t) varies by at most a factor 2 across n.
inline ConvergenceReport tightness_report(const ScenarioConfig& config, double gate_ratio = 2.0) {
  config.validate();
  const TimeGrid grid = config.grid();
  const BasisSpec basis = config.mode_basis();
  const SeminormIndex r(config.seminorm_r);
  const HeatSolver solver(basis, grid);

  std::vector<nlohmann::json> cells;
  std::vector<double> q99;
  for (std::size_t n : config.n_list) {
    std::vector<PathTightness> mn(config.reps), yn(config.reps);
    parallel_for(config.reps, config.threads, [&](std::size_t rep) {
      const auto major = static_cast<std::uint32_t>(rep);
      const DualPath driver = mn_dual_path(simulate_particles(n, grid, config.seed, major), basis);
      const DualElement eta = sample_initial(config.eta, basis, config.seed, major, static_cast<std::uint32_t>(n));
      mn[rep] = dual_path_tightness(driver, r, config.deltas);
      yn[rep] = dual_path_tightness(solver.solve(driver, eta), r, config.deltas);
    });
    const auto mrep = summarize_containment(config.seminorm_r, mn, config.levels, config.deltas);
    const auto yrep = summarize_containment(config.seminorm_r, yn, config.levels, config.deltas);
    const auto at99 = std::find(mrep.probs.begin(), mrep.probs.end(), 0.99) - mrep.probs.begin();
    q99.push_back(mrep.sup_quantiles[static_cast<std::size_t>(at99)]);

    auto mj = to_json(mrep);
    mj["process"] = "M";
    mj["n"] = n;
    cells.push_back(std::move(mj));
    auto yj = to_json(yrep);
    yj["process"] = "Y";
    yj["n"] = n;
    cells.push_back(std::move(yj));
  }

  const double hi = *std::max_element(q99.begin(), q99.end());
  const double lo = *std::min_element(q99.begin(), q99.end());
  const double ratio = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  nlohmann::json summaries{{"sup_q99", q99},
                           {"sup_q99_ratio", std::isfinite(ratio) ? nlohmann::json(ratio) : nlohmann::json(nullptr)},
                           {"gate_ratio", gate_ratio},
                           {"gate_ok", std::isfinite(ratio) && ratio <= gate_ratio},
                           {"modes", basis.N}};
  return assemble_report(config.scenario, std::move(cells), report_header(config), 2 * config.n_list.size(),
                         std::move(summaries));
}

}  // namespace nucleartight
