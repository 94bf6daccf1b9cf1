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

// Grid paths in C_T(R) and C_T(Phi') with the modulus-of-continuity and
// compact-containment functionals used as tightness diagnostics.
//
// Paths are grid functions: suprema run over grid nodes only and the
// modulus compares node pairs with |t_i - t_j| <= delta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nucleartight/hermite_space.hpp"
#include "nucleartight/parallel.hpp"

namespace nucleartight {

class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw std::invalid_argument("TimeGrid: T must be > 0");
    }
    if (steps < 1) throw std::invalid_argument("TimeGrid: J must be >= 1");
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double node(std::size_t j) const noexcept {
    return horizon_ * static_cast<double>(j) / static_cast<double>(steps_);
  }

  /// Grid index of time t; t must lie on the grid up to rounding.
  std::size_t index_of(double t) const {
    const double pos = t / dt();
    const double rounded = std::round(pos);
    if (t < 0.0 || rounded > static_cast<double>(steps_) || std::abs(pos - rounded) > 1e-9 * std::max(1.0, pos)) {
      throw std::invalid_argument("TimeGrid: time " + std::to_string(t) + " is not a grid node");
    }
    return static_cast<std::size_t>(rounded);
  }

  /// Largest lag (in steps) with lag * dt <= delta.
  std::size_t lag_for(double delta) const {
    if (!(delta > 0.0)) throw std::invalid_argument("modulus: delta must be > 0");
    const double lag = std::floor(delta / dt() * (1.0 + 1e-12));
    return static_cast<std::size_t>(std::min(lag, static_cast<double>(steps_)));
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  std::size_t steps_;
};

struct ScalarPath {
  TimeGrid grid;
  std::vector<double> values;  // grid.size() entries

  explicit ScalarPath(TimeGrid g) : grid(g), values(g.size(), 0.0) {}
  ScalarPath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw std::invalid_argument("ScalarPath: size mismatch");
  }
};

struct ScalarPathEnsemble {
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::vector<ScalarPath> paths;

  explicit ScalarPathEnsemble(TimeGrid g, std::uint64_t s = 0) : grid(g), seed(s) {}

  /// Values at grid index j across all paths.
  std::vector<double> at(std::size_t j) const {
    std::vector<double> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(p.values.at(j));
    return out;
  }
};

/// states.col(j) holds the dual coefficients at t_j.
struct DualPath {
  TimeGrid grid;
  BasisSpec basis;
  Eigen::MatrixXd states;

  DualPath(TimeGrid g, BasisSpec b)
      : grid(g),
        basis(b),
        states(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b.N), static_cast<Eigen::Index>(g.size()))) {}

  DualElement state(std::size_t j) const {
    return {basis, states.col(static_cast<Eigen::Index>(j))};
  }

  /// Pairing <x(t_j), phi> for every node.
  ScalarPath project(const TestFunction& phi) const {
    require_same_basis(basis, phi.basis, "DualPath::project");
    ScalarPath out(grid);
    const Eigen::VectorXd v = states.transpose() * phi.coeffs;
    for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] = v[static_cast<Eigen::Index>(j)];
    return out;
  }
};

struct DualPathEnsemble {
  TimeGrid grid;
  BasisSpec basis;
  std::uint64_t seed = 0;
  std::vector<DualPath> paths;

  DualPathEnsemble(TimeGrid g, BasisSpec b, std::uint64_t s = 0) : grid(g), basis(b), seed(s) {}
};

// --- moduli -----------------------------------------------------------------

/// Modulus of a scalar grid path: max |x_i - x_j| over |t_i - t_j| <= delta.
inline double modulus_scalar(const ScalarPath& x, double delta) {
  const std::size_t lag = x.grid.lag_for(delta);
  double best = 0.0;
  const auto& v = x.values;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t end = std::min(v.size(), i + lag + 1);
    for (std::size_t j = i + 1; j < end; ++j) best = std::max(best, std::abs(v[j] - v[i]));
  }
  return best;
}

/// w_x(delta, phi): modulus of t -> <x(t), phi>.
inline double modulus_testfn(const DualPath& x, double delta, const TestFunction& phi) {
  x.grid.lag_for(delta);
  return modulus_scalar(x.project(phi), delta);
}

namespace detail {
/// lag_max[l] = max_j p'_r(x(t_{j+l}) - x(t_j)) for l = 0..max_lag.
inline std::vector<double> dual_lag_maxima(const DualPath& x, std::size_t max_lag, const SeminormIndex& r) {
  const auto n = x.states.rows();
  Eigen::VectorXd inv_w(n);
  for (Eigen::Index k = 0; k < n; ++k) inv_w[k] = 1.0 / r.weight(static_cast<std::size_t>(k));
  const Eigen::MatrixXd scaled = inv_w.asDiagonal() * x.states;
  const std::size_t size = x.grid.size();
  std::vector<double> out(max_lag + 1, 0.0);
  for (std::size_t lag = 1; lag <= max_lag && lag < size; ++lag) {
    double best = 0.0;
    for (std::size_t j = 0; j + lag < size; ++j) {
      const double d = (scaled.col(static_cast<Eigen::Index>(j + lag)) -
                        scaled.col(static_cast<Eigen::Index>(j))).squaredNorm();
      best = std::max(best, d);
    }
    out[lag] = std::sqrt(best);
  }
  return out;
}
}  // namespace detail

/// w_x(delta, q) with q' = p'_r.
inline double modulus_dual(const DualPath& x, double delta, const SeminormIndex& r) {
  const std::size_t lag = x.grid.lag_for(delta);
  const auto maxima = detail::dual_lag_maxima(x, lag, r);
  return *std::max_element(maxima.begin(), maxima.end());
}

inline double sup_dual_norm(const DualPath& x, const SeminormIndex& r) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < x.states.cols(); ++j) best = std::max(best, dual_norm(x.states.col(j), r));
  return best;
}

inline double sup_abs(const ScalarPath& x) {
  double best = 0.0;
  for (double v : x.values) best = std::max(best, std::abs(v));
  return best;
}

/// Linear-interpolation (type 7) quantile; sorts a copy.
inline double quantile(std::vector<double> sample, double prob) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile: prob outside [0,1]");
  std::sort(sample.begin(), sample.end());
  const double pos = prob * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

/// Empirical compact-containment and equicontinuity summary of an ensemble:
/// exceedance frequencies of sup_t p'_r(x(t)) over each level C, quantiles
/// of that supremum, and quantile curves of the dual modulus over delta.
struct ContainmentReport {
  double r = 0.0;
  std::size_t paths = 0;
  std::vector<double> levels;
  std::vector<double> exceedance;  // P(sup > C) per level
  std::vector<double> probs;       // quantile probabilities
  std::vector<double> sup_quantiles;
  std::vector<double> deltas;
  std::vector<std::vector<double>> modulus_quantiles;  // [delta][prob]
};

inline const std::vector<double>& default_quantile_probs() {
  static const std::vector<double> probs{0.5, 0.9, 0.99};
  return probs;
}

/// Summary from precomputed per-path suprema and per-path moduli
/// (moduli[path][delta]). Shared by the dual and scalar variants.
inline ContainmentReport summarize_containment(double r, const std::vector<double>& sups,
                                               const std::vector<std::vector<double>>& moduli,
                                               std::vector<double> levels, std::vector<double> deltas,
                                               std::vector<double> probs = default_quantile_probs()) {
  if (sups.empty()) throw std::invalid_argument("compact_containment_report: empty ensemble");
  ContainmentReport rep;
  rep.r = r;
  rep.paths = sups.size();
  std::sort(levels.begin(), levels.end());
  rep.levels = levels;
  for (double c : rep.levels) {
    const auto hits = std::count_if(sups.begin(), sups.end(), [c](double s) { return s > c; });
    rep.exceedance.push_back(static_cast<double>(hits) / static_cast<double>(sups.size()));
  }
  rep.probs = probs;
  for (double p : probs) rep.sup_quantiles.push_back(quantile(sups, p));
  rep.deltas = deltas;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    std::vector<double> col;
    col.reserve(moduli.size());
    for (const auto& m : moduli) col.push_back(m[d]);
    std::vector<double> qs;
    for (double p : probs) qs.push_back(quantile(col, p));
    rep.modulus_quantiles.push_back(std::move(qs));
  }
  return rep;
}

/// Per-path ingredients of a containment report: sup_t p'_r(x(t)) and the
/// dual modulus at each delta (deltas need not be sorted).
struct PathTightness {
  double sup = 0.0;
  std::vector<double> moduli;
};

inline PathTightness dual_path_tightness(const DualPath& path, const SeminormIndex& r,
                                         const std::vector<double>& deltas) {
  std::vector<std::size_t> lags;
  for (double d : deltas) lags.push_back(path.grid.lag_for(d));
  const std::size_t max_lag = lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
  const auto maxima = detail::dual_lag_maxima(path, max_lag, r);
  std::vector<double> running(maxima.size());
  double acc = 0.0;
  for (std::size_t l = 0; l < maxima.size(); ++l) running[l] = acc = std::max(acc, maxima[l]);
  PathTightness out;
  out.sup = sup_dual_norm(path, r);
  for (std::size_t lag : lags) out.moduli.push_back(running[lag]);
  return out;
}

inline ContainmentReport summarize_containment(double r, const std::vector<PathTightness>& per_path,
                                               std::vector<double> levels, std::vector<double> deltas) {
  std::vector<double> sups;
  std::vector<std::vector<double>> moduli;
  for (const auto& p : per_path) {
    sups.push_back(p.sup);
    moduli.push_back(p.moduli);
  }
  return summarize_containment(r, sups, moduli, std::move(levels), std::move(deltas));
}

inline ContainmentReport compact_containment_report(const DualPathEnsemble& e, const SeminormIndex& r,
                                                    std::vector<double> levels, std::vector<double> deltas,
                                                    unsigned threads = 1) {
  if (e.paths.empty()) throw std::invalid_argument("compact_containment_report: empty ensemble");
  std::sort(deltas.begin(), deltas.end());
  std::vector<PathTightness> per_path(e.paths.size());
  parallel_for(e.paths.size(), threads,
               [&](std::size_t i) { per_path[i] = dual_path_tightness(e.paths[i], r, deltas); });
  return summarize_containment(r.r(), per_path, std::move(levels), std::move(deltas));
}

/// Scalar analogue over paths of <x, phi>; sup uses |.|.
inline ContainmentReport scalar_containment_report(const ScalarPathEnsemble& e, std::vector<double> levels,
                                                   std::vector<double> deltas) {
  if (e.paths.empty()) throw std::invalid_argument("scalar_containment_report: empty ensemble");
  std::sort(deltas.begin(), deltas.end());
  std::vector<double> sups;
  std::vector<std::vector<double>> moduli;
  for (const auto& p : e.paths) {
    sups.push_back(sup_abs(p));
    std::vector<double> row;
    for (double d : deltas) row.push_back(modulus_scalar(p, d));
    moduli.push_back(std::move(row));
  }
  return summarize_containment(0.0, sups, moduli, std::move(levels), std::move(deltas));
}

inline nlohmann::json to_json(const ContainmentReport& r) {
  return {{"r", r.r},
          {"paths", r.paths},
          {"levels", r.levels},
          {"exceedance", r.exceedance},
          {"quantile_probs", r.probs},
          {"sup_quantiles", r.sup_quantiles},
          {"deltas", r.deltas},
          {"modulus_quantiles", r.modulus_quantiles}};
}

// --- CSV --------------------------------------------------------------------

inline void write_scalar_csv(std::ostream& out, const ScalarPathEnsemble& e) {
  out << "path,step,value\n";
  out.precision(17);
  for (std::size_t p = 0; p < e.paths.size(); ++p) {
    for (std::size_t j = 0; j < e.paths[p].values.size(); ++j) {
      out << p << ',' << j << ',' << e.paths[p].values[j] << '\n';
    }
  }
}

inline void write_dual_csv(std::ostream& out, const DualPathEnsemble& e) {
  out << "path,step,k,value\n";
  out.precision(17);
  for (std::size_t p = 0; p < e.paths.size(); ++p) {
    const auto& s = e.paths[p].states;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      for (Eigen::Index k = 0; k < s.rows(); ++k) out << p << ',' << j << ',' << k << ',' << s(k, j) << '\n';
    }
  }
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}
}  // namespace detail

/// Reads the "path,step,k,value" layout back; paths and steps must be dense.
inline DualPathEnsemble read_dual_csv(std::istream& in, const TimeGrid& grid, const BasisSpec& basis) {
  std::string line;
  if (!std::getline(in, line) || line != "path,step,k,value") {
    throw std::invalid_argument("read_dual_csv: missing header");
  }
  DualPathEnsemble e(grid, basis);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 4) throw std::invalid_argument("read_dual_csv: bad field count at line " + std::to_string(lineno));
    const auto p = std::stoul(f[0]);
    const auto j = std::stoul(f[1]);
    const auto k = std::stoul(f[2]);
    if (j >= grid.size() || k >= basis.N) {
      throw std::invalid_argument("read_dual_csv: index out of range at line " + std::to_string(lineno));
    }
    while (e.paths.size() <= p) e.paths.emplace_back(grid, basis);
    e.paths[p].states(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = std::stod(f[3]);
  }
  return e;
}

}  // namespace nucleartight
