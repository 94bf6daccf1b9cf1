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

// Two-sample statistics for finite-dimensional-distribution checks and the
// versioned JSON report that carries them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nucleartight/errors.hpp"
#include "nucleartight/parallel.hpp"

namespace nucleartight {

inline constexpr const char* kReportSchema = "nucleartight-report/1";

// Asymptotic Kolmogorov quantiles c(alpha).
inline constexpr double kKsC05 = 1.358;
inline constexpr double kKsC01 = 1.628;

struct KsResult {
  double statistic = 0.0;
  double critical_05 = 0.0;
  double critical_01 = 0.0;
  double p_value = 1.0;  // asymptotic
};

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}.
inline double kolmogorov_survival(double lambda) {
  if (lambda < 1e-3) return 1.0;
  if (lambda < 1.18) {
    // Small-lambda form converges faster here.
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    double cdf = 0.0;
    for (int k = 1; k <= 40; k += 2) cdf += std::pow(y, k * k);
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace detail {
inline double ks_p_value(double d, double effective_n) {
  const double sn = std::sqrt(effective_n);
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}
}  // namespace detail

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| with asymptotic
/// critical values c(alpha) sqrt((m+n)/(mn)).
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("ks_two_sample: samples need size >= 2");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double m = static_cast<double>(x.size());
  const double n = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n));
  }
  const double scale = std::sqrt((m + n) / (m * n));
  return {d, kKsC05 * scale, kKsC01 * scale, detail::ks_p_value(d, m * n / (m + n))};
}

/// One-sample statistic sup |F_a - F| against a continuous CDF.
inline KsResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.size() < 2) throw std::invalid_argument("ks_one_sample: sample needs size >= 2");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double scale = 1.0 / std::sqrt(n);
  return {d, kKsC05 * scale, kKsC01 * scale, detail::ks_p_value(d, n)};
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct EnergyResult {
  double statistic = 0.0;
  double standard_error = 0.0;  // two-sample delete-one jackknife; NaN below 3 points per sample
};

/// Energy distance between point clouds (rows are points in R^m):
///   2 mean|x - y| - mean_{i != i'} |x - x'| - mean_{j != j'} |y - y'|.
/// Row sums are computed independently per row and totals are reduced in
/// row order, so the result does not depend on `threads`.
inline EnergyResult energy_distance(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys, unsigned threads = 1) {
  if (xs.cols() != ys.cols()) throw std::invalid_argument("energy_distance: dimension mismatch");
  if (xs.rows() < 2 || ys.rows() < 2) throw std::invalid_argument("energy_distance: samples need size >= 2");
  const auto m = static_cast<std::size_t>(xs.rows());
  const auto n = static_cast<std::size_t>(ys.rows());

  std::vector<double> xy_row(m), xx_row(m), yx_row(n), yy_row(n);
  parallel_for(m, threads, [&](std::size_t i) {
    const auto xi = xs.row(static_cast<Eigen::Index>(i));
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t j = 0; j < n; ++j) sxy += (xi - ys.row(static_cast<Eigen::Index>(j))).norm();
    for (std::size_t k = 0; k < m; ++k) {
      if (k != i) sxx += (xi - xs.row(static_cast<Eigen::Index>(k))).norm();
    }
    xy_row[i] = sxy;
    xx_row[i] = sxx;
  });
  parallel_for(n, threads, [&](std::size_t j) {
    const auto yj = ys.row(static_cast<Eigen::Index>(j));
    double syx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) syx += (yj - xs.row(static_cast<Eigen::Index>(i))).norm();
    for (std::size_t k = 0; k < n; ++k) {
      if (k != j) syy += (yj - ys.row(static_cast<Eigen::Index>(k))).norm();
    }
    yx_row[j] = syx;
    yy_row[j] = syy;
  });

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (double v : xy_row) sxy += v;
  for (double v : xx_row) sxx += v;
  for (double v : yy_row) syy += v;
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double stat = 2.0 * sxy / (md * nd) - sxx / (md * (md - 1.0)) - syy / (nd * (nd - 1.0));

  if (m < 3 || n < 3) return {stat, std::numeric_limits<double>::quiet_NaN()};

  std::vector<double> loo_x(m), loo_y(n);
  for (std::size_t i = 0; i < m; ++i) {
    loo_x[i] = 2.0 * (sxy - xy_row[i]) / ((md - 1.0) * nd) -
               (sxx - 2.0 * xx_row[i]) / ((md - 1.0) * (md - 2.0)) - syy / (nd * (nd - 1.0));
  }
  for (std::size_t j = 0; j < n; ++j) {
    loo_y[j] = 2.0 * (sxy - yx_row[j]) / (md * (nd - 1.0)) - sxx / (md * (md - 1.0)) -
               (syy - 2.0 * yy_row[j]) / ((nd - 1.0) * (nd - 2.0));
  }
  auto spread = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss * (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size());
  };
  return {stat, std::sqrt(spread(loo_x) + spread(loo_y))};
}

/// Sample mean and unbiased variance with standard errors of both.
struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
};

inline MomentSummary summarize_moments(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("summarize_moments: need >= 2 values");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  const double var = m2 / (n - 1.0);
  m2 /= n;
  m4 /= n;
  MomentSummary s;
  s.mean = mean;
  s.variance = var;
  s.mean_se = std::sqrt(var / n);
  s.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  return s;
}

// --- reports ----------------------------------------------------------------

/// 64-bit FNV-1a, used for config and report fingerprints.
inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

/// Scenario-level statistics: header metadata, one JSON object per
/// (n, phi, t) cell, and scenario-wide summaries (energy trend, tightness).
struct ConvergenceReport {
  std::string scenario;
  nlohmann::json header = nlohmann::json::object();
  std::vector<nlohmann::json> cells;
  nlohmann::json summaries = nlohmann::json::object();
  bool complete = true;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["scenario"] = scenario;
    j["header"] = header;
    j["complete"] = complete;
    j["cells"] = cells;
    j["summaries"] = summaries;
    return j;
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  static ConvergenceReport from_json(const nlohmann::json& j) {
    if (j.value("schema", std::string{}) != kReportSchema) {
      throw std::invalid_argument("ConvergenceReport: unsupported schema");
    }
    ConvergenceReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.header = j.at("header");
    r.complete = j.at("complete").get<bool>();
    for (const auto& c : j.at("cells")) r.cells.push_back(c);
    r.summaries = j.at("summaries");
    return r;
  }

  static ConvergenceReport parse(const std::string& text) { return from_json(nlohmann::json::parse(text)); }

  std::string fingerprint() const { return hex64(fnv1a64(serialize())); }
};

namespace detail {
inline bool probability_key(const std::string& key) {
  return key == "exceedance" || key == "p_value" || key.ends_with("_fraction") || key.ends_with("_prob");
}

inline void validate_json_values(const nlohmann::json& v, const std::string& key, const std::string& path) {
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw NumericalIntegrityError("report: non-finite value at " + path);
    if (probability_key(key) && (x < 0.0 || x > 1.0)) {
      throw NumericalIntegrityError("report: probability outside [0,1] at " + path);
    }
  } else if (v.is_object()) {
    for (const auto& [k, child] : v.items()) validate_json_values(child, k, path + "." + k);
  } else if (v.is_array()) {
    std::size_t i = 0;
    for (const auto& child : v) validate_json_values(child, key, path + "[" + std::to_string(i++) + "]");
  }
}
}  // namespace detail

/// Builds a report from cells. Fewer cells than `expected_cells` marks the
/// report incomplete instead of dropping the gap silently.
inline ConvergenceReport assemble_report(std::string scenario, std::vector<nlohmann::json> cells,
                                         nlohmann::json header, std::size_t expected_cells,
                                         nlohmann::json summaries = nlohmann::json::object()) {
  if (cells.empty()) throw std::invalid_argument("assemble_report: no cells");
  ConvergenceReport r;
  r.scenario = std::move(scenario);
  r.header = std::move(header);
  r.cells = std::move(cells);
  r.summaries = std::move(summaries);
  r.complete = r.cells.size() >= expected_cells;
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    detail::validate_json_values(r.cells[i], "", "cells[" + std::to_string(i) + "]");
  }
  detail::validate_json_values(r.summaries, "", "summaries");
  return r;
}

}  // namespace nucleartight
