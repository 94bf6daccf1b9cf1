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

// Scenario configuration: one JSON document per run. Every default is
// materialized by to_json(), which is what goes into report headers and
// the config hash. The thread hint is deliberately excluded from both.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nucleartight/diagnostics.hpp"
#include "nucleartight/errors.hpp"
#include "nucleartight/hermite_space.hpp"
#include "nucleartight/path_space.hpp"

namespace nucleartight {

inline constexpr const char* kVersion = "1.0.0";

struct InitialSpec {
  enum class Kind { zero, fixed, gaussian };
  Kind kind = Kind::zero;
  double r = 1.0;
  double scale = 1.0;
  std::vector<double> coeffs;  // fixed kind only
};

struct ScenarioConfig {
  std::string scenario = "custom";
  BasisSpec basis{64, 128};
  double horizon = 1.0;
  std::size_t steps = 1000;
  std::vector<std::size_t> n_list{10, 40, 160};
  std::size_t reps = 2000;
  InitialSpec eta;
  std::vector<std::vector<double>> phi_list{{1.0}};
  std::vector<double> times{0.5, 1.0};
  std::uint64_t seed = 20261016;
  unsigned threads = 0;  // hint only
  std::size_t modes = 16;  // truncation of driver / solution in heat runs
  double seminorm_r = 1.0;
  std::vector<double> levels{0.5, 1.0, 2.0, 4.0};
  std::vector<double> deltas{0.01, 0.02, 0.05, 0.1};

  TimeGrid grid() const { return {horizon, steps}; }

  /// Basis used by the heat and tightness runs: `modes` functions.
  BasisSpec mode_basis() const { return BasisSpec{modes, 2 * modes}; }

  std::vector<TestFunction> test_functions(const BasisSpec& b) const {
    std::vector<TestFunction> out;
    for (const auto& c : phi_list) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.N));
      for (std::size_t k = 0; k < c.size(); ++k) v[static_cast<Eigen::Index>(k)] = c[k];
      out.emplace_back(b, v);
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["basis"] = {{"N", basis.N}, {"Q", basis.Q}};
    j["grid"] = {{"T", horizon}, {"J", steps}};
    j["n_list"] = n_list;
    j["reps"] = reps;
    const char* kind = eta.kind == InitialSpec::Kind::zero ? "zero"
                       : eta.kind == InitialSpec::Kind::fixed ? "fixed"
                                                              : "gaussian";
    j["eta"] = {{"kind", kind}, {"r", eta.r}, {"scale", eta.scale}, {"coeffs", eta.coeffs}};
    j["phi_list"] = phi_list;
    j["times"] = times;
    j["seed"] = seed;
    j["modes"] = modes;
    j["seminorm_r"] = seminorm_r;
    j["levels"] = levels;
    j["deltas"] = deltas;
    return j;
  }

  std::string hash() const { return hex64(fnv1a64(to_json().dump())); }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw ConfigError("config field '" + field + "': " + why);
    };
    if (basis.N < 2) fail("basis.N", "must be >= 2");
    if (basis.Q < 2 * basis.N) fail("basis.Q", "must be >= 2*N");
    if (!(horizon > 0.0)) fail("grid.T", "must be > 0");
    if (steps < 1) fail("grid.J", "must be >= 1");
    if (n_list.empty()) fail("n_list", "must be nonempty");
    for (auto n : n_list) {
      if (n == 0 || n >= (1u << 24)) fail("n_list", "entries must be in [1, 2^24)");
    }
    if (reps < 3) fail("reps", "must be >= 3");
    if (phi_list.empty()) fail("phi_list", "must be nonempty");
    for (const auto& c : phi_list) {
      if (c.empty() || c.size() > basis.N) fail("phi_list", "coefficient lists need 1..N entries");
      for (double v : c) {
        if (!std::isfinite(v)) fail("phi_list", "non-finite coefficient");
      }
    }
    if (times.empty()) fail("times", "must be nonempty");
    const TimeGrid g(horizon, steps);
    for (double t : times) {
      try {
        g.index_of(t);
      } catch (const std::invalid_argument&) {
        fail("times", "time " + std::to_string(t) + " is not a grid node in [0, T]");
      }
    }
    if (modes < 2 || modes > basis.N) fail("modes", "must be in [2, N]");
    for (const auto& c : phi_list) {
      if (c.size() > modes) fail("phi_list", "heat runs need coefficient lists of at most 'modes' entries");
    }
    if (!(seminorm_r >= 0.0)) fail("seminorm_r", "must be >= 0");
    if (eta.kind == InitialSpec::Kind::gaussian && !(eta.r > 0.5)) fail("eta.r", "gaussian kind requires r > 1/2");
    if (eta.kind == InitialSpec::Kind::fixed && eta.coeffs.size() > modes) fail("eta.coeffs", "at most 'modes' entries");
    for (double d : deltas) {
      if (!(d > 0.0 && d <= horizon)) fail("deltas", "entries must lie in (0, T]");
    }
  }
};

namespace detail {
template <typename T>
void read_field(const nlohmann::json& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config field '" + path + "': " + e.what());
  }
}
}  // namespace detail

/// Parses a scenario document; unknown top-level keys are rejected so typos
/// surface as config errors instead of silently falling back to defaults.
inline ScenarioConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  static const std::vector<std::string> known{"scenario", "basis", "grid",  "n_list",     "reps",   "eta",
                                              "phi_list", "times", "seed",  "threads",    "modes",  "seminorm_r",
                                              "levels",   "deltas"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config field '" + key + "': unknown field");
    }
  }
  ScenarioConfig c;
  detail::read_field(j, "scenario", "scenario", c.scenario);
  if (j.contains("basis")) {
    const auto& b = j.at("basis");
    detail::read_field(b, "N", "basis.N", c.basis.N);
    c.basis.Q = 2 * c.basis.N;
    detail::read_field(b, "Q", "basis.Q", c.basis.Q);
    if (!j.contains("modes")) c.modes = std::min<std::size_t>(c.modes, c.basis.N);
  }
  if (j.contains("grid")) {
    detail::read_field(j.at("grid"), "T", "grid.T", c.horizon);
    detail::read_field(j.at("grid"), "J", "grid.J", c.steps);
  }
  detail::read_field(j, "n_list", "n_list", c.n_list);
  detail::read_field(j, "reps", "reps", c.reps);
  if (j.contains("eta")) {
    const auto& e = j.at("eta");
    std::string kind = "zero";
    detail::read_field(e, "kind", "eta.kind", kind);
    if (kind == "zero") {
      c.eta.kind = InitialSpec::Kind::zero;
    } else if (kind == "fixed" || kind == "fixed-coeffs") {
      c.eta.kind = InitialSpec::Kind::fixed;
    } else if (kind == "gaussian") {
      c.eta.kind = InitialSpec::Kind::gaussian;
    } else {
      throw ConfigError("config field 'eta.kind': expected zero | fixed | gaussian, got '" + kind + "'");
    }
    detail::read_field(e, "r", "eta.r", c.eta.r);
    detail::read_field(e, "scale", "eta.scale", c.eta.scale);
    detail::read_field(e, "coeffs", "eta.coeffs", c.eta.coeffs);
  }
  detail::read_field(j, "phi_list", "phi_list", c.phi_list);
  detail::read_field(j, "times", "times", c.times);
  detail::read_field(j, "seed", "seed", c.seed);
  detail::read_field(j, "threads", "threads", c.threads);
  detail::read_field(j, "modes", "modes", c.modes);
  detail::read_field(j, "seminorm_r", "seminorm_r", c.seminorm_r);
  detail::read_field(j, "levels", "levels", c.levels);
  detail::read_field(j, "deltas", "deltas", c.deltas);
  c.validate();
  return c;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte locates the failure; translate to a line number.
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
    throw ConfigError("config: parse error at line " + std::to_string(line) + ": " + e.what());
  }
  return parse_config(j);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Header embedded in every report.
inline nlohmann::json report_header(const ScenarioConfig& c) {
  return {{"config", c.to_json()}, {"config_hash", c.hash()}, {"seed", c.seed}, {"version", kVersion},
          {"grid", {{"T", c.horizon}, {"J", c.steps}, {"dt", c.grid().dt()}}}};
}

}  // namespace nucleartight
