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

// Batch front end: scenario config in, OUT/report.json (+ OUT/cells/*.csv)
// out. Exit codes: 0 pass, 1 gate failure, 2 config error, 3 numerical
// integrity failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nucleartight/nucleartight.hpp"

namespace nt = nucleartight;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitGate = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIntegrity = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out_dir = "out";
  bool dump_paths = false;
};

nt::ScenarioConfig load(const CommonOptions& opts) {
  nt::ScenarioConfig config = opts.config_path.empty() ? nt::ScenarioConfig{} : nt::load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  // Thread count never enters the materialized config, so reports do not
  // depend on it.
  config.threads = opts.threads;
  config.validate();
  return config;
}

void write_report(const CommonOptions& opts, const nt::ConvergenceReport& report) {
  fs::create_directories(opts.out_dir);
  std::ofstream out(fs::path(opts.out_dir) / "report.json", std::ios::binary);
  out << report.serialize();
  if (!out) throw std::runtime_error("cannot write " + (fs::path(opts.out_dir) / "report.json").string());
  std::cout << "wrote " << (fs::path(opts.out_dir) / "report.json").string() << " (fingerprint "
            << report.fingerprint() << ", complete=" << (report.complete ? "true" : "false") << ")\n";
}

fs::path cells_dir(const CommonOptions& opts) {
  const fs::path dir = fs::path(opts.out_dir) / "cells";
  fs::create_directories(dir);
  return dir;
}

constexpr std::size_t kDumpPaths = 100;

// --- basis-check -------------------------------------------------------------------

int cmd_basis_check(const CommonOptions& opts) {
  const auto config = load(opts);
  const nt::BasisSpec spec = config.basis;
  const nt::HermiteBasis basis(spec);
  const auto n = static_cast<Eigen::Index>(spec.N);

  nlohmann::json checks = nlohmann::json::array();
  bool ok = true;
  auto record = [&](const std::string& name, double value, double tolerance, bool pass) {
    checks.push_back({{"check", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}});
    ok = ok && pass;
  };

  const double gram_err = (basis.gram() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  record("orthonormality", gram_err, 1e-10, gram_err <= 1e-10);

  const Eigen::MatrixXd d = nt::derivative_op(spec);
  const double skew = (d + d.transpose()).cwiseAbs().maxCoeff();
  record("derivative_skew", skew, 0.0, skew == 0.0);

  const Eigen::MatrixXd l = nt::laplacian_op(spec);
  const double sym = (l - l.transpose()).cwiseAbs().maxCoeff();
  record("laplacian_symmetric", sym, 0.0, sym == 0.0);
  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(l).eigenvalues().maxCoeff();
  record("laplacian_max_eigenvalue", top, 1e-10, top <= 1e-10);

  const double id_err = (nt::heat_matrix(0.0, spec) - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  record("heat_identity", id_err, 0.0, id_err == 0.0);
  const Eigen::MatrixXd e3 = nt::heat_matrix(0.3, spec);
  const Eigen::MatrixXd e2 = nt::heat_matrix(0.2, spec);
  const Eigen::MatrixXd e5 = nt::heat_matrix(0.5, spec);
  const double semigroup = (e3 * e2 - e5).cwiseAbs().maxCoeff();
  record("heat_semigroup", semigroup, 1e-10, semigroup <= 1e-10);
  const double radius = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e5).eigenvalues().cwiseAbs().maxCoeff();
  record("heat_contraction", radius, 1.0 + 1e-12, radius <= 1.0 + 1e-12);

  const nt::SeminormIndex r0(0.0), r1(1.0);
  const double hs2 = std::pow(nt::hs_norm(r0, r1, 10000).value, 2);
  const double hs_err = std::abs(hs2 - M_PI * M_PI / 8.0);
  record("hs_series", hs_err, 1e-3, hs_err <= 1e-3);

  nlohmann::json report{{"schema", nt::kReportSchema},
                        {"scenario", config.scenario},
                        {"command", "basis-check"},
                        {"header", nt::report_header(config)},
                        {"checks", checks},
                        {"pass", ok}};
  fs::create_directories(opts.out_dir);
  std::ofstream(fs::path(opts.out_dir) / "report.json", std::ios::binary) << report.dump(2) << "\n";
  std::cout << report.dump(2) << "\n";
  if (opts.dump_paths) {
    std::ofstream csv(cells_dir(opts) / "laplacian.csv");
    nt::write_matrix_csv(csv, l);
  }
  return ok ? kExitPass : kExitGate;
}

// --- clt -----------------------------------------------------------------------------

int cmd_clt(const CommonOptions& opts) {
  const auto config = load(opts);
  const auto report = nt::clt_report(config);
  write_report(opts, report);

  if (opts.dump_paths) {
    const auto dir = cells_dir(opts);
    const auto phis = config.test_functions(config.basis);
    const std::size_t paths = std::min(config.reps, kDumpPaths);
    for (std::size_t n : config.n_list) {
      for (std::size_t f = 0; f < phis.size(); ++f) {
        nt::ScalarPathEnsemble e(config.grid(), config.seed);
        for (std::size_t rep = 0; rep < paths; ++rep) {
          const auto particles = nt::simulate_particles(n, config.grid(), config.seed, static_cast<std::uint32_t>(rep));
          e.paths.push_back(nt::mn_scalar_path(phis[f], particles));
        }
        std::ofstream csv(dir / ("clt_n" + std::to_string(n) + "_phi" + std::to_string(f) + ".csv"));
        nt::write_scalar_csv(csv, e);
      }
    }
  }

  // Gates: energy trend, and every nontrivial cell at the largest n inside
  // its 1% KS critical value.
  bool ok = report.complete && report.summaries.at("energy_trend_ok").get<bool>();
  const std::size_t n_max = *std::max_element(config.n_list.begin(), config.n_list.end());
  for (const auto& cell : report.cells) {
    if (cell.at("n").get<std::size_t>() != n_max || cell.at("trivial").get<bool>()) continue;
    if (cell.at("ks").get<double>() > cell.at("ks_critical").get<double>()) {
      std::cerr << "gate: KS above critical value for n=" << n_max << " phi=" << cell.at("phi").dump()
                << " t=" << cell.at("t") << "\n";
      ok = false;
    }
  }
  return ok ? kExitPass : kExitGate;
}

// --- heat ----------------------------------------------------------------------------

int cmd_heat(const CommonOptions& opts) {
  const auto config = load(opts);
  const auto report = nt::heat_convergence_report(config);
  write_report(opts, report);

  if (opts.dump_paths) {
    const auto dir = cells_dir(opts);
    const nt::BasisSpec basis = config.mode_basis();
    const nt::HeatSolver solver(basis, config.grid());
    const std::size_t paths = std::min(config.reps, kDumpPaths);
    for (std::size_t n : config.n_list) {
      nt::DualPathEnsemble e(config.grid(), basis, config.seed);
      for (std::size_t rep = 0; rep < paths; ++rep) {
        const auto major = static_cast<std::uint32_t>(rep);
        const auto driver = nt::mn_dual_path(nt::simulate_particles(n, config.grid(), config.seed, major), basis);
        const auto eta = nt::sample_initial(config.eta, basis, config.seed, major, static_cast<std::uint32_t>(n));
        e.paths.push_back(solver.solve(driver, eta));
      }
      std::ofstream csv(dir / ("heat_n" + std::to_string(n) + ".csv"));
      nt::write_dual_csv(csv, e);
    }
  }

  bool ok = report.complete && report.summaries.at("residual_gate_ok").get<bool>() &&
            report.summaries.at("energy_trend_ok").get<bool>();
  if (!report.summaries.at("residual_gate_ok").get<bool>()) {
    std::cerr << "gate: scaled weak-form residual " << report.summaries.at("residual_scaled_max") << " >= "
              << report.summaries.at("residual_gate") << "\n";
  }
  return ok ? kExitPass : kExitGate;
}

// --- tightness ---------------------------------------------------------------------

int cmd_tightness(const CommonOptions& opts) {
  const auto config = load(opts);
  const auto report = nt::tightness_report(config);
  write_report(opts, report);

  if (opts.dump_paths) {
    const auto dir = cells_dir(opts);
    const nt::BasisSpec basis = config.mode_basis();
    const std::size_t paths = std::min(config.reps, kDumpPaths);
    for (std::size_t n : config.n_list) {
      nt::DualPathEnsemble e(config.grid(), basis, config.seed);
      for (std::size_t rep = 0; rep < paths; ++rep) {
        e.paths.push_back(nt::mn_dual_path(
            nt::simulate_particles(n, config.grid(), config.seed, static_cast<std::uint32_t>(rep)), basis));
      }
      std::ofstream csv(dir / ("tightness_mn_n" + std::to_string(n) + ".csv"));
      nt::write_dual_csv(csv, e);
    }
  }
  return report.summaries.at("gate_ok").get<bool>() ? kExitPass : kExitGate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nucleartight: distribution-valued martingales, heat SPDE and tightness diagnostics"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "Scenario JSON (defaults used when omitted)");
    sub->add_option("--seed", opts.seed, "Overrides the config seed");
    sub->add_option("--threads", opts.threads, "Worker threads (hint only; results do not depend on it)");
    sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--dump-paths", opts.dump_paths, "Write raw path CSVs to OUT/cells/");
  };

  auto* basis = app.add_subcommand("basis-check", "Deterministic invariants of the Hermite structure");
  auto* clt = app.add_subcommand("clt", "Martingale CLT experiment");
  auto* heat = app.add_subcommand("heat", "Stochastic heat equation weak-convergence experiment");
  auto* tight = app.add_subcommand("tightness", "Compact-containment and modulus diagnostics");
  for (auto* sub : {basis, clt, heat, tight}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (*basis) return cmd_basis_check(opts);
    if (*clt) return cmd_clt(opts);
    if (*heat) return cmd_heat(opts);
    if (*tight) return cmd_tightness(opts);
  } catch (const nt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nt::NumericalIntegrityError& e) {
    std::cerr << "numerical integrity failure: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
