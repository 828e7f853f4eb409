// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "pareto_beam/optimizer.hpp"

namespace pareto_beam {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { convergence, rate_region, snr_sweep, verify };

std::string to_string(ExperimentKind kind);
/// Throws ConfigError on an unknown name.
ExperimentKind parse_kind(const std::string& name);

/// One antenna layout: N transmit antennas, M_i receive antennas per pair.
struct Scenario {
  std::string name;
  int tx_antennas = 0;
  std::vector<int> rx_antennas;

  int users() const { return static_cast<int>(rx_antennas.size()); }
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::convergence;
  std::vector<Scenario> scenarios;
  /// Per-transmitter power levels in linear scale (noise variance 1). Filled
  /// from "snr_db" (P = 10^(snr/10)) or "power" in the file.
  std::vector<double> powers;
  std::vector<double> snr_db;  // parallel to powers; the dB value of each level
  bool levels_in_db = false;   // the file gave "snr_db"
  std::vector<std::uint64_t> seeds;
  int restarts = 0;
  int weight_points = 21;  // rate_region sweep of w_1 over [0, 1]
  SolverConfig solver;     // solver.weights empty means equal weights
  std::string out_dir = "out";
  int threads = 1;

  /// Throws ConfigError when something is missing or inconsistent.
  void validate() const;
};

/// Reads a JSON experiment file; unknown keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

/// "8x2-2-2": N followed by the M_i list.
std::string scenario_label(const Scenario& s);

/// Parses "1,2,5-9" into {1, 2, 5, 6, 7, 8, 9}.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace pareto_beam
