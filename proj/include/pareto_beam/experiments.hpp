// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pareto_beam/config.hpp"

namespace pareto_beam {

/// Tolerances applied to every emitted solution.
inline constexpr double kSubspaceTolerance = 1e-8;
inline constexpr double kPowerGapTolerance = 1e-6;
inline constexpr double kAngleTolerance = 1e-7;
inline constexpr double kGradientTolerance = 1e-4;
inline constexpr double kMonotoneSlack = 1e-9;

struct RunSummary {
  std::filesystem::path out_dir;
  std::vector<std::string> files;     // relative to out_dir, in write order
  int cells = 0;
  std::vector<std::string> failures;  // one line per invariant violation
  std::vector<std::string> warnings;

  bool ok() const { return failures.empty(); }
};

/// Runs body(0..count-1) on `threads` workers. Each index runs exactly once;
/// the first exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Finite-difference check of the analytic gradients on one random instance
/// per scenario (seeded by the first seed). Failures go to summary.failures.
void gradient_self_test(const ExperimentConfig& cfg, RunSummary& summary);

/// Covariance audit for one solution: subspace residual and, when
/// N >= sum M_i, the power gap. Violations are appended to `failures`.
void audit_covariances(const ChannelSet& ch, const std::vector<Covariance>& q, const std::string& where,
                       std::vector<std::string>& failures);

/// Fig. 1 style: one JSONL utility trace per (scenario, power, seed) and a
/// summary CSV.
RunSummary run_convergence(const ExperimentConfig& cfg);
/// Fig. 2 style: (R_1, R_2) of the proposed design over the weight grid and
/// of both baselines, one CSV per (scenario, power).
RunSummary run_rate_region(const ExperimentConfig& cfg);
/// Fig. 3 / Table 1 style: per-seed sum rates and stream tuples, plus a
/// summary with means and modal stream tuples.
RunSummary run_snr_sweep(const ExperimentConfig& cfg);
/// Certification report (text and JSON) of converged solutions.
RunSummary run_verify(const ExperimentConfig& cfg);

/// Self-test, the experiment selected by cfg.kind, then manifest.json.
RunSummary run_experiment(const ExperimentConfig& cfg);

/// "2-2-1".
std::string stream_label(const std::vector<int>& streams);

}  // namespace pareto_beam
