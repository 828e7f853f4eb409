// SPDX-License-Identifier: Apache-2.0
#include "pareto_beam/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "pareto_beam/baselines.hpp"
#include "pareto_beam/verify.hpp"

namespace pareto_beam {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = count;  // stop handing out work
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::string stream_label(const std::vector<int>& streams) {
  std::string out;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (i > 0) out += "-";
    out += std::to_string(streams[i]);
  }
  return out;
}

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string power_tag(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "P%g", p);
  return buf;
}

std::string cell_name(const Scenario& s, double power, std::uint64_t seed) {
  return s.name + "_" + power_tag(power) + "_seed" + std::to_string(seed);
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

void emit(RunSummary& summary, const std::string& rel, const std::string& text) {
  write_file(summary.out_dir / rel, text);
  summary.files.push_back(rel);
}

ChannelSet make_channels(const Scenario& s, double power, std::uint64_t seed) {
  return generate_channels(s.tx_antennas, s.rx_antennas, std::vector<double>(s.rx_antennas.size(), power), seed);
}

SolverConfig cell_solver(const ExperimentConfig& cfg, std::uint64_t seed) {
  SolverConfig s = cfg.solver;
  s.restarts = cfg.restarts;
  s.restart_seed = seed;
  return s;
}

std::vector<double> bits(const std::vector<double>& nats) {
  std::vector<double> out(nats.size());
  std::transform(nats.begin(), nats.end(), out.begin(), to_bits);
  return out;
}

double sum_bits(const std::vector<double>& nats) { return to_bits(std::accumulate(nats.begin(), nats.end(), 0.0)); }

int covariance_streams(const Covariance& q, double rank_threshold, double budget) {
  if (q.matrix.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(q.matrix, Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() > rank_threshold * budget).count());
}

std::vector<int> baseline_streams(const ChannelSet& ch, const std::vector<Covariance>& q, double rank_threshold) {
  std::vector<int> out;
  for (int i = 0; i < ch.users(); ++i) out.push_back(covariance_streams(q[i], rank_threshold, ch.power(i)));
  return out;
}

void check_monotone(const SolveTrace& tr, const std::string& where, std::vector<std::string>& failures) {
  double prev = tr.initial_utility;
  for (const OuterRecord& r : tr.iterations) {
    if (r.utility < prev - kMonotoneSlack) {
      failures.push_back(where + ": utility decreased at iteration " + std::to_string(r.iter));
      return;
    }
    prev = r.utility;
  }
}

void merge(RunSummary& summary, const std::vector<std::string>& failures, const std::vector<std::string>& warnings) {
  summary.failures.insert(summary.failures.end(), failures.begin(), failures.end());
  summary.warnings.insert(summary.warnings.end(), warnings.begin(), warnings.end());
}

struct Cell {
  std::size_t scenario = 0;
  std::size_t power = 0;
  std::size_t seed = 0;
};

std::vector<Cell> grid(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
    for (std::size_t p = 0; p < cfg.powers.size(); ++p) {
      for (std::size_t k = 0; k < cfg.seeds.size(); ++k) cells.push_back({s, p, k});
    }
  }
  return cells;
}

RunSummary start_summary(const ExperimentConfig& cfg) {
  RunSummary summary;
  summary.out_dir = cfg.out_dir;
  fs::create_directories(summary.out_dir);
  return summary;
}

}  // namespace

void audit_covariances(const ChannelSet& ch, const std::vector<Covariance>& q, const std::string& where,
                       std::vector<std::string>& failures) {
  const std::vector<ParetoReport> reports = check_pareto_necessary(ch, q);
  const bool full_power = ch.tx_antennas() >= ch.total_rx_antennas();
  for (int i = 0; i < ch.users(); ++i) {
    try {
      q[i].validate(ch.power(i));
    } catch (const ContractViolation& e) {
      failures.push_back(where + ": user " + std::to_string(i + 1) + " covariance invalid: " + e.what());
    }
    if (!(reports[i].subspace_residual <= kSubspaceTolerance)) {
      failures.push_back(where + ": user " + std::to_string(i + 1) + " subspace residual " +
                         num(reports[i].subspace_residual));
    }
    if (full_power && !(std::abs(reports[i].power_gap) <= kPowerGapTolerance)) {
      failures.push_back(where + ": user " + std::to_string(i + 1) + " power gap " + num(reports[i].power_gap));
    }
  }
}

void gradient_self_test(const ExperimentConfig& cfg, RunSummary& summary) {
  for (const Scenario& s : cfg.scenarios) {
    const std::uint64_t seed = cfg.seeds.front();
    const ChannelSet ch = make_channels(s, cfg.powers.front(), seed);
    const std::vector<double> w = cfg.solver.weights.empty() ? equal_weights(s.users()) : cfg.solver.weights;
    const BeamProblem problem(ch, std::make_shared<WeightedSumRate>(w));
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const BeamParams params = problem.random_params(rng);
    const GradientCheck g = check_gradients(problem, params, rng, 10);
    if (!(g.max_u_error <= kGradientTolerance) || !(g.max_lambda_error <= kGradientTolerance)) {
      summary.failures.push_back("gradient self-test failed on scenario '" + s.name + "': U error " +
                                 num(g.max_u_error) + ", lambda error " + num(g.max_lambda_error));
    }
  }
}

RunSummary run_convergence(const ExperimentConfig& cfg) {
  RunSummary summary = start_summary(cfg);
  const std::vector<Cell> cells = grid(cfg);
  struct Result {
    std::string trace;
    std::string row;
    std::vector<std::string> failures;
    std::vector<std::string> warnings;
  };
  std::vector<Result> results(cells.size());

  parallel_for(cells.size(), cfg.threads, [&](std::size_t c) {
    const Scenario& s = cfg.scenarios[cells[c].scenario];
    const double power = cfg.powers[cells[c].power];
    const std::uint64_t seed = cfg.seeds[cells[c].seed];
    const std::string where = cell_name(s, power, seed);
    const ChannelSet ch = make_channels(s, power, seed);
    const SolveTrace tr = solve(ch, cell_solver(cfg, seed));
    Result& r = results[c];

    std::ostringstream trace;
    for (const OuterRecord& rec : tr.iterations) {
      const json row = {{"schema_version", kSchemaVersion},
                        {"iter", rec.iter},
                        {"utility", to_bits(rec.utility)},
                        {"rates", bits(rec.rates)},
                        {"grad_norms", rec.grad_norms}};
      trace << row.dump() << '\n';
    }
    r.trace = trace.str();
    r.row = s.name + "," + num(power) + "," + std::to_string(seed) + "," + std::to_string(tr.iterations.size()) +
            "," + (tr.converged ? "1" : "0") + "," + num(to_bits(tr.initial_utility)) + "," +
            num(to_bits(tr.utility)) + "," + num(sum_bits(tr.rates)) + "," + stream_label(tr.streams) + "\n";
    check_monotone(tr, where, r.failures);
    audit_covariances(ch, tr.covariances, where, r.failures);
    if (!tr.converged) r.warnings.push_back(where + ": not converged within " + std::to_string(cfg.solver.max_outer_iters) + " outer iterations");
  });

  std::string table = "scenario,power,seed,iterations,converged,initial_utility_bits,utility_bits,sum_rate_bits,streams\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Scenario& s = cfg.scenarios[cells[c].scenario];
    emit(summary, "convergence/" + cell_name(s, cfg.powers[cells[c].power], cfg.seeds[cells[c].seed]) + ".jsonl",
         results[c].trace);
    table += results[c].row;
    merge(summary, results[c].failures, results[c].warnings);
  }
  emit(summary, "convergence_summary.csv", table);
  summary.cells = static_cast<int>(cells.size());
  return summary;
}

RunSummary run_rate_region(const ExperimentConfig& cfg) {
  RunSummary summary = start_summary(cfg);
  const std::vector<Cell> seeds = grid(cfg);
  const int points = cfg.weight_points;
  auto weight_at = [points](int j) { return static_cast<double>(j) / (points - 1); };

  // One work item per (scenario, power, seed, weight) plus one per
  // (scenario, power, seed) for the baselines at index `points`.
  struct Result {
    double r1 = 0.0;
    double r2 = 0.0;
    bool feasible = true;
    std::vector<std::string> failures;
  };
  const std::size_t per_seed = static_cast<std::size_t>(points) + 2;
  std::vector<Result> results(seeds.size() * per_seed);

  parallel_for(results.size(), cfg.threads, [&](std::size_t idx) {
    const Cell& cell = seeds[idx / per_seed];
    const std::size_t slot = idx % per_seed;
    const Scenario& s = cfg.scenarios[cell.scenario];
    const double power = cfg.powers[cell.power];
    const std::uint64_t seed = cfg.seeds[cell.seed];
    const ChannelSet ch = make_channels(s, power, seed);
    Result& r = results[idx];
    std::vector<Covariance> q;
    std::string where = cell_name(s, power, seed);
    if (slot < static_cast<std::size_t>(points)) {
      const double w1 = weight_at(static_cast<int>(slot));
      SolverConfig sc = cell_solver(cfg, seed);
      sc.weights = {w1, 1.0 - w1};
      q = solve(ch, sc).covariances;
      where += "_w" + num(w1);
    } else if (slot == static_cast<std::size_t>(points)) {
      q = eigen_beamforming_all(ch);
      where += "_eigen";
    } else {
      try {
        q = zero_forcing_all(ch);
      } catch (const InfeasibleError&) {
        r.feasible = false;
        return;
      }
      where += "_zf";
    }
    const RateTuple rt = rates(ch, q);
    r.r1 = to_bits(rt.rates[0]);
    r.r2 = to_bits(rt.rates[1]);
    audit_covariances(ch, q, where, r.failures);
  });

  json dominance = json::array();
  const int half = (points - 1) % 2 == 0 ? (points - 1) / 2 : -1;  // grid index of w1 = 0.5, if present
  for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
    for (std::size_t pi = 0; pi < cfg.powers.size(); ++pi) {
      const Scenario& s = cfg.scenarios[si];
      std::string csv = "method,seed,w1,R1_bits,R2_bits\n";
      int wins = 0;
      int compared = 0;
      for (std::size_t c = 0; c < seeds.size(); ++c) {
        if (seeds[c].scenario != si || seeds[c].power != pi) continue;
        const std::string seed = std::to_string(cfg.seeds[seeds[c].seed]);
        const Result* base = &results[c * per_seed];
        for (int j = 0; j < points; ++j) {
          csv += "proposed," + seed + "," + num(weight_at(j)) + "," + num(base[j].r1) + "," + num(base[j].r2) + "\n";
        }
        const Result& eig = base[points];
        const Result& zf = base[points + 1];
        csv += "eigen," + seed + ",," + num(eig.r1) + "," + num(eig.r2) + "\n";
        if (zf.feasible) csv += "zf," + seed + ",," + num(zf.r1) + "," + num(zf.r2) + "\n";
        for (std::size_t j = 0; j < per_seed; ++j) merge(summary, base[j].failures, {});
        if (half >= 0) {
          double best = eig.r1 + eig.r2;
          if (zf.feasible) best = std::max(best, zf.r1 + zf.r2);
          ++compared;
          // The 1e-6 margin is in nats; rows are in bits.
          if (base[half].r1 + base[half].r2 >= best - to_bits(1e-6)) ++wins;
        }
      }
      const std::string rel = "rate_region_" + s.name + "_" + power_tag(cfg.powers[pi]) + ".csv";
      emit(summary, rel, csv);
      if (half >= 0) {
        dominance.push_back({{"scenario", s.name}, {"power", cfg.powers[pi]}, {"seeds", compared}, {"wins", wins}});
      }
    }
  }
  const json report = {{"schema_version", kSchemaVersion}, {"equal_weight_dominance", dominance}};
  emit(summary, "rate_region_summary.json", report.dump(2) + "\n");
  summary.cells = static_cast<int>(results.size());
  return summary;
}

RunSummary run_snr_sweep(const ExperimentConfig& cfg) {
  RunSummary summary = start_summary(cfg);
  const std::vector<Cell> cells = grid(cfg);
  struct MethodResult {
    double sum_bits = std::nan("");
    std::vector<int> streams;
    bool converged = true;
    bool feasible = true;
  };
  struct Result {
    MethodResult proposed, eigen, zf;
    std::vector<std::string> failures;
    std::vector<std::string> warnings;
  };
  std::vector<Result> results(cells.size());

  parallel_for(cells.size(), cfg.threads, [&](std::size_t c) {
    const Scenario& s = cfg.scenarios[cells[c].scenario];
    const double power = cfg.powers[cells[c].power];
    const std::uint64_t seed = cfg.seeds[cells[c].seed];
    const std::string where = cell_name(s, power, seed);
    const ChannelSet ch = make_channels(s, power, seed);
    Result& r = results[c];

    const SolveTrace tr = solve(ch, cell_solver(cfg, seed));
    check_monotone(tr, where, r.failures);
    audit_covariances(ch, tr.covariances, where, r.failures);
    r.proposed = {sum_bits(tr.rates), tr.streams, tr.converged, true};
    if (!tr.converged) r.warnings.push_back(where + ": not converged");

    const std::vector<Covariance> eig = eigen_beamforming_all(ch);
    audit_covariances(ch, eig, where + "_eigen", r.failures);
    r.eigen = {to_bits(rates(ch, eig).sum()), baseline_streams(ch, eig, cfg.solver.rank_threshold), true, true};
    try {
      const std::vector<Covariance> zf = zero_forcing_all(ch);
      audit_covariances(ch, zf, where + "_zf", r.failures);
      r.zf = {to_bits(rates(ch, zf).sum()), baseline_streams(ch, zf, cfg.solver.rank_threshold), true, true};
    } catch (const InfeasibleError&) {
      r.zf.feasible = false;
    }
  });

  const char* methods[] = {"proposed", "eigen", "zf"};
  auto pick = [](const Result& r, int m) -> const MethodResult& {
    return m == 0 ? r.proposed : (m == 1 ? r.eigen : r.zf);
  };
  std::string summary_csv =
      "scenario,method,snr_db,power,seeds,mean_sum_rate_bits,std_sum_rate_bits,modal_streams,modal_count,"
      "full_rank_count\n";
  for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
    const Scenario& s = cfg.scenarios[si];
    const int total_streams = std::accumulate(s.rx_antennas.begin(), s.rx_antennas.end(), 0);
    std::string csv = "method,snr_db,power,seed,sum_rate_bits,streams,converged\n";
    for (int m = 0; m < 3; ++m) {
      for (std::size_t pi = 0; pi < cfg.powers.size(); ++pi) {
        std::vector<double> values;
        std::map<std::vector<int>, int> tuples;
        int full = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          if (cells[c].scenario != si || cells[c].power != pi) continue;
          const MethodResult& mr = pick(results[c], m);
          if (!mr.feasible) continue;
          csv += std::string(methods[m]) + "," + num(cfg.snr_db[pi]) + "," + num(cfg.powers[pi]) + "," +
                 std::to_string(cfg.seeds[cells[c].seed]) + "," + num(mr.sum_bits) + "," +
                 stream_label(mr.streams) + "," + (mr.converged ? "1" : "0") + "\n";
          values.push_back(mr.sum_bits);
          ++tuples[mr.streams];
          if (std::accumulate(mr.streams.begin(), mr.streams.end(), 0) == total_streams) ++full;
        }
        if (values.empty()) continue;
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double sd = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
        // Ties go to the lexicographically smallest tuple (std::map order).
        auto modal = tuples.begin();
        for (auto it = tuples.begin(); it != tuples.end(); ++it) {
          if (it->second > modal->second) modal = it;
        }
        summary_csv += s.name + "," + methods[m] + "," + num(cfg.snr_db[pi]) + "," + num(cfg.powers[pi]) + "," +
                       std::to_string(values.size()) + "," + num(mean) + "," + num(sd) + "," +
                       stream_label(modal->first) + "," + std::to_string(modal->second) + "," +
                       std::to_string(full) + "\n";
      }
    }
    emit(summary, "snr_sweep_" + s.name + ".csv", csv);

    // Sum rate should not fall as the power grows, seed by seed.
    std::vector<std::size_t> order(cfg.powers.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cfg.powers[a] < cfg.powers[b]; });
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k) {
      double prev = -1.0;
      for (std::size_t pi : order) {
        const std::size_t c = (si * cfg.powers.size() + pi) * cfg.seeds.size() + k;
        const double v = results[c].proposed.sum_bits;
        if (v < prev - 1e-9) {
          summary.warnings.push_back(s.name + " seed " + std::to_string(cfg.seeds[k]) +
                                     ": proposed sum rate drops from " + num(prev) + " to " + num(v) +
                                     " bits at " + num(cfg.snr_db[pi]) + " dB");
        }
        prev = std::max(prev, v);
      }
    }
  }
  for (const Result& r : results) merge(summary, r.failures, r.warnings);
  emit(summary, "snr_summary.csv", summary_csv);
  summary.cells = static_cast<int>(cells.size());
  return summary;
}

RunSummary run_verify(const ExperimentConfig& cfg) {
  RunSummary summary = start_summary(cfg);
  const std::vector<Cell> cells = grid(cfg);
  struct Result {
    json entry;
    std::vector<std::string> failures;
  };
  std::vector<Result> results(cells.size());

  parallel_for(cells.size(), cfg.threads, [&](std::size_t c) {
    const Scenario& s = cfg.scenarios[cells[c].scenario];
    const double power = cfg.powers[cells[c].power];
    const std::uint64_t seed = cfg.seeds[cells[c].seed];
    const std::string where = cell_name(s, power, seed);
    const ChannelSet ch = make_channels(s, power, seed);
    Result& r = results[c];

    const SolveTrace tr = solve(ch, cell_solver(cfg, seed));
    check_monotone(tr, where, r.failures);
    audit_covariances(ch, tr.covariances, where, r.failures);
    const std::vector<ParetoReport> pareto = check_pareto_necessary(ch, tr.covariances);
    double residual = 0.0;
    double gap = 0.0;
    for (const ParetoReport& p : pareto) {
      residual = std::max(residual, p.subspace_residual);
      gap = std::max(gap, std::abs(p.power_gap));
    }
    r.entry = {{"scenario", s.name},
               {"power", power},
               {"seed", seed},
               {"converged", tr.converged},
               {"iterations", tr.iterations.size()},
               {"sum_rate_bits", sum_bits(tr.rates)},
               {"streams", tr.streams},
               {"max_subspace_residual", residual},
               {"max_power_gap", gap},
               {"full_power_required", ch.tx_antennas() >= ch.total_rx_antennas()}};

    const bool two_user = s.users() == 2 && s.rx_antennas[0] == s.rx_antennas[1] &&
                          s.tx_antennas >= 2 * s.rx_antennas[0];
    if (two_user) {
      const SubspaceReport sub = check_two_user_subspace(ch);
      r.entry["principal_angle"] = sub.max_angle;
      if (!(sub.max_angle <= kAngleTolerance)) {
        r.failures.push_back(where + ": principal angle " + num(sub.max_angle));
      }
    }

    // Strict gain from adding a rank-one direction on top of a random
    // feasible covariance, for every pair.
    std::mt19937_64 rng(seed * 1000003ULL + cells[c].power);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    json lemma = json::array();
    for (int i = 0; i < ch.users(); ++i) {
      const int n = ch.tx_antennas();
      CMatrix a(n, n);
      for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = Complex(gauss(rng), gauss(rng));
      CMatrix qp = a * a.adjoint();
      qp *= unit(rng) * ch.power(i) / qp.trace().real();
      CVector v(n);
      for (Eigen::Index k = 0; k < n; ++k) v(k) = Complex(gauss(rng), gauss(rng));
      const double delta = 1e-3 + unit(rng) * ch.power(i);
      const CMatrix phi = interference_plus_noise(ch, i, tr.covariances);
      const LemmaReport lr = check_lemma_strict_gain(ch, i, phi, Covariance{0.5 * (qp + qp.adjoint())}, v, delta);
      lemma.push_back({{"user", i + 1}, {"lhs", lr.lhs}, {"rhs", lr.rhs}, {"strict", lr.strict}});
      if (!lr.strict) r.failures.push_back(where + ": strict gain violated for user " + std::to_string(i + 1));
    }
    r.entry["lemma"] = lemma;
  });

  json entries = json::array();
  std::ostringstream text;
  text << "verification report (schema " << kSchemaVersion << ")\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const json& e = results[c].entry;
    entries.push_back(e);
    text << e["scenario"].get<std::string>() << " P=" << num(e["power"].get<double>())
         << " seed=" << e["seed"].get<std::uint64_t>() << " residual=" << num(e["max_subspace_residual"].get<double>())
         << " power_gap=" << num(e["max_power_gap"].get<double>());
    if (e.contains("principal_angle")) text << " angle=" << num(e["principal_angle"].get<double>());
    text << (results[c].failures.empty() ? " ok" : " FAIL") << "\n";
    merge(summary, results[c].failures, {});
  }
  text << summary.failures.size() << " violation(s)\n";
  for (const std::string& f : summary.failures) text << "  " << f << "\n";
  const json report = {{"schema_version", kSchemaVersion},
                       {"tolerances",
                        {{"subspace_residual", kSubspaceTolerance},
                         {"power_gap", kPowerGapTolerance},
                         {"principal_angle", kAngleTolerance}}},
                       {"violations", summary.failures},
                       {"cells", entries}};
  emit(summary, "verify_report.json", report.dump(2) + "\n");
  emit(summary, "verify_report.txt", text.str());
  summary.cells = static_cast<int>(cells.size());
  return summary;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunSummary self_test;
  gradient_self_test(cfg, self_test);

  RunSummary summary;
  if (!self_test.failures.empty()) {
    summary.out_dir = cfg.out_dir;
    fs::create_directories(summary.out_dir);
    summary.failures = self_test.failures;
  } else {
    switch (cfg.kind) {
      case ExperimentKind::convergence: summary = run_convergence(cfg); break;
      case ExperimentKind::rate_region: summary = run_rate_region(cfg); break;
      case ExperimentKind::snr_sweep: summary = run_snr_sweep(cfg); break;
      case ExperimentKind::verify: summary = run_verify(cfg); break;
    }
  }

  const json manifest = {{"schema_version", kSchemaVersion},
                         {"experiment", to_string(cfg.kind)},
                         {"config", to_json(cfg)},
                         {"gradient_self_test", self_test.failures.empty() ? "passed" : "failed"},
                         {"cells", summary.cells},
                         {"files", summary.files},
                         {"invariant_failures", summary.failures},
                         {"warnings", summary.warnings}};
  write_file(summary.out_dir / "manifest.json", manifest.dump(2) + "\n");
  summary.files.push_back("manifest.json");
  return summary;
}

}  // namespace pareto_beam
