// SPDX-License-Identifier: Apache-2.0
#include "pareto_beam/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pareto_beam {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::rate_region: return "rate_region";
    case ExperimentKind::snr_sweep: return "snr_sweep";
    case ExperimentKind::verify: return "verify";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "convergence") return ExperimentKind::convergence;
  if (name == "rate_region") return ExperimentKind::rate_region;
  if (name == "snr_sweep") return ExperimentKind::snr_sweep;
  if (name == "verify") return ExperimentKind::verify;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::string scenario_label(const Scenario& s) {
  std::string out = std::to_string(s.tx_antennas) + "x";
  for (std::size_t i = 0; i < s.rx_antennas.size(); ++i) {
    if (i > 0) out += "-";
    out += std::to_string(s.rx_antennas[i]);
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s) -> std::uint64_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + s + "'");
    }
    if (used != s.size() || s.empty() || s[0] == '-') throw ConfigError("bad seed '" + s + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(number(item));
      continue;
    }
    const std::uint64_t lo = number(item.substr(0, dash));
    const std::uint64_t hi = number(item.substr(dash + 1));
    if (hi < lo) throw ConfigError("empty seed range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError("seed list is empty");
  return out;
}

void ExperimentConfig::validate() const {
  if (scenarios.empty()) throw ConfigError("at least one scenario is required");
  std::set<std::string> names;
  for (const Scenario& s : scenarios) {
    if (s.name.empty()) throw ConfigError("scenario names must not be empty");
    if (!names.insert(s.name).second) throw ConfigError("duplicate scenario name '" + s.name + "'");
    validate_dimensions(s.tx_antennas, s.rx_antennas);
    if (!solver.weights.empty() && solver.weights.size() != s.rx_antennas.size()) {
      throw ConfigError("weights must have one entry per pair in scenario '" + s.name + "'");
    }
    if (kind == ExperimentKind::rate_region && s.users() != 2) {
      throw ConfigError("rate_region needs two pairs; scenario '" + s.name + "' has " + std::to_string(s.users()));
    }
  }
  if (powers.empty()) throw ConfigError("at least one power level is required");
  if (snr_db.size() != powers.size()) throw ConfigError("internal: snr_db and powers differ in length");
  for (double p : powers) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("power levels must be positive and finite");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (restarts < 0) throw ConfigError("restarts must be non-negative");
  if (weight_points < 2) throw ConfigError("weight_points must be at least 2");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (out_dir.empty()) throw ConfigError("output directory must not be empty");
  solver.validate(scenarios.front().users());
}

namespace {

template <typename T>
T get_as(const json& node, const char* key) {
  try {
    return node.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& node, const std::set<std::string>& known, const std::string& where) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

SolverConfig parse_solver(const json& node) {
  if (!node.is_object()) throw ConfigError("'solver' must be an object");
  reject_unknown(node,
                 {"eps_outer", "eps_inner", "step_scale", "max_outer_iters", "max_inner_iters", "max_backtracks",
                  "rank_threshold", "expand_steps", "conjugate_directions", "audit"},
                 "solver");
  SolverConfig s;
  if (node.contains("eps_outer")) s.eps_outer = get_as<double>(node, "eps_outer");
  if (node.contains("eps_inner")) s.eps_inner = get_as<double>(node, "eps_inner");
  if (node.contains("step_scale")) s.step_scale = get_as<double>(node, "step_scale");
  if (node.contains("max_outer_iters")) s.max_outer_iters = get_as<int>(node, "max_outer_iters");
  if (node.contains("max_inner_iters")) s.max_inner_iters = get_as<int>(node, "max_inner_iters");
  if (node.contains("max_backtracks")) s.max_backtracks = get_as<int>(node, "max_backtracks");
  if (node.contains("rank_threshold")) s.rank_threshold = get_as<double>(node, "rank_threshold");
  if (node.contains("expand_steps")) s.expand_steps = get_as<bool>(node, "expand_steps");
  if (node.contains("conjugate_directions")) s.conjugate_directions = get_as<bool>(node, "conjugate_directions");
  if (node.contains("audit")) s.audit = get_as<bool>(node, "audit");
  return s;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(doc,
                 {"experiment", "scenarios", "power", "snr_db", "seeds", "restarts", "weights", "weight_points",
                  "solver", "out", "threads"},
                 "configuration");
  ExperimentConfig cfg;
  if (!doc.contains("experiment")) throw ConfigError("'experiment' is required");
  cfg.kind = parse_kind(get_as<std::string>(doc, "experiment"));

  if (!doc.contains("scenarios") || !doc.at("scenarios").is_array()) throw ConfigError("'scenarios' must be a list");
  for (const json& node : doc.at("scenarios")) {
    if (!node.is_object()) throw ConfigError("each scenario must be an object");
    reject_unknown(node, {"name", "N", "M"}, "scenario");
    Scenario s;
    s.tx_antennas = get_as<int>(node, "N");
    s.rx_antennas = get_as<std::vector<int>>(node, "M");
    s.name = node.contains("name") ? get_as<std::string>(node, "name") : scenario_label(s);
    cfg.scenarios.push_back(std::move(s));
  }

  const bool has_power = doc.contains("power");
  const bool has_snr = doc.contains("snr_db");
  if (has_power == has_snr) throw ConfigError("give exactly one of 'power' (linear) or 'snr_db'");
  if (has_power) {
    cfg.powers = get_as<std::vector<double>>(doc, "power");
    for (double p : cfg.powers) cfg.snr_db.push_back(10.0 * std::log10(p));
  } else {
    cfg.levels_in_db = true;
    cfg.snr_db = get_as<std::vector<double>>(doc, "snr_db");
    for (double d : cfg.snr_db) cfg.powers.push_back(std::pow(10.0, d / 10.0));
  }

  if (!doc.contains("seeds")) throw ConfigError("'seeds' is required");
  const json& seeds = doc.at("seeds");
  if (seeds.is_string()) {
    cfg.seeds = parse_seed_list(seeds.get<std::string>());
  } else {
    cfg.seeds = get_as<std::vector<std::uint64_t>>(doc, "seeds");
  }

  if (doc.contains("solver")) cfg.solver = parse_solver(doc.at("solver"));
  if (doc.contains("weights")) cfg.solver.weights = get_as<std::vector<double>>(doc, "weights");
  if (doc.contains("restarts")) cfg.restarts = get_as<int>(doc, "restarts");
  if (doc.contains("weight_points")) cfg.weight_points = get_as<int>(doc, "weight_points");
  if (doc.contains("out")) cfg.out_dir = get_as<std::string>(doc, "out");
  if (doc.contains("threads")) cfg.threads = get_as<int>(doc, "threads");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json scenarios = nlohmann::ordered_json::array();
  for (const Scenario& s : cfg.scenarios) {
    scenarios.push_back(nlohmann::ordered_json{{"name", s.name}, {"N", s.tx_antennas}, {"M", s.rx_antennas}});
  }
  const SolverConfig& s = cfg.solver;
  nlohmann::ordered_json doc;
  doc["experiment"] = to_string(cfg.kind);
  doc["scenarios"] = scenarios;
  if (cfg.levels_in_db) {
    doc["snr_db"] = cfg.snr_db;
  } else {
    doc["power"] = cfg.powers;
  }
  doc["seeds"] = cfg.seeds;
  doc["restarts"] = cfg.restarts;
  doc["weights"] = s.weights;
  doc["weight_points"] = cfg.weight_points;
  doc["solver"] = {{"eps_outer", s.eps_outer},
                   {"eps_inner", s.eps_inner},
                   {"step_scale", s.step_scale},
                   {"max_outer_iters", s.max_outer_iters},
                   {"max_inner_iters", s.max_inner_iters},
                   {"max_backtracks", s.max_backtracks},
                   {"rank_threshold", s.rank_threshold},
                   {"expand_steps", s.expand_steps},
                   {"conjugate_directions", s.conjugate_directions},
                   {"audit", s.audit}};
  doc["out"] = cfg.out_dir;
  doc["threads"] = cfg.threads;
  return doc;
}

}  // namespace pareto_beam
