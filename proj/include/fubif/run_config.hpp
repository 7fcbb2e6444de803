#pragma once

// Flat key-value run configuration shared by the CLI commands. Values come
// from a JSON config file plus flag overrides; unknown keys are rejected and
// everything is validated before any computation starts.

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fubif/data.hpp"
#include "fubif/errors.hpp"
#include "fubif/forest.hpp"

namespace fubif {

struct RunConfig {
  std::string family = "eif";
  double quad_lambda = 1.0;
  std::vector<int> nn_hidden_widths;  // empty = auto [max(8,d), max(8,d)]
  std::string threshold_kind = "uniform";
  double eta = 1.5;
  int n_trees = 100;
  int subsample = 256;
  std::string max_depth = "auto";  // "auto" or a positive integer
  std::uint64_t seed = 1;
  std::string scenario = "I";
  double contamination = 0.1;
  int runs = 10;

  void validate() const {
    parse_family(family);
    parse_threshold_kind(threshold_kind);
    parse_scenario(scenario);
    if (!(quad_lambda > 0.0)) throw ConfigError("quad_lambda must be > 0");
    for (int w : nn_hidden_widths)
      if (w <= 0) throw ConfigError("nn_hidden_widths entries must be positive");
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
    if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (subsample < 2) throw ConfigError("subsample must be >= 2");
    if (max_depth != "auto") {
      const int v = parsed_max_depth().value_or(0);
      if (v < 1) throw ConfigError("max_depth must be 'auto' or a positive integer");
    }
    if (!(contamination > 0.0 && contamination < 1.0))
      throw ConfigError("contamination must be in (0, 1)");
    if (runs < 1) throw ConfigError("runs must be >= 1");
  }

  std::optional<int> parsed_max_depth() const {
    if (max_depth == "auto") return std::nullopt;
    try {
      std::size_t used = 0;
      const int v = std::stoi(max_depth, &used);
      if (used != max_depth.size()) return 0;
      return v;
    } catch (...) {
      return 0;
    }
  }

  ForestConfig forest_config() const {
    ForestConfig cfg;
    cfg.family.family = parse_family(family);
    cfg.family.quad_lambda = quad_lambda;
    cfg.family.nn_hidden_widths = nn_hidden_widths;
    cfg.threshold_kind = parse_threshold_kind(threshold_kind);
    cfg.eta = eta;
    cfg.n_trees = n_trees;
    cfg.subsample_size = subsample;
    cfg.max_depth = parsed_max_depth();
    cfg.master_seed = seed;
    return cfg;
  }

  Scenario scenario_enum() const { return parse_scenario(scenario); }
};

// Applies a parsed JSON object onto a config; rejects unknown keys.
inline void apply_json_config(RunConfig& config, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "family") config.family = value.get<std::string>();
      else if (key == "quad_lambda") config.quad_lambda = value.get<double>();
      else if (key == "nn_hidden_widths") config.nn_hidden_widths = value.get<std::vector<int>>();
      else if (key == "threshold_kind") config.threshold_kind = value.get<std::string>();
      else if (key == "eta") config.eta = value.get<double>();
      else if (key == "n_trees") config.n_trees = value.get<int>();
      else if (key == "subsample") config.subsample = value.get<int>();
      else if (key == "max_depth") {
        if (value.is_string()) config.max_depth = value.get<std::string>();
        else config.max_depth = std::to_string(value.get<int>());
      }
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "scenario") config.scenario = value.get<std::string>();
      else if (key == "contamination") config.contamination = value.get<double>();
      else if (key == "runs") config.runs = value.get<int>();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + key + "' has the wrong type");
    }
  }
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  RunConfig config;
  apply_json_config(config, j);
  config.validate();
  return config;
}

}  // namespace fubif
