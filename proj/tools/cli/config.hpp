#pragma once

// JSON run configuration for the command-line tool.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoon/graph.hpp"
#include "platoon/risk.hpp"
#include "platoon/sim.hpp"

namespace platoon::cli {

/// Schema violation: malformed JSON, unknown keys, wrong types, bad values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string topology = "complete";
  int n = 5;
  double k = 2.222;
  int p = 1;
  double k0 = 1.0;
  double gamma = 0.0;
  double k_star = 1.0;
  double b = 0.0;
  double edge_probability = 0.5;
  std::uint64_t graph_seed = 1;
  std::vector<Edge> edges;
  double gain_scale = 1.0;
  double beta = 2.2;
  double tau = 0.1;
  double g = 2.78;
  double d = 1.0;
};

struct SweepConfig {
  std::string variable;
  std::vector<double> values;
};

struct FitConfig {
  int m1 = 100;
  int m2 = 80;
};

struct SimulateConfig {
  double dt = 1e-3;
  double T = 2500.0;
  std::optional<double> burn_in = 10.0;
  std::optional<int> stride;
  int replicas = 4;
  double initial_offset = 0.0;
};

struct RunConfig {
  ModelConfig model;
  std::vector<EventSpec> events;
  std::optional<std::vector<double>> split;
  SweepConfig sweep;
  FitConfig fit;
  SimulateConfig simulate;
  std::uint64_t seed = 0;
};

/// Parses and validates a configuration document. Missing sections take the
/// defaults above; events default to collision (c=1, eps=0.01) and
/// detachment (a=2, h=1, eps=0.05).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
RunConfig default_config();

/// Graph described by the model section, with gain_scale applied.
WeightedGraph build_graph(const ModelConfig& m);
PlatoonModel build_model(const ModelConfig& m);

/// Alternating +offset, -offset, ... initial displacement from the target spacing.
InitialState initial_state(const RunConfig& cfg);

}  // namespace platoon::cli
