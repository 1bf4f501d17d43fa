#include "cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace platoon::cli {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        throw ConfigError(where + "." + key + " must be non-negative");
      }
    }
  } else {
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  }
  out = v.get<T>();
}

void parse_model(const json& j, ModelConfig& m) {
  check_keys(j,
             {"topology", "n", "k", "p", "k0", "gamma", "k_star", "b", "edge_probability",
              "graph_seed", "edges", "gain_scale", "beta", "tau", "g", "d"},
             "model");
  read(j, "topology", m.topology, "model");
  read(j, "n", m.n, "model");
  read(j, "k", m.k, "model");
  read(j, "p", m.p, "model");
  read(j, "k0", m.k0, "model");
  read(j, "gamma", m.gamma, "model");
  read(j, "k_star", m.k_star, "model");
  read(j, "b", m.b, "model");
  read(j, "edge_probability", m.edge_probability, "model");
  read(j, "graph_seed", m.graph_seed, "model");
  read(j, "gain_scale", m.gain_scale, "model");
  read(j, "beta", m.beta, "model");
  read(j, "tau", m.tau, "model");
  read(j, "g", m.g, "model");
  read(j, "d", m.d, "model");
  static const std::set<std::string> topologies = {"complete", "path",   "p_cycle", "spatial",
                                                   "perturbed_complete", "random", "edges"};
  if (!topologies.count(m.topology)) throw ConfigError("unknown topology '" + m.topology + "'");
  if (j.contains("edges")) {
    const json& e = j.at("edges");
    if (!e.is_array()) throw ConfigError("model.edges must be an array of [i, j, weight]");
    for (const auto& item : e) {
      if (!item.is_array() || item.size() != 3 || !item[0].is_number_integer() ||
          !item[1].is_number_integer() || !item[2].is_number()) {
        throw ConfigError("model.edges entries must be [i, j, weight]");
      }
      m.edges.push_back({item[0].get<int>(), item[1].get<int>(), item[2].get<double>()});
    }
  }
  if (m.topology == "edges" && m.edges.empty()) throw ConfigError("topology 'edges' needs model.edges");
  if (!(m.beta > 0.0)) throw ConfigError("model.beta must be positive");
  if (!(m.tau >= 0.0)) throw ConfigError("model.tau must be non-negative");
  if (!(m.d > 0.0)) throw ConfigError("model.d must be positive");
  if (!(m.gain_scale > 0.0)) throw ConfigError("model.gain_scale must be positive");
}

EventSpec parse_event(const json& j, double d) {
  check_keys(j, {"kind", "c", "a", "h", "eps"}, "events[]");
  std::string kind;
  read(j, "kind", kind, "events[]");
  EventSpec s;
  s.d = d;
  read(j, "eps", s.eps, "events[]");
  if (kind == "collision") {
    if (j.contains("a") || j.contains("h")) throw ConfigError("collision events take c and eps only");
    s.kind = EventKind::Collision;
    read(j, "c", s.c, "events[]");
  } else if (kind == "detachment") {
    if (j.contains("c")) throw ConfigError("detachment events take a, h and eps only");
    s.kind = EventKind::Detachment;
    read(j, "a", s.a, "events[]");
    read(j, "h", s.h, "events[]");
  } else {
    throw ConfigError("events[].kind must be 'collision' or 'detachment'");
  }
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid event: ") + e.what());
  }
  return s;
}

void parse_sweep(const json& j, SweepConfig& s) {
  check_keys(j, {"variable", "values", "from", "to", "steps"}, "sweep");
  read(j, "variable", s.variable, "sweep");
  static const std::set<std::string> variables = {"tau", "n", "p", "gamma", "b", "gain_scale"};
  if (!variables.count(s.variable)) throw ConfigError("unknown sweep variable '" + s.variable + "'");
  if (j.contains("values")) {
    if (j.contains("from") || j.contains("to") || j.contains("steps")) {
      throw ConfigError("sweep takes either values or from/to/steps");
    }
    if (!j.at("values").is_array()) throw ConfigError("sweep.values must be an array");
    for (const auto& v : j.at("values")) {
      if (!v.is_number()) throw ConfigError("sweep.values must be numbers");
      s.values.push_back(v.get<double>());
    }
  } else if (j.contains("from") || j.contains("to") || j.contains("steps")) {
    double from = 0.0;
    double to = 0.0;
    int steps = 0;
    if (!j.contains("from") || !j.contains("to") || !j.contains("steps")) {
      throw ConfigError("sweep range needs from, to and steps");
    }
    read(j, "from", from, "sweep");
    read(j, "to", to, "sweep");
    read(j, "steps", steps, "sweep");
    if (steps < 0) throw ConfigError("sweep.steps must be non-negative");
    for (int i = 0; i < steps; ++i) {
      s.values.push_back(steps == 1 ? from : from + (to - from) * i / (steps - 1));
    }
  }
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.events.push_back(EventSpec::collision(cfg.model.d, 1.0, 0.01));
  cfg.events.push_back(EventSpec::detachment(cfg.model.d, 2.0, 1.0, 0.05));
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, {"seed", "model", "events", "joint", "sweep", "fit", "simulate"}, "config");

  RunConfig cfg;
  try {
    read(root, "seed", cfg.seed, "config");
    if (root.contains("model")) parse_model(root.at("model"), cfg.model);

    if (root.contains("events")) {
      if (!root.at("events").is_array()) throw ConfigError("events must be an array");
      for (const auto& e : root.at("events")) cfg.events.push_back(parse_event(e, cfg.model.d));
    } else {
      cfg.events = default_config().events;
      for (auto& e : cfg.events) e.d = cfg.model.d;
    }

    if (root.contains("joint")) {
      const json& j = root.at("joint");
      check_keys(j, {"split"}, "joint");
      if (j.contains("split")) {
        if (!j.at("split").is_array()) throw ConfigError("joint.split must be an array");
        std::vector<double> split;
        for (const auto& v : j.at("split")) {
          if (!v.is_number()) throw ConfigError("joint.split must be numbers");
          split.push_back(v.get<double>());
        }
        cfg.split = split;
      }
    }

    if (root.contains("sweep")) parse_sweep(root.at("sweep"), cfg.sweep);

    if (root.contains("fit")) {
      const json& j = root.at("fit");
      check_keys(j, {"m1", "m2"}, "fit");
      read(j, "m1", cfg.fit.m1, "fit");
      read(j, "m2", cfg.fit.m2, "fit");
    }

    if (root.contains("simulate")) {
      const json& j = root.at("simulate");
      check_keys(j, {"dt", "T", "burn_in", "stride", "replicas", "initial_offset"}, "simulate");
      auto& s = cfg.simulate;
      read(j, "dt", s.dt, "simulate");
      read(j, "T", s.T, "simulate");
      if (j.contains("burn_in")) {
        double b = 0.0;
        read(j, "burn_in", b, "simulate");
        s.burn_in = b;
      }
      if (j.contains("stride")) {
        int st = 0;
        read(j, "stride", st, "simulate");
        s.stride = st;
      }
      read(j, "replicas", s.replicas, "simulate");
      read(j, "initial_offset", s.initial_offset, "simulate");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

WeightedGraph build_graph(const ModelConfig& m) {
  WeightedGraph g = [&m] {
    if (m.topology == "complete") return make_complete(m.n, m.k);
    if (m.topology == "path") return make_path(m.n, m.k);
    if (m.topology == "p_cycle") return make_p_cycle(m.n, m.k, m.p);
    if (m.topology == "spatial") return make_spatial(m.n, m.k0, m.gamma);
    if (m.topology == "perturbed_complete") return make_perturbed_complete(m.n, m.k_star, m.b, m.graph_seed);
    if (m.topology == "random") return make_random_connected(m.n, m.edge_probability, m.k, m.graph_seed);
    return WeightedGraph::from_edges(m.n, m.edges);
  }();
  return m.gain_scale == 1.0 ? g : g.scaled(m.gain_scale);
}

PlatoonModel build_model(const ModelConfig& m) {
  return PlatoonModel{build_graph(m), m.beta, m.tau, m.g, m.d};
}

InitialState initial_state(const RunConfig& cfg) {
  InitialState init;
  if (cfg.simulate.initial_offset != 0.0) {
    for (int i = 0; i < cfg.model.n; ++i) {
      init.offset.push_back(i % 2 == 0 ? cfg.simulate.initial_offset : -cfg.simulate.initial_offset);
    }
  }
  return init;
}

}  // namespace platoon::cli
