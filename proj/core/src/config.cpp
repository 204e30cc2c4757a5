#include "emi/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "emi/error.hpp"

namespace emi {

namespace {

using nlohmann::json;

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "config",
             {"geometry", "conductivity", "kappa", "membrane_capacitance", "ionic", "stimulus",
              "time", "protocol", "output", "compatibility"});
  RunConfig c;

  if (root.contains("geometry")) {
    const json& g = root["geometry"];
    check_keys(g, "geometry",
               {"kind", "rows", "cols", "cell_length", "cell_width", "bath_length", "bath_width",
                "dx", "outer_dx", "junction", "radius", "inner_radius", "outer_radius", "gap",
                "fillet", "nodes", "flux_scale"});
    read(g, "kind", c.geometry_kind);
    read(g, "rows", c.array.rows);
    read(g, "cols", c.array.cols);
    read(g, "cell_length", c.array.cell_length);
    read(g, "cell_width", c.array.cell_width);
    read(g, "dx", c.array.dx);
    read(g, "outer_dx", c.array.outer_dx);
    if (g.contains("bath_length") || g.contains("bath_width")) {
      c.scale_bath = false;
      read(g, "bath_length", c.array.bath_length);
      read(g, "bath_width", c.array.bath_width);
    }
    if (g.contains("junction")) {
      const json& jn = g["junction"];
      check_keys(jn, "junction", {"shape", "amplitude", "frequency"});
      std::string shape = "flat";
      read(jn, "shape", shape);
      if (shape == "flat")
        c.array.junction.kind = JunctionShape::Kind::Flat;
      else if (shape == "sinusoid")
        c.array.junction.kind = JunctionShape::Kind::Sinusoid;
      else
        throw ConfigError("junction shape must be 'flat' or 'sinusoid'");
      read(jn, "amplitude", c.array.junction.amplitude);
      read(jn, "frequency", c.array.junction.frequency);
    }
    read(g, "radius", c.radius);
    read(g, "inner_radius", c.inner_radius);
    read(g, "outer_radius", c.outer_radius);
    read(g, "gap", c.gap);
    read(g, "fillet", c.fillet);
    read(g, "nodes", c.nodes);
    read(g, "flux_scale", c.flux_scale);
  }
  const std::vector<std::string> kinds = {"cell_array", "single_cell", "split_circle", "concentric"};
  if (std::find(kinds.begin(), kinds.end(), c.geometry_kind) == kinds.end())
    throw ConfigError("unknown geometry kind '" + c.geometry_kind + "'");

  if (root.contains("conductivity")) {
    const json& s = root["conductivity"];
    check_keys(s, "conductivity", {"extracellular", "intracellular"});
    read(s, "extracellular", c.sigma.extracellular);
    read(s, "intracellular", c.sigma.intracellular);
  }
  read(root, "kappa", c.kappa);
  read(root, "membrane_capacitance", c.capacitance);
  if (root.contains("compatibility")) {
    std::string m;
    read(root, "compatibility", m);
    if (m == "quadrature")
      c.compatibility = Compatibility::Quadrature;
    else if (m == "uniform")
      c.compatibility = Compatibility::Uniform;
    else
      throw ConfigError("compatibility must be 'quadrature' or 'uniform'");
  }

  if (root.contains("ionic")) {
    const json& io = root["ionic"];
    check_keys(io, "ionic", {"model"});
    read(io, "model", c.model);
  }
  make_model(c.model);  // validates the name

  if (root.contains("stimulus")) {
    const json& s = root["stimulus"];
    check_keys(s, "stimulus", {"amplitude", "start", "duration", "columns", "cells"});
    read(s, "amplitude", c.stim_amplitude);
    read(s, "start", c.stim_start);
    read(s, "duration", c.stim_duration);
    read(s, "columns", c.stim_columns);
    read(s, "cells", c.stim_cells);
  }
  if (root.contains("time")) {
    const json& t = root["time"];
    check_keys(t, "time",
               {"dt", "t_end", "stages", "damping", "rho_safety", "rho_refresh", "max_stages",
                "strang", "seed", "cv_floor"});
    read(t, "dt", c.stepper.dt);
    read(t, "t_end", c.t_end);
    read(t, "stages", c.stepper.stages);
    read(t, "damping", c.stepper.damping);
    read(t, "rho_safety", c.stepper.rho_safety);
    read(t, "rho_refresh", c.stepper.rho_refresh);
    read(t, "max_stages", c.stepper.max_stages);
    read(t, "strang", c.stepper.strang);
    read(t, "seed", c.stepper.seed);
    read(t, "cv_floor", c.cv_floor);
  }
  if (root.contains("protocol")) {
    const json& p = root["protocol"];
    check_keys(p, "protocol", {"threshold", "pairs", "p_offset", "q_offset", "reference_columns"});
    read(p, "threshold", c.protocol.threshold);
    read(p, "pairs", c.protocol.pairs);
    read(p, "p_offset", c.protocol.p_offset);
    read(p, "q_offset", c.protocol.q_offset);
    read(p, "reference_columns", c.protocol.reference_columns);
  }
  if (root.contains("output")) {
    const json& o = root["output"];
    check_keys(o, "output", {"record_every", "snapshot_times", "probes"});
    read(o, "record_every", c.record_every);
    read(o, "snapshot_times", c.snapshot_times);
    read(o, "probes", c.probes);
  }

  if (!(c.stepper.dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (!(c.kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(c.capacitance > 0.0)) throw ConfigError("membrane_capacitance must be positive");
  if (!(c.sigma.extracellular > 0.0) || !(c.sigma.intracellular > 0.0))
    throw ConfigError("conductivities must be positive");
  if (c.t_end < 0.0) throw ConfigError("time.t_end must be nonnegative");
  if (c.record_every < 1) throw ConfigError("output.record_every must be at least 1");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CVSetup to_cv_setup(const RunConfig& cfg) {
  if (cfg.geometry_kind != "cell_array")
    throw ConfigError("conduction velocity needs a cell_array geometry");
  CVSetup s;
  s.array = cfg.array;
  s.scale_bath = cfg.scale_bath;
  s.sigma = cfg.sigma;
  s.kappa = cfg.kappa;
  s.capacitance = cfg.capacitance;
  s.model = cfg.model;
  s.stim_amplitude = cfg.stim_amplitude;
  s.stim_start = cfg.stim_start;
  s.stim_duration = cfg.stim_duration;
  s.stim_columns = cfg.stim_columns;
  s.stepper = cfg.stepper;
  s.t_end = cfg.t_end;
  s.cv_floor = cfg.cv_floor;
  s.compatibility = cfg.compatibility;
  s.protocol = cfg.protocol;
  return s;
}

Scene build_scene(const RunConfig& cfg) {
  if (cfg.geometry_kind == "cell_array")
    return build_cell_array(cfg.scale_bath ? with_scaled_bath(cfg.array) : cfg.array, cfg.sigma);
  if (cfg.geometry_kind == "single_cell")
    return build_single_cell(cfg.radius, cfg.outer_radius, cfg.nodes, cfg.sigma);
  if (cfg.geometry_kind == "split_circle")
    return build_split_circle(cfg.radius, cfg.outer_radius, cfg.gap, cfg.fillet, cfg.nodes,
                              cfg.sigma);
  return build_concentric_cells(cfg.inner_radius, cfg.radius, cfg.outer_radius, cfg.nodes,
                                cfg.sigma);
}

std::vector<std::size_t> stimulus_targets(const Scene& scene, const RunConfig& cfg) {
  std::vector<int> cells = cfg.stim_cells;
  if (cells.empty()) {
    if (cfg.geometry_kind == "cell_array") {
      for (int c = 0; c < cfg.stim_columns; ++c)
        for (int r = 0; r < cfg.array.rows; ++r) cells.push_back(1 + r * cfg.array.cols + c);
    } else {
      cells.push_back(1);
    }
  }
  std::vector<std::size_t> out;
  for (int cell : cells) {
    if (cell < 1 || cell > static_cast<int>(scene.num_cells()))
      throw ConfigError("stimulated cell " + std::to_string(cell) + " does not exist");
    const auto nodes = scene.cell_membrane_nodes(cell);
    out.insert(out.end(), nodes.begin(), nodes.end());
  }
  return out;
}

}  // namespace emi
