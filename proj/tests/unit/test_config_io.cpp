#include <sstream>
#include <string>

#include "doctest.h"
#include "emi/config.hpp"
#include "emi/error.hpp"
#include "emi/io.hpp"

using namespace emi;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults describe the conduction study") {
  const auto c = parse_config("{}");
  CHECK(c.geometry_kind == "cell_array");
  CHECK(c.array.rows == 2);
  CHECK(c.array.cols == 30);
  CHECK(c.kappa == 690.0);
  CHECK(c.sigma.extracellular == 20.0);
  CHECK(c.sigma.intracellular == 3.0);
  CHECK(c.stim_amplitude == -300.0);
  CHECK(c.compatibility == Compatibility::Quadrature);
}

TEST_CASE("fields are read") {
  const auto c = parse_config(R"({
    "geometry": {"kind": "cell_array", "rows": 1, "cols": 4, "dx": 5,
                 "junction": {"shape": "sinusoid", "amplitude": 0.5, "frequency": 3}},
    "conductivity": {"intracellular": 6},
    "kappa": 345,
    "ionic": {"model": "fitzhugh_nagumo"},
    "stimulus": {"amplitude": -40, "duration": 2, "cells": [1]},
    "time": {"dt": 0.01, "t_end": 5, "strang": true},
    "protocol": {"pairs": 3},
    "output": {"probes": [0, 7], "snapshot_times": [1, 2]},
    "compatibility": "uniform"
  })");
  CHECK(c.array.cols == 4);
  CHECK(c.array.dx == 5.0);
  CHECK(c.array.junction.kind == JunctionShape::Kind::Sinusoid);
  CHECK(c.sigma.intracellular == 6.0);
  CHECK(c.kappa == 345.0);
  CHECK(c.model == "fitzhugh_nagumo");
  CHECK(c.stim_cells == std::vector<int>{1});
  CHECK(c.stepper.strang);
  CHECK(c.protocol.pairs == 3);
  CHECK(c.probes.size() == 2);
  CHECK(c.compatibility == Compatibility::Uniform);
  const auto scene = build_scene(c);
  CHECK(scene.num_cells() == 4);
  CHECK(stimulus_targets(scene, c) == scene.cell_membrane_nodes(1));
  CHECK(to_cv_setup(c).kappa == 345.0);
}

TEST_CASE("bad configs are rejected") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kapa": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"geometry": {"kind": "hexagon"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"geometry": {"rows": "two"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"time": {"dt": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kappa": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"ionic": {"model": "hodgkin_huxley"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"compatibility": "none"})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  const auto c = parse_config(R"({"geometry": {"kind": "split_circle"}})");
  CHECK_THROWS_AS(to_cv_setup(c), ConfigError);
}

TEST_CASE("csv outputs carry unit headers") {
  const auto s = build_split_circle(2, 4, 0, 0, 32);
  std::ostringstream nodes;
  write_nodes_csv(nodes, s);
  CHECK(first_line(nodes.str()) == "global_index,x_um,y_um,domain_i,domain_j");
  std::size_t lines = 0;
  for (char ch : nodes.str()) lines += ch == '\n';
  CHECK(lines == s.num_nodes() + 1);

  std::ostringstream conv;
  write_convergence_csv(conv, {{64, 64, {1e-3, 2e-2}}});
  CHECK(first_line(conv.str()) == "M_target,M,e0,e1");

  SimulationResult r;
  r.times = {0.0, 0.1};
  r.probe_values = {Eigen::VectorXd::Constant(1, -80.0), Eigen::VectorXd::Constant(1, -79.0)};
  std::ostringstream probes;
  write_probes_csv(probes, r, {3});
  CHECK(first_line(probes.str()) == "t_ms,probe,node,V_mV");
  CHECK(probes.str().find("0.1,0,3,-79") != std::string::npos);

  r.snapshots.push_back({1.0, Eigen::VectorXd::Constant(2, -80.0), Eigen::MatrixXd::Ones(2, 1)});
  std::ostringstream snaps;
  write_snapshots_csv(snaps, r);
  CHECK(first_line(snaps.str()) == "t_ms,node,V_mV,z0");

  std::ostringstream m;
  write_matrix_csv(m, Eigen::Matrix2d::Identity());
  CHECK(m.str() == "row,col,value\n0,0,1\n1,1,1\n");
  CHECK(scene_report(s).find("cells 2") != std::string::npos);
  CHECK(run_report(r).find("refresh,stages,rho_per_ms") != std::string::npos);
}

}  // TEST_SUITE
