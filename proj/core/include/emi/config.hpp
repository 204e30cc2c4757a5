#pragma once

#include <string>
#include <vector>

#include "emi/geometry.hpp"
#include "emi/harness.hpp"
#include "emi/integrator.hpp"

namespace emi {

/// Run description read from a JSON file. All values are in the internal
/// units: um, ms, mV, mS/cm (conductivity), mS/cm^2 (kappa), uF/cm^2, uA/cm^2.
///
///   {
///     "geometry": {"kind": "cell_array", "rows": 2, "cols": 10, "cell_length": 100,
///                  "cell_width": 20, "dx": 10,
///                  "junction": {"shape": "sinusoid", "amplitude": 0.5, "frequency": 3}},
///     "conductivity": {"extracellular": 20, "intracellular": 3},
///     "kappa": 690, "membrane_capacitance": 1,
///     "ionic": {"model": "mitchell_schaeffer"},
///     "stimulus": {"amplitude": -300, "start": 0, "duration": 1, "columns": 1},
///     "time": {"dt": 0.02, "t_end": 40},
///     "protocol": {"threshold": -20},
///     "output": {"record_every": 10, "snapshot_times": [5, 10]}
///   }
///
/// Geometry kinds other than cell_array ("single_cell", "split_circle",
/// "concentric") describe small test scenes and are used by `simulate`.
struct RunConfig {
  std::string geometry_kind = "cell_array";
  CellArraySpec array;
  bool scale_bath = true;  // ignored when bath_length or bath_width are given
  // Disc settings.
  double radius = 2.0;
  double inner_radius = 1.0;
  double outer_radius = 4.0;
  double gap = 0.0;
  double fillet = 0.0;
  std::size_t nodes = 128;
  double flux_scale = 1e4;

  Conductivities sigma;
  double kappa = 690.0;
  double capacitance = 1.0;
  std::string model = "mitchell_schaeffer";
  Compatibility compatibility = Compatibility::Quadrature;

  double stim_amplitude = -300.0;
  double stim_start = 0.0;
  double stim_duration = 1.0;
  int stim_columns = 1;
  std::vector<int> stim_cells;  // overrides stim_columns when non-empty

  StepperConfig stepper;
  double t_end = 0.0;
  double cv_floor = 20.0;
  CVProtocol protocol;

  int record_every = 1;
  std::vector<double> snapshot_times;
  std::vector<std::size_t> probes;  // transmembrane nodes for `simulate`
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// CV setup of a cell-array configuration.
CVSetup to_cv_setup(const RunConfig& cfg);

/// Scene described by the configuration.
Scene build_scene(const RunConfig& cfg);

/// Stimulus targets (transmembrane node indices) for the configuration.
std::vector<std::size_t> stimulus_targets(const Scene& scene, const RunConfig& cfg);

}  // namespace emi
