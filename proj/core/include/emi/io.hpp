#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "emi/geometry.hpp"
#include "emi/harness.hpp"
#include "emi/integrator.hpp"

namespace emi {

/// global_index,x_um,y_um,domain_i,domain_j
void write_nodes_csv(std::ostream& os, const Scene& scene);

/// row,col,value for every entry with |value| > drop.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& A, double drop = 0.0);

/// t_ms,probe,node,V_mV
void write_probes_csv(std::ostream& os, const SimulationResult& r,
                      const std::vector<std::size_t>& probes);

/// t_ms,node,V_mV,z0,z1,...
void write_snapshots_csv(std::ostream& os, const SimulationResult& r);

/// Node and segment counts, bounding boxes and conductivities.
std::string scene_report(const Scene& scene);

/// Stage and spectral-radius history, work counters and wall time.
std::string run_report(const SimulationResult& r);

/// M_target,M,e0,e1
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

/// value,cv_um_per_ms,failed
void write_sweep_csv(std::ostream& os, const std::string& value_name,
                     const std::vector<SweepRow>& rows);

/// Writes `text` to `path`, throwing on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace emi
