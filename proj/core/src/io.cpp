#include "emi/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "emi/error.hpp"

namespace emi {

void write_nodes_csv(std::ostream& os, const Scene& scene) {
  os << "global_index,x_um,y_um,domain_i,domain_j\n" << std::setprecision(17);
  for (std::size_t l = 0; l < scene.num_nodes(); ++l) {
    const auto [i, j] = scene.node_domains(l);
    os << l << ',' << scene.node(l).x() << ',' << scene.node(l).y() << ',' << i << ',' << j << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& A, double drop) {
  os << "row,col,value\n" << std::setprecision(17);
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c)
      if (std::abs(A(r, c)) > drop) os << r << ',' << c << ',' << A(r, c) << '\n';
}

void write_probes_csv(std::ostream& os, const SimulationResult& r,
                      const std::vector<std::size_t>& probes) {
  os << "t_ms,probe,node,V_mV\n" << std::setprecision(10);
  for (std::size_t k = 0; k < r.times.size(); ++k)
    for (std::size_t p = 0; p < probes.size(); ++p)
      os << r.times[k] << ',' << p << ',' << probes[p] << ','
         << r.probe_values[k][static_cast<Eigen::Index>(p)] << '\n';
}

void write_snapshots_csv(std::ostream& os, const SimulationResult& r) {
  os << "t_ms,node,V_mV";
  const Eigen::Index ns = r.snapshots.empty() ? 0 : r.snapshots.front().z.cols();
  for (Eigen::Index s = 0; s < ns; ++s) os << ",z" << s;
  os << '\n' << std::setprecision(10);
  for (const auto& snap : r.snapshots)
    for (Eigen::Index l = 0; l < snap.V.size(); ++l) {
      os << snap.t << ',' << l << ',' << snap.V[l];
      for (Eigen::Index s = 0; s < ns; ++s) os << ',' << snap.z(l, s);
      os << '\n';
    }
}

std::string scene_report(const Scene& scene) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "cells " << scene.num_cells() << "\n";
  os << "nodes " << scene.num_nodes() << " (transmembrane " << scene.num_transmembrane_nodes()
     << ", gap junction " << scene.num_gap_nodes() << ")\n";
  os << "segments " << scene.segments().size() << ", runs " << scene.runs().size() << "\n";
  os << "max parameter spacing ratio " << scene.max_param_ratio() << "\n";
  for (std::size_t i = 0; i < scene.num_domains(); ++i) {
    const auto& d = scene.domain(static_cast<int>(i));
    Point lo(INFINITY, INFINITY), hi(-INFINITY, -INFINITY);
    for (const auto g : d.global) {
      lo = lo.cwiseMin(scene.node(g));
      hi = hi.cwiseMax(scene.node(g));
    }
    os << "domain " << i << ": sigma " << scene.sigma(static_cast<int>(i)) << " mS/cm, "
       << d.size() << " nodes on " << d.curves.size() << " curve(s), bbox [" << lo.x() << ", "
       << hi.x() << "] x [" << lo.y() << ", " << hi.y() << "] um\n";
  }
  if (scene.outer()) {
    const auto [lo, hi] = scene.outer()->bounding_box();
    os << "outer boundary: " << scene.outer()->size() << " nodes, bbox [" << lo.x() << ", "
       << hi.x() << "] x [" << lo.y() << ", " << hi.y() << "] um\n";
  }
  return os.str();
}

std::string run_report(const SimulationResult& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "steps " << r.steps << "\n";
  os << "rhs evaluations " << r.rhs_evaluations << "\n";
  os << "wall time " << r.wall_seconds << " s\n";
  os << "fast spectral radius " << r.rho_fast << " 1/ms\n";
  os << "stability certificate " << (r.certificate_ok ? "ok" : "violated")
     << " (max |R_s| " << r.max_amplification << ")\n";
  os << "failed " << (r.failed ? "yes" : "no") << "\n";
  if (!r.diagnostic.empty()) os << "diagnostic " << r.diagnostic << "\n";
  os << "refresh,stages,rho_per_ms\n";
  for (std::size_t k = 0; k < r.stage_history.size(); ++k)
    os << k << ',' << r.stage_history[k] << ','
       << (k < r.rho_history.size() ? r.rho_history[k] : NAN) << "\n";
  os << "probe,activation_ms\n";
  for (std::size_t p = 0; p < r.activation.size(); ++p) os << p << ',' << r.activation[p] << "\n";
  return os.str();
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "M_target,M,e0,e1\n" << std::setprecision(10);
  for (const auto& r : rows) os << r.M_target << ',' << r.M << ',' << r.error.e0 << ',' << r.error.e1 << '\n';
}

void write_sweep_csv(std::ostream& os, const std::string& value_name,
                     const std::vector<SweepRow>& rows) {
  os << value_name << ",cv_um_per_ms,failed\n" << std::setprecision(12);
  for (const auto& r : rows) os << r.value << ',' << r.cv << ',' << (r.failed ? 1 : 0) << '\n';
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

}  // namespace emi
