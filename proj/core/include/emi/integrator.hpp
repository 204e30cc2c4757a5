#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "emi/coupling.hpp"
#include "emi/ionic.hpp"

namespace emi {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct MembraneState {
  Eigen::VectorXd V;  // mV per transmembrane node
  Eigen::MatrixXd z;  // nodes x states
  double t = 0.0;     // ms
};

/// C_m V' = Psi(V) - I_ion - I_stim, z' = g, split into the stiff linear part
/// f_F = Psi(V)/C_m and the ionic part f_S.
struct SplitRHS {
  LinearMap psi;
  const IonicModel* model = nullptr;
  const Stimulus* stimulus = nullptr;
  double capacitance = 1.0;  // uF/cm^2

  Eigen::VectorXd fast(const Eigen::VectorXd& V) const { return psi(V) / capacitance; }
  /// f_S: (dV, dz).
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> slow(const MembraneState& s) const;
};

struct StepperConfig {
  double dt = 0.01;          // ms
  int stages = 0;            // 0 selects the stage count from the spectral radius
  double damping = 0.05;
  double rho_safety = 1.2;
  int rho_refresh = 50;      // steps between refreshes of the ionic bound
  int max_stages = 10000;
  bool strang = false;       // Strang splitting instead of one combined RKC step
  std::uint64_t seed = 12345;
};

struct RadiusEstimate {
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power iteration for the spectral radius of a linear map on R^dim.
RadiusEstimate estimate_spectral_radius(const LinearMap& map, std::size_t dim,
                                        std::uint64_t seed = 12345, double tol = 1e-4,
                                        int max_iterations = 1000);

/// Stage count covering dt * rho: ceil(sqrt(dt rho safety / 0.65)) + 1.
int rkc_stage_count(double dt_rho, double safety, int max_stages);

/// Damped Chebyshev stability polynomial T_s(w0 + w1 z) / T_s(w0).
double rkc_stability(int s, double damping, double z);

/// Left end of the real stability interval of the damped method, (1 + w0) / w1.
double rkc_stability_bound(int s, double damping);

/// One first-order RKC step of y' = f(t, y) for a vector state.
Eigen::VectorXd rkc_advance(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                            double t, const Eigen::VectorXd& y, double dt, int s, double damping);

struct StepInfo {
  int stages = 0;
  int evaluations = 0;
  double rho = 0.0;
  double amplification = 0.0;  // |R_s(-dt rho)|
};

/// Advances the membrane state by one step of the combined (or split) scheme.
MembraneState rkc_step(const MembraneState& state, const SplitRHS& rhs, const StepperConfig& cfg,
                       double rho_fast, double rho_slow, StepInfo* info = nullptr);

/// Bound on |d f_S / d(V, z)| over the nodes, from a finite-difference
/// Jacobian diagonal.
double slow_radius(const SplitRHS& rhs, const MembraneState& state);

struct SimulationOptions {
  std::vector<std::size_t> probes;       // transmembrane node indices
  double threshold = -20.0;              // mV, activation threshold
  int record_every = 1;                  // steps between probe records
  std::vector<double> snapshot_times;    // full-state snapshots
  bool stop_when_activated = false;      // end once every probe has crossed
};

struct Snapshot {
  double t = 0.0;
  Eigen::VectorXd V;
  Eigen::MatrixXd z;
};

struct SimulationResult {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> probe_values;  // V at probes per record
  std::vector<double> activation;             // NaN when never crossed
  std::vector<Snapshot> snapshots;
  std::vector<int> stage_history;             // one entry per refresh
  std::vector<double> rho_history;
  double rho_fast = 0.0;
  bool certificate_ok = true;                 // |R_s| <= 1 on every step
  double max_amplification = 0.0;
  long steps = 0;
  long rhs_evaluations = 0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string diagnostic;
  MembraneState final_state;
};

/// Integrates the coupled system from the model rest state up to t_end.
SimulationResult simulate(const CoupledSystem& system, const IonicModel& model,
                          const Stimulus& stim, double capacitance, double t_end,
                          const StepperConfig& cfg, const SimulationOptions& opts);

/// Same, from an explicit initial state.
SimulationResult simulate(const SplitRHS& rhs, MembraneState initial, double t_end,
                          const StepperConfig& cfg, const SimulationOptions& opts);

}  // namespace emi
