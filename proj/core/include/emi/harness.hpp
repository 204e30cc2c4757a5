#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "emi/coupling.hpp"
#include "emi/geometry.hpp"
#include "emi/integrator.hpp"
#include "emi/ionic.hpp"

namespace emi {

struct ErrorPair {
  double e0 = 0.0;  // quotient-norm error of the Dirichlet data
  double e1 = 0.0;  // L2 error of the Neumann data
};

/// sqrt(sum w (a - b)^2).
double weighted_l2_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& w);
/// Same after removing the weighted mean of a - b.
double quotient_l2_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& w);

/// Quadrature weights of the boundary of domain i in local order.
Eigen::VectorXd boundary_weights(const Scene& scene, int domain);

/// The four test settings: disc in an annular bath (a), disc split by a
/// junction (b), two separated half-discs (c), and the same with rounded
/// corners (d).
enum class ConvergenceGeometry { Disc, SplitDisc, SeparatedHalves, RoundedHalves };

ConvergenceGeometry parse_convergence_geometry(const std::string& name);  // "a".."d"
std::string to_string(ConvergenceGeometry g);

/// Scene of the given setting with about M membrane-plus-junction nodes.
Scene convergence_scene(ConvergenceGeometry g, std::size_t M, const Conductivities& sigma = {});

struct ConvergenceRow {
  std::size_t M_target = 0;
  std::size_t M = 0;  // actual node count
  ErrorPair error;
};

struct ConvergenceOptions {
  Conductivities sigma;
  double kappa = 1.0;
  int reference_factor = 4;  // reference M for c/d relative to the finest M
  std::size_t reference_M = 0;  // overrides reference_factor when nonzero
  Compatibility compatibility = Compatibility::Quadrature;
};

/// Errors of the recovered traces and fluxes against the exact pair (a, b)
/// or a fine reference (c, d).
std::vector<ConvergenceRow> run_convergence(ConvergenceGeometry g,
                                            const std::vector<std::size_t>& M_list,
                                            const ConvergenceOptions& opts = {});

/// Least-squares slope of log y against log x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

struct CVProtocol {
  double threshold = -20.0;  // mV
  int pairs = 5;
  double p_offset = 7.5;     // in cell lengths at 30 columns
  double q_offset = 17.5;
  double reference_columns = 30.0;  // probe positions scale with cols / reference_columns
};

struct CVSetup {
  CellArraySpec array;
  Conductivities sigma;
  double kappa = 690.0;        // mS/cm^2
  double capacitance = 1.0;    // uF/cm^2
  std::string model = "mitchell_schaeffer";
  double stim_amplitude = -300.0;  // uA/cm^2
  double stim_start = 0.0;
  double stim_duration = 1.0;
  int stim_columns = 1;        // leftmost columns receiving the stimulus
  StepperConfig stepper;
  double t_end = 0.0;          // 0 derives the horizon from cv_floor
  double cv_floor = 20.0;      // um/ms, slowest propagation still counted
  bool mirrored = false;       // stimulate the right end and probe right to left
  bool scale_bath = true;      // bath keeps the reference margins around the block
  Compatibility compatibility = Compatibility::Quadrature;
  CVProtocol protocol;
};

/// Bath dimensions keeping the 440 x 5000 um bath of a 2 x 30 block in proportion.
CellArraySpec with_scaled_bath(CellArraySpec spec);

struct CVProbes {
  std::vector<Point> p, q;
  std::vector<std::size_t> p_node, q_node;
  std::vector<double> snap_distance;  // p then q
};

CVProbes cv_probes(const Scene& scene, const CVSetup& setup);

struct CVResult {
  double cv = 0.0;           // um/ms (= mm/s), NaN on failure
  std::vector<double> cv_pairs;
  std::vector<double> t_p, t_q;
  bool failed = false;
  std::string diagnostic;
  CVProbes probes;
  std::size_t nodes = 0;
  double t_end = 0.0;
  SimulationResult simulation;

  double cv_m_per_s() const { return cv * 1e-3; }
};

CVResult run_cv(const CVSetup& setup);

/// (CV - CV_ref) / CV_ref.
double relative_cv_error(double cv, double cv_ref);

/// Paper's CV of the 2 x 30 array with a detailed atrial model, m/s. Kept for
/// reference only; the ionic model here differs.
inline constexpr double kReferenceCvAtrial = 1.27153;

enum class SweepKind { Kappa, SigmaI, DiscFrequency, DiscAmplitude, CellLength, CellWidth, CellArea };

SweepKind parse_sweep_kind(const std::string& name);
std::string to_string(SweepKind k);
/// Setup for one sweep value. cell_area takes the value as c_l with c_w = c_l / 10.
CVSetup apply_sweep_value(const CVSetup& base, SweepKind kind, double value);

struct SweepRow {
  double value = 0.0;
  double cv = 0.0;  // um/ms
  bool failed = false;
  std::string diagnostic;
};

std::vector<SweepRow> run_sweep(SweepKind kind, const std::vector<double>& values,
                                const CVSetup& base);

/// True when the finite CVs are nondecreasing (sign = 1) or nonincreasing
/// (sign = -1) along the rows and no row failed.
bool monotone(const std::vector<SweepRow>& rows, int sign);

}  // namespace emi
