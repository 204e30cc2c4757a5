// Command line front end: convergence studies, simulations, CV measurements,
// parameter sweeps and scene exports.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "emi/config.hpp"
#include "emi/coupling.hpp"
#include "emi/error.hpp"
#include "emi/harness.hpp"
#include "emi/io.hpp"

namespace {

using namespace emi;

constexpr int kAssertionFailed = 2;

// Sweep value column with its unit.
std::string sweep_column(SweepKind k) {
  switch (k) {
    case SweepKind::Kappa: return "kappa_mS_per_cm2";
    case SweepKind::SigmaI: return "sigma_i_mS_per_cm";
    case SweepKind::DiscFrequency: return "disc_freq_periods";
    case SweepKind::DiscAmplitude: return "disc_amp_um";
    case SweepKind::CellLength: return "cell_length_um";
    case SweepKind::CellWidth: return "cell_width_um";
    case SweepKind::CellArea: return "cell_length_um_at_aspect_10";
  }
  return to_string(k);
}

// Writes to the file when a path is given, else to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct ConvergeArgs {
  std::string geometry = "a";
  std::vector<std::size_t> M = {16, 32, 64};
  int ref_factor = 4;
  std::string compatibility = "quadrature";
  std::string output;
  bool report = false;
  double expect_e0 = NAN, expect_e1 = NAN, slope_tol = 0.3;
};

Compatibility parse_compat(const std::string& s) {
  if (s == "quadrature") return Compatibility::Quadrature;
  if (s == "uniform") return Compatibility::Uniform;
  throw ConfigError("compatibility must be 'quadrature' or 'uniform'");
}

int run_converge(const ConvergeArgs& a) {
  ConvergenceOptions opts;
  opts.reference_factor = a.ref_factor;
  opts.compatibility = parse_compat(a.compatibility);
  const auto rows = run_convergence(parse_convergence_geometry(a.geometry), a.M, opts);
  Output out(a.output);
  write_convergence_csv(out.stream(), rows);

  std::vector<double> x, e0, e1;
  for (const auto& r : rows) {
    x.push_back(static_cast<double>(r.M_target));
    e0.push_back(r.error.e0);
    e1.push_back(r.error.e1);
  }
  double s0 = NAN, s1 = NAN;
  if (rows.size() >= 2) {
    try {
      s0 = fit_slope(x, e0);
      s1 = fit_slope(x, e1);
    } catch (const DomainError&) {
      // an error of exactly zero has no logarithm
    }
  }
  if (a.report)
    std::cerr << "geometry " << a.geometry << ": e0 slope " << s0 << ", e1 slope " << s1 << "\n";
  bool ok = true;
  if (!std::isnan(a.expect_e0) && !(std::abs(s0 - a.expect_e0) <= a.slope_tol)) {
    std::cerr << "assertion failed: e0 slope " << s0 << " not within " << a.slope_tol << " of "
              << a.expect_e0 << "\n";
    ok = false;
  }
  if (!std::isnan(a.expect_e1) && !(std::abs(s1 - a.expect_e1) <= a.slope_tol)) {
    std::cerr << "assertion failed: e1 slope " << s1 << " not within " << a.slope_tol << " of "
              << a.expect_e1 << "\n";
    ok = false;
  }
  return ok ? 0 : kAssertionFailed;
}

struct SimulateArgs {
  std::string config;
  std::string probes_csv, snapshots_csv, nodes_csv, report_file;
  bool report = false;
};

int run_simulate(const SimulateArgs& a) {
  const RunConfig cfg = load_config(a.config);
  const Scene scene = build_scene(cfg);
  const double flux_scale = cfg.geometry_kind == "cell_array" ? 1e4 : cfg.flux_scale;
  const CoupledSystem sys = build_coupled(scene, cfg.kappa, flux_scale, 1.0, cfg.compatibility);
  const auto model = make_model(cfg.model);
  Stimulus stim;
  stim.amplitude = cfg.stim_amplitude;
  stim.start = cfg.stim_start;
  stim.duration = cfg.stim_duration;
  stim.targets = stimulus_targets(scene, cfg);

  SimulationOptions opts;
  opts.threshold = cfg.protocol.threshold;
  opts.record_every = cfg.record_every;
  opts.snapshot_times = cfg.snapshot_times;
  opts.probes = cfg.probes;
  if (opts.probes.empty() && cfg.geometry_kind == "cell_array") {
    const CVProbes p = cv_probes(scene, to_cv_setup(cfg));
    opts.probes = p.p_node;
    opts.probes.insert(opts.probes.end(), p.q_node.begin(), p.q_node.end());
  }
  if (opts.probes.empty()) opts.probes.push_back(0);
  for (auto p : opts.probes)
    if (p >= scene.num_transmembrane_nodes())
      throw ConfigError("probe node " + std::to_string(p) + " is not a transmembrane node");
  if (!(cfg.t_end > 0.0)) throw ConfigError("simulate needs time.t_end > 0");

  const SimulationResult r = simulate(sys, *model, stim, cfg.capacitance, cfg.t_end, cfg.stepper, opts);
  Output out(a.probes_csv);
  write_probes_csv(out.stream(), r, opts.probes);
  if (!a.snapshots_csv.empty()) {
    Output snap(a.snapshots_csv);
    write_snapshots_csv(snap.stream(), r);
  }
  if (!a.nodes_csv.empty()) {
    Output nodes(a.nodes_csv);
    write_nodes_csv(nodes.stream(), scene);
  }
  const std::string text = scene_report(scene) + run_report(r);
  if (!a.report_file.empty()) write_file(a.report_file, text);
  if (a.report) std::cerr << text;
  if (r.failed) {
    std::cerr << "simulation failed: " << r.diagnostic << "\n";
    return kAssertionFailed;
  }
  return 0;
}

struct CvArgs {
  std::string config;
  double dx = NAN, dt = NAN;
  double reference_dx = NAN, reference_dt = NAN;
  double expect_max_error = NAN;
  bool mirrored = false;
  std::string output;
  bool report = false;
};

int run_cv_command(const CvArgs& a) {
  CVSetup setup = a.config.empty() ? CVSetup{} : to_cv_setup(load_config(a.config));
  if (a.config.empty()) setup.array.cols = 10;
  if (!std::isnan(a.dx)) setup.array.dx = a.dx;
  if (!std::isnan(a.dt)) setup.stepper.dt = a.dt;
  setup.mirrored = a.mirrored;
  const CVResult r = run_cv(setup);

  Output out(a.output);
  auto& os = out.stream();
  os << "pair,p_x_um,q_x_um,t_p_ms,t_q_ms,cv_um_per_ms\n" << std::setprecision(10);
  for (std::size_t k = 0; k < r.t_p.size(); ++k)
    os << k + 1 << ',' << r.probes.p[k].x() << ',' << r.probes.q[k].x() << ',' << r.t_p[k] << ','
       << r.t_q[k] << ',' << (k < r.cv_pairs.size() ? r.cv_pairs[k] : NAN) << '\n';

  double rel = NAN;
  if (!std::isnan(a.reference_dx) || !std::isnan(a.reference_dt)) {
    CVSetup ref = setup;
    if (!std::isnan(a.reference_dx)) ref.array.dx = a.reference_dx;
    if (!std::isnan(a.reference_dt)) ref.stepper.dt = a.reference_dt;
    const CVResult rr = run_cv(ref);
    if (!rr.failed && !r.failed) rel = relative_cv_error(r.cv, rr.cv);
    if (a.report)
      std::cerr << "reference CV " << rr.cv << " um/ms (dx " << ref.array.dx << " um, dt "
                << ref.stepper.dt << " ms)\n";
  }
  if (a.report) {
    std::cerr << "nodes " << r.nodes << ", t_end " << r.t_end << " ms, wall "
              << r.simulation.wall_seconds << " s\n";
    std::cerr << "CV " << r.cv << " um/ms (" << r.cv_m_per_s() << " m/s)"
              << (r.failed ? ", propagation failed: " + r.diagnostic : "") << "\n";
    if (!std::isnan(rel)) std::cerr << "relative error vs reference " << rel << "\n";
  }
  if (r.failed) return kAssertionFailed;
  if (!std::isnan(a.expect_max_error) && !(std::abs(rel) <= a.expect_max_error)) {
    std::cerr << "assertion failed: |relative CV error| " << std::abs(rel) << " exceeds "
              << a.expect_max_error << "\n";
    return kAssertionFailed;
  }
  return 0;
}

struct SweepArgs {
  std::string kind;
  std::vector<double> values;
  std::string config;
  double dx = NAN, dt = NAN;
  std::string expect_trend;
  std::string output;
  bool report = false;
};

int run_sweep_command(const SweepArgs& a) {
  CVSetup base = a.config.empty() ? CVSetup{} : to_cv_setup(load_config(a.config));
  if (a.config.empty()) base.array.cols = 10;
  if (!std::isnan(a.dx)) base.array.dx = a.dx;
  if (!std::isnan(a.dt)) base.stepper.dt = a.dt;
  const SweepKind kind = parse_sweep_kind(a.kind);
  const auto rows = run_sweep(kind, a.values, base);
  Output out(a.output);
  write_sweep_csv(out.stream(), sweep_column(kind), rows);
  if (a.report)
    for (const auto& r : rows)
      std::cerr << to_string(kind) << " = " << r.value << ": CV " << r.cv << " um/ms"
                << (r.failed ? " (failed: " + r.diagnostic + ")" : "") << "\n";
  if (a.expect_trend.empty()) return 0;
  int sign = 0;
  if (a.expect_trend == "up") sign = 1;
  if (a.expect_trend == "down") sign = -1;
  if (sign == 0) throw ConfigError("--expect-trend must be 'up' or 'down'");
  if (!monotone(rows, sign)) {
    std::cerr << "assertion failed: CV is not monotone " << a.expect_trend << "\n";
    return kAssertionFailed;
  }
  return 0;
}

struct SceneArgs {
  std::string config;
  std::string nodes_csv;
  std::string operator_csv;
  int domain = -1;
  bool psi = false;
  bool report = false;
};

int run_scene(const SceneArgs& a) {
  const RunConfig cfg = load_config(a.config);
  const Scene scene = build_scene(cfg);
  if (a.report) std::cerr << scene_report(scene);
  if (!a.nodes_csv.empty() || a.operator_csv.empty()) {
    Output out(a.nodes_csv);
    write_nodes_csv(out.stream(), scene);
  }
  if (!a.operator_csv.empty()) {
    Output out(a.operator_csv);
    if (a.psi) {
      const double flux_scale = cfg.geometry_kind == "cell_array" ? 1e4 : cfg.flux_scale;
      const CoupledSystem sys = build_coupled(scene, cfg.kappa, flux_scale, 1.0, cfg.compatibility);
      write_matrix_csv(out.stream(), sys.psi_matrix());
    } else {
      if (a.domain < 0 || a.domain >= static_cast<int>(scene.num_domains()))
        throw ConfigError("--domain must name an existing domain");
      const auto ops = scene_operators(scene, 1.0, cfg.compatibility);
      write_matrix_csv(out.stream(), ops[static_cast<std::size_t>(a.domain)].P);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary element cell-by-cell cardiac tissue solver"};
  app.require_subcommand(1);

  ConvergeArgs ca;
  auto* conv = app.add_subcommand("converge", "Convergence of the potential and flux maps");
  conv->add_option("--geometry", ca.geometry, "a, b, c or d")->check(CLI::IsMember({"a", "b", "c", "d"}));
  conv->add_option("--M", ca.M, "node counts")->expected(1, -1);
  conv->add_option("--ref-factor", ca.ref_factor, "reference M over finest M (c, d)");
  conv->add_option("--compatibility", ca.compatibility, "quadrature or uniform");
  conv->add_option("--output,-o", ca.output, "CSV path (default stdout)");
  conv->add_option("--expect-e0-slope", ca.expect_e0);
  conv->add_option("--expect-e1-slope", ca.expect_e1);
  conv->add_option("--slope-tol", ca.slope_tol);
  conv->add_flag("--report", ca.report, "print fitted slopes to stderr");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Time integration from a config file");
  sim->add_option("--config", sa.config)->required()->check(CLI::ExistingFile);
  sim->add_option("--output,-o", sa.probes_csv, "probe CSV path (default stdout)");
  sim->add_option("--snapshots", sa.snapshots_csv, "snapshot CSV path");
  sim->add_option("--nodes", sa.nodes_csv, "node CSV path");
  sim->add_option("--report-file", sa.report_file, "run metadata report path");
  sim->add_flag("--report", sa.report, "print scene and run report to stderr");

  CvArgs cv;
  auto* cvc = app.add_subcommand("cv", "Conduction velocity on a cell array");
  cvc->add_option("--config", cv.config)->check(CLI::ExistingFile);
  cvc->add_option("--dx", cv.dx, "node spacing (um)");
  cvc->add_option("--dt", cv.dt, "time step (ms)");
  cvc->add_option("--reference-dx", cv.reference_dx);
  cvc->add_option("--reference-dt", cv.reference_dt);
  cvc->add_option("--expect-max-error", cv.expect_max_error, "bound on |CV - CV_ref| / CV_ref");
  cvc->add_flag("--mirrored", cv.mirrored, "stimulate the right end");
  cvc->add_option("--output,-o", cv.output);
  cvc->add_flag("--report", cv.report);

  SweepArgs sw;
  auto* swc = app.add_subcommand("sweep", "CV against one parameter");
  swc->add_option("--kind", sw.kind)
      ->required()
      ->check(CLI::IsMember({"kappa", "sigma_i", "disc_freq", "disc_amp", "cell_length",
                             "cell_width", "cell_area"}));
  swc->add_option("--values", sw.values)->required()->expected(1, -1);
  swc->add_option("--config", sw.config)->check(CLI::ExistingFile);
  swc->add_option("--dx", sw.dx);
  swc->add_option("--dt", sw.dt);
  swc->add_option("--expect-trend", sw.expect_trend, "up or down");
  swc->add_option("--output,-o", sw.output);
  swc->add_flag("--report", sw.report);

  SceneArgs sc;
  auto* scn = app.add_subcommand("scene", "Scene summary and node/operator export");
  scn->add_option("--config", sc.config)->required()->check(CLI::ExistingFile);
  scn->add_option("--nodes", sc.nodes_csv, "node CSV path");
  scn->add_option("--operator", sc.operator_csv, "operator CSV path");
  scn->add_option("--domain", sc.domain, "domain whose DtN map is exported");
  scn->add_flag("--psi", sc.psi, "export the transmembrane map instead");
  scn->add_flag("--report", sc.report, "print the scene summary to stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*conv) return run_converge(ca);
    if (*sim) return run_simulate(sa);
    if (*cvc) return run_cv_command(cv);
    if (*swc) return run_sweep_command(sw);
    if (*scn) return run_scene(sc);
  } catch (const emi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
