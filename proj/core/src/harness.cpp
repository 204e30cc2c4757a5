#include "emi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "emi/error.hpp"
#include "emi/steklov.hpp"

namespace emi {

double weighted_l2_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& w) {
  if (a.size() != b.size() || a.size() != w.size())
    throw DomainError("weighted_l2_error: size mismatch");
  return std::sqrt((w.array() * (a - b).array().square()).sum());
}

double quotient_l2_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& w) {
  if (a.size() != b.size() || a.size() != w.size())
    throw DomainError("quotient_l2_error: size mismatch");
  Eigen::ArrayXd d = (a - b).array();
  d -= (w.array() * d).sum() / w.sum();
  return std::sqrt((w.array() * d.square()).sum());
}

Eigen::VectorXd boundary_weights(const Scene& scene, int domain) {
  const auto& d = scene.domain(domain);
  Eigen::VectorXd w(d.size());
  Eigen::Index o = 0;
  for (const auto& c : d.curves) {
    const auto m = static_cast<Eigen::Index>(c.size());
    w.segment(o, m) = c.quadrature_weights();
    o += m;
  }
  return w;
}

ConvergenceGeometry parse_convergence_geometry(const std::string& name) {
  if (name == "a") return ConvergenceGeometry::Disc;
  if (name == "b") return ConvergenceGeometry::SplitDisc;
  if (name == "c") return ConvergenceGeometry::SeparatedHalves;
  if (name == "d") return ConvergenceGeometry::RoundedHalves;
  throw ConfigError("unknown convergence geometry '" + name + "' (expected a, b, c or d)");
}

std::string to_string(ConvergenceGeometry g) {
  switch (g) {
    case ConvergenceGeometry::Disc: return "a";
    case ConvergenceGeometry::SplitDisc: return "b";
    case ConvergenceGeometry::SeparatedHalves: return "c";
    case ConvergenceGeometry::RoundedHalves: return "d";
  }
  return "?";
}

Scene convergence_scene(ConvergenceGeometry g, std::size_t M, const Conductivities& sigma) {
  constexpr double R = 2.0, outer = 4.0;
  switch (g) {
    case ConvergenceGeometry::Disc: return build_single_cell(R, outer, M, sigma);
    case ConvergenceGeometry::SplitDisc: return build_split_circle(R, outer, 0.0, 0.0, M, sigma);
    case ConvergenceGeometry::SeparatedHalves:
      return build_split_circle(R, outer, 0.4, 0.0, M, sigma);
    case ConvergenceGeometry::RoundedHalves:
      return build_split_circle(R, outer, 0.4, 0.2, M, sigma);
  }
  throw ConfigError("unknown convergence geometry");
}

namespace {

struct Traces {
  std::vector<Eigen::VectorXd> dirichlet;  // recovered u_i, local order
  std::vector<Eigen::VectorXd> neumann;    // Psi_i = -B_i lambda
};

Traces solve_traces(const Scene& scene, const Eigen::VectorXd& Vm, const ConvergenceOptions& opts) {
  const CoupledSystem sys = build_coupled(scene, opts.kappa, 1.0, 1.0, opts.compatibility);
  const auto sol = sys.solve(Vm);
  auto pot = sys.recover_all_potentials(sol);
  Traces t;
  t.dirichlet = std::move(pot.u);
  for (std::size_t i = 0; i < scene.num_domains(); ++i)
    t.neumann.push_back(-sys.connectivity().B[i].apply(sol.lambda));
  return t;
}

// Exact pair for the disc of radius 2 in the annulus of radius 4:
// u0 = (s1/s0)(16 + r^2)/(6 r^2) y inside the bath, u1 = -y/2 in the cells.
struct ExactPair {
  double s0, s1;

  double u(int domain, Point x) const {
    if (domain == 0) return s1 / s0 * (16.0 + x.squaredNorm()) / (6.0 * x.squaredNorm()) * x.y();
    return -0.5 * x.y();
  }
  Point grad(int domain, Point x) const {
    if (domain != 0) return {0.0, -0.5};
    const double r2 = x.squaredNorm(), r4 = r2 * r2, c = s1 / (6.0 * s0);
    return {c * 16.0 * (-2.0 * x.x() * x.y() / r4),
            c * (16.0 * (x.x() * x.x() - x.y() * x.y()) / r4 + 1.0)};
  }
  // Outward normal of `domain` at a node of interface (i, j) of the disc
  // settings: the circle for j = 0, the vertical diameter otherwise.
  static Point normal(int domain, std::pair<int, int> ij, Point x) {
    if (ij.second == 0) return domain == 0 ? Point(-x / x.norm()) : Point(x / x.norm());
    return domain == 1 ? Point(1.0, 0.0) : Point(-1.0, 0.0);
  }
};

// Values of domain `d` of the reference scene, interpolated to the nodes of
// the same domain in `coarse` by cubic Lagrange interpolation in arclength
// along the run carrying each node.
class RunInterpolator {
 public:
  RunInterpolator(const Scene& reference, int domain, const Eigen::VectorXd& values)
      : ref_(reference) {
    const auto& g = reference.domain(domain).global;
    for (std::size_t k = 0; k < g.size(); ++k) value_of_[g[k]] = values[static_cast<Eigen::Index>(k)];
  }

  double operator()(int run_index, double s) const {
    const Run& run = ref_.runs().at(run_index);
    const auto n = static_cast<long>(run.nodes.size());
    if (n < 4) throw DomainError("reference run too short for cubic interpolation");
    // Index of the first reference node at or beyond s.
    const long hi = std::lower_bound(run.arclength.begin(), run.arclength.end(), s) -
                    run.arclength.begin();
    long first = hi - 2;
    if (!run.closed) first = std::clamp(first, 0L, n - 4);
    double xs[4], ys[4];
    for (int m = 0; m < 4; ++m) {
      long idx = first + m;
      double shift = 0.0;
      if (run.closed) {
        while (idx < 0) { idx += n; shift -= run.length; }
        while (idx >= n) { idx -= n; shift += run.length; }
      }
      xs[m] = run.arclength[idx] + shift;
      ys[m] = value_of_.at(run.nodes[idx]);
    }
    double out = 0.0;
    for (int a = 0; a < 4; ++a) {
      double l = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) l *= (s - xs[b]) / (xs[a] - xs[b]);
      out += l * ys[a];
    }
    return out;
  }

 private:
  const Scene& ref_;
  std::map<std::size_t, double> value_of_;
};

double run_position(const Scene& scene, std::size_t l) {
  const Run& run = scene.runs().at(scene.node_run(l));
  const auto it = std::find(run.nodes.begin(), run.nodes.end(), l);
  return run.arclength[it - run.nodes.begin()];
}

Eigen::VectorXd reference_datum(const Scene& scene) {
  const std::size_t m0 = scene.num_transmembrane_nodes();
  Eigen::VectorXd V(m0);
  for (std::size_t l = 0; l < m0; ++l) {
    const Point x = scene.node(l);
    V[static_cast<Eigen::Index>(l)] =
        std::cos(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y());
  }
  return V;
}

}  // namespace

std::vector<ConvergenceRow> run_convergence(ConvergenceGeometry g,
                                            const std::vector<std::size_t>& M_list,
                                            const ConvergenceOptions& opts) {
  if (M_list.empty()) throw DomainError("run_convergence: empty M list");
  std::vector<ConvergenceRow> rows;
  const bool exact = g == ConvergenceGeometry::Disc || g == ConvergenceGeometry::SplitDisc;

  std::optional<Scene> ref_scene;
  Traces ref;
  if (!exact) {
    const std::size_t finest = *std::max_element(M_list.begin(), M_list.end());
    const std::size_t Mref =
        opts.reference_M ? opts.reference_M : finest * static_cast<std::size_t>(opts.reference_factor);
    if (Mref <= finest) throw DomainError("run_convergence: reference mesh is not strictly finer");
    ref_scene = convergence_scene(g, Mref, opts.sigma);
    ref = solve_traces(*ref_scene, reference_datum(*ref_scene), opts);
  }

  for (const std::size_t M : M_list) {
    const Scene scene = convergence_scene(g, M, opts.sigma);
    ConvergenceRow row;
    row.M_target = M;
    row.M = scene.num_nodes();
    if (exact) {
      const ExactPair ex{scene.sigma(0), scene.sigma(1)};
      const std::size_t m0 = scene.num_transmembrane_nodes();
      Eigen::VectorXd Vm(m0);
      for (std::size_t l = 0; l < m0; ++l) {
        const Point x = scene.node(l);
        const int cell = scene.node_domains(l).first;
        Vm[static_cast<Eigen::Index>(l)] = ex.u(cell, x) - ex.u(0, x);
      }
      const Traces t = solve_traces(scene, Vm, opts);
      for (std::size_t i = 0; i < scene.num_domains(); ++i) {
        const int d = static_cast<int>(i);
        const auto& glob = scene.domain(d).global;
        Eigen::VectorXd u(glob.size()), flux(glob.size());
        for (std::size_t k = 0; k < glob.size(); ++k) {
          const Point x = scene.node(glob[k]);
          const Point n = ExactPair::normal(d, scene.node_domains(glob[k]), x);
          u[static_cast<Eigen::Index>(k)] = ex.u(d, x);
          flux[static_cast<Eigen::Index>(k)] = scene.sigma(d) * ex.grad(d, x).dot(n);
        }
        const Eigen::VectorXd w = boundary_weights(scene, d);
        row.error.e0 = std::max(row.error.e0, quotient_l2_error(t.dirichlet[i], u, w));
        row.error.e1 = std::max(row.error.e1, weighted_l2_error(t.neumann[i], flux, w));
      }
    } else {
      const Traces t = solve_traces(scene, reference_datum(scene), opts);
      for (std::size_t i = 0; i < scene.num_domains(); ++i) {
        const int d = static_cast<int>(i);
        const RunInterpolator ref_u(*ref_scene, d, ref.dirichlet[i]);
        const RunInterpolator ref_flux(*ref_scene, d, ref.neumann[i]);
        const auto& glob = scene.domain(d).global;
        Eigen::VectorXd u(glob.size()), flux(glob.size());
        for (std::size_t k = 0; k < glob.size(); ++k) {
          const int run = scene.node_run(glob[k]);
          const double s = run_position(scene, glob[k]);
          u[static_cast<Eigen::Index>(k)] = ref_u(run, s);
          flux[static_cast<Eigen::Index>(k)] = ref_flux(run, s);
        }
        const Eigen::VectorXd w = boundary_weights(scene, d);
        row.error.e0 = std::max(row.error.e0, quotient_l2_error(t.dirichlet[i], u, w));
        row.error.e1 = std::max(row.error.e1, weighted_l2_error(t.neumann[i], flux, w));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_slope: need two or more points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw DomainError("fit_slope: data must be positive");
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("fit_slope: abscissae coincide");
  return (n * sxy - sx * sy) / den;
}

CellArraySpec with_scaled_bath(CellArraySpec spec) {
  const double L = spec.cols * spec.cell_length;
  const double W = spec.rows * spec.cell_width;
  spec.bath_length = L * 5000.0 / 3000.0;
  spec.bath_width = W * 440.0 / 40.0;
  return spec;
}

CVProbes cv_probes(const Scene& scene, const CVSetup& setup) {
  const auto& a = setup.array;
  const double L = a.cols * a.cell_length;
  const double scale = a.cols / setup.protocol.reference_columns;
  const std::size_t m0 = scene.num_transmembrane_nodes();
  CVProbes out;
  // Ties go to the node nearer the stimulated end so that mirrored setups
  // pick mirrored nodes.
  auto upstream = [&](std::size_t l) { return setup.mirrored ? L - scene.node(l).x() : scene.node(l).x(); };
  auto snap = [&](Point target, std::vector<std::size_t>& nodes) {
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < m0; ++l) {
      const double d = (scene.node(l) - target).norm();
      const double tol = 1e-9 * a.dx;
      if (d < dist - tol || (d <= dist + tol && upstream(l) < upstream(best))) {
        dist = std::min(d, dist);
        best = l;
      }
    }
    if (!(dist < a.dx))
      throw DomainError("probe at x = " + std::to_string(target.x()) +
                        " is farther than dx from every membrane node");
    nodes.push_back(best);
    out.snap_distance.push_back(dist);
  };
  for (int k = 1; k <= setup.protocol.pairs; ++k) {
    double xp = (setup.protocol.p_offset + k) * a.cell_length * scale;
    double xq = (setup.protocol.q_offset + k) * a.cell_length * scale;
    if (setup.mirrored) {
      xp = L - xp;
      xq = L - xq;
    }
    out.p.emplace_back(xp, 0.0);
    out.q.emplace_back(xq, 0.0);
  }
  for (const auto& p : out.p) snap(p, out.p_node);
  for (const auto& q : out.q) snap(q, out.q_node);
  return out;
}

CVResult run_cv(const CVSetup& setup) {
  const CellArraySpec spec = setup.scale_bath ? with_scaled_bath(setup.array) : setup.array;
  if (setup.stim_columns < 1 || setup.stim_columns > spec.cols)
    throw ConfigError("stimulated column count must lie in [1, cols]");
  const Scene scene = build_cell_array(spec, setup.sigma);
  const CoupledSystem sys = build_coupled(scene, setup.kappa, 1e4, 1.0, setup.compatibility);
  const auto model = make_model(setup.model);

  Stimulus stim;
  stim.amplitude = setup.stim_amplitude;
  stim.start = setup.stim_start;
  stim.duration = setup.stim_duration;
  for (int c = 0; c < setup.stim_columns; ++c) {
    const int col = setup.mirrored ? spec.cols - 1 - c : c;
    for (int r = 0; r < spec.rows; ++r) {
      const auto nodes = scene.cell_membrane_nodes(1 + r * spec.cols + col);
      stim.targets.insert(stim.targets.end(), nodes.begin(), nodes.end());
    }
  }

  CVResult res;
  res.nodes = scene.num_nodes();
  res.probes = cv_probes(scene, setup);
  const double L = spec.cols * spec.cell_length;
  double travel = 0.0;
  for (const auto& q : res.probes.q) travel = std::max(travel, setup.mirrored ? L - q.x() : q.x());
  res.t_end = setup.t_end > 0.0 ? setup.t_end
                                : setup.stim_start + setup.stim_duration + travel / setup.cv_floor;

  SimulationOptions opts;
  opts.threshold = setup.protocol.threshold;
  opts.probes = res.probes.p_node;
  opts.probes.insert(opts.probes.end(), res.probes.q_node.begin(), res.probes.q_node.end());
  opts.stop_when_activated = true;
  opts.record_every = 10;
  res.simulation = simulate(sys, *model, stim, setup.capacitance, res.t_end, setup.stepper, opts);

  const std::size_t n = res.probes.p_node.size();
  res.t_p.assign(res.simulation.activation.begin(), res.simulation.activation.begin() + n);
  res.t_q.assign(res.simulation.activation.begin() + n, res.simulation.activation.end());
  if (res.simulation.failed) {
    res.failed = true;
    res.diagnostic = res.simulation.diagnostic;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n && !res.failed; ++k) {
    if (std::isnan(res.t_p[k]) || std::isnan(res.t_q[k])) {
      res.failed = true;
      res.diagnostic = "probe pair " + std::to_string(k + 1) + " never reached threshold";
      break;
    }
    if (!(res.t_q[k] > res.t_p[k])) {
      res.failed = true;
      res.diagnostic = "probe pair " + std::to_string(k + 1) + " activated out of order";
      break;
    }
    const double dist = (scene.node(res.probes.q_node[k]) - scene.node(res.probes.p_node[k])).norm();
    res.cv_pairs.push_back(dist / (res.t_q[k] - res.t_p[k]));
    sum += res.cv_pairs.back();
  }
  res.cv = res.failed ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
  return res;
}

double relative_cv_error(double cv, double cv_ref) {
  if (!(cv_ref != 0.0)) throw DomainError("reference CV must be nonzero");
  return (cv - cv_ref) / cv_ref;
}

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "kappa") return SweepKind::Kappa;
  if (name == "sigma_i") return SweepKind::SigmaI;
  if (name == "disc_freq") return SweepKind::DiscFrequency;
  if (name == "disc_amp") return SweepKind::DiscAmplitude;
  if (name == "cell_length") return SweepKind::CellLength;
  if (name == "cell_width") return SweepKind::CellWidth;
  if (name == "cell_area") return SweepKind::CellArea;
  throw ConfigError("unknown sweep kind '" + name + "'");
}

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::Kappa: return "kappa";
    case SweepKind::SigmaI: return "sigma_i";
    case SweepKind::DiscFrequency: return "disc_freq";
    case SweepKind::DiscAmplitude: return "disc_amp";
    case SweepKind::CellLength: return "cell_length";
    case SweepKind::CellWidth: return "cell_width";
    case SweepKind::CellArea: return "cell_area";
  }
  return "?";
}

CVSetup apply_sweep_value(const CVSetup& base, SweepKind kind, double value) {
  if (!(value > 0.0)) throw ConfigError("sweep values must be positive");
  CVSetup s = base;
  auto& j = s.array.junction;
  switch (kind) {
    case SweepKind::Kappa: s.kappa = value; break;
    case SweepKind::SigmaI: s.sigma.intracellular = value; break;
    case SweepKind::DiscFrequency:
      if (j.kind != JunctionShape::Kind::Sinusoid) j = {JunctionShape::Kind::Sinusoid, 0.5, 0.0};
      j.frequency = value;
      break;
    case SweepKind::DiscAmplitude:
      if (j.kind != JunctionShape::Kind::Sinusoid) j = {JunctionShape::Kind::Sinusoid, 0.0, 3.0};
      j.amplitude = value;
      break;
    case SweepKind::CellLength: s.array.cell_length = value; break;
    case SweepKind::CellWidth: s.array.cell_width = value; break;
    case SweepKind::CellArea:
      s.array.cell_length = value;
      s.array.cell_width = value / 10.0;
      break;
  }
  return s;
}

std::vector<SweepRow> run_sweep(SweepKind kind, const std::vector<double>& values,
                                const CVSetup& base) {
  std::vector<SweepRow> rows;
  for (const double v : values) {
    SweepRow row;
    row.value = v;
    try {
      const CVResult r = run_cv(apply_sweep_value(base, kind, v));
      row.cv = r.cv;
      row.failed = r.failed;
      row.diagnostic = r.diagnostic;
    } catch (const Error& e) {
      row.cv = std::numeric_limits<double>::quiet_NaN();
      row.failed = true;
      row.diagnostic = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

bool monotone(const std::vector<SweepRow>& rows, int sign) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].failed || !std::isfinite(rows[k].cv)) return false;
    if (k > 0 && sign * (rows[k].cv - rows[k - 1].cv) < 0.0) return false;
  }
  return true;
}

}  // namespace emi
