// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "emi/bem.hpp"
#include "emi/coupling.hpp"
#include "emi/harness.hpp"
#include "emi/integrator.hpp"
#include "emi/steklov.hpp"
#include "oracles.hpp"

using namespace emi;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ParamCurve sampled(std::size_t M, const std::function<Point(double)>& f) {
  std::vector<Point> p;
  for (std::size_t j = 0; j < M; ++j) p.push_back(f(static_cast<double>(j) / M));
  return ParamCurve::fourier(p);
}

ParamCurve circle(std::size_t M, double R) {
  return sampled(M, [R](double t) { return Point(R * std::cos(2 * pi * t), R * std::sin(2 * pi * t)); });
}

Eigen::VectorXd random_vector(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

std::vector<double> column(const std::vector<ConvergenceRow>& rows, bool e0) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(e0 ? r.error.e0 : r.error.e1);
  return v;
}

std::vector<double> targets(const std::vector<ConvergenceRow>& rows) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(static_cast<double>(r.M_target));
  return v;
}

Outcome disc_exponential() {
  const auto rows = run_convergence(ConvergenceGeometry::Disc, {16, 32, 64, 128});
  bool ok = true;
  std::ostringstream os;
  os << "e1:";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    os << " M=" << rows[k].M << ' ' << fmt("%.2e", rows[k].error.e1);
    if (rows[k].M_target == 64) ok = ok && rows[k].error.e1 < 1e-8;
    if (k + 1 < rows.size() && rows[k].error.e1 > 1e-12)
      ok = ok && rows[k + 1].error.e1 / rows[k].error.e1 < 0.1;
  }
  return {ok, os.str()};
}

Outcome split_disc_rates() {
  const auto rows = run_convergence(ConvergenceGeometry::SplitDisc, {64, 128, 256, 512, 1024});
  const double s0 = fit_slope(targets(rows), column(rows, true));
  const double s1 = fit_slope(targets(rows), column(rows, false));
  const bool ok = std::abs(s0 + 1.5) <= 0.3 && std::abs(s1 + 0.5) <= 0.3;
  return {ok, "e0 slope " + fmt("%.3f", s0) + " (want -1.5 +- 0.3), e1 slope " + fmt("%.3f", s1) +
                  " (want -0.5 +- 0.3)"};
}

Outcome smoothing() {
  const std::vector<std::size_t> Ms = {64, 128, 256, 512};
  const auto c = run_convergence(ConvergenceGeometry::SeparatedHalves, Ms);
  const auto d = run_convergence(ConvergenceGeometry::RoundedHalves, Ms);
  bool ok = true;
  std::ostringstream os;
  for (std::size_t k = 0; k < Ms.size(); ++k) {
    if (Ms[k] >= 128) ok = ok && d[k].error.e0 < c[k].error.e0;
    os << "M=" << Ms[k] << " e0(c) " << fmt("%.2e", c[k].error.e0) << " e0(d) "
       << fmt("%.2e", d[k].error.e0) << "; ";
  }
  const double sc = fit_slope(targets(c), column(c, true));
  const double sd = fit_slope(targets(d), column(d, true));
  ok = ok && sd <= sc - 0.3;
  os << "slopes c " << fmt("%.3f", sc) << " d " << fmt("%.3f", sd);
  return {ok, os.str()};
}

Outcome dtn_modes() {
  const std::size_t M = 64;
  double worst = 0.0;
  for (double R : {1.0, 2.0}) {
    const auto op = interior_dtn(circle(M, R));
    for (int n = 1; n <= 8; ++n)
      for (bool sine : {false, true}) {
        Eigen::VectorXd f(M);
        for (std::size_t j = 0; j < M; ++j) {
          const double a = n * 2.0 * pi * j / M;
          f[j] = sine ? std::sin(a) : std::cos(a);
        }
        worst = std::max(worst, rel(op.P * f, (n / R) * f));
      }
  }
  return {worst < 1e-8, "max relative mode error " + fmt("%.2e", worst)};
}

Outcome gauss_and_kernel() {
  const std::size_t M = 64;
  std::vector<ParamCurve> curves = {
      circle(M, 1.0), circle(M, 2.0),
      sampled(M, [](double t) { return Point(2 * std::cos(2 * pi * t), std::sin(2 * pi * t)); }),
      sampled(M, [](double t) {
        const double a = 2 * pi * t, r = 1.0 + 0.2 * std::cos(3 * a);
        return Point(r * std::cos(a), r * std::sin(a));
      }),
      sampled(M, [](double t) {
        const double a = 2 * pi * t;
        return Point(0.5 + std::cos(a) + 0.3 * std::cos(2 * a), 0.2 + std::sin(a));
      })};
  double gauss = 0.0, kernel = 0.0;
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(M);
  for (const auto& c : curves) {
    const auto L = assemble_self(c);
    gauss = std::max(gauss, (L.K * e + 0.5 * e).cwiseAbs().maxCoeff());
    kernel = std::max(kernel, (interior_dtn(c).P * e).cwiseAbs().maxCoeff());
    kernel = std::max(kernel, (exterior_dtn({c}, circle(2 * M, 5.0)).P * e).cwiseAbs().maxCoeff());
  }
  return {gauss < 1e-10 && kernel < 1e-9,
          "|(K+I/2)e| " + fmt("%.2e", gauss) + ", |Pe| " + fmt("%.2e", kernel) + " over " +
              std::to_string(curves.size()) + " curves, interior and exterior"};
}

Outcome reduction() {
  std::ostringstream os;
  bool ok = true;
  for (auto mode : {Compatibility::Quadrature, Compatibility::Uniform}) {
    const char* name = mode == Compatibility::Quadrature ? "quadrature" : "uniform";
    // Two nested cells: smooth interfaces, no junction.
    const auto s = build_concentric_cells(1, 2, 4, 64);
    const auto sys = build_coupled(s, 0.7, 1.0, 1.0, mode);
    const Eigen::VectorXd Vm = random_vector(s.num_transmembrane_nodes(), 21);
    const double mono = rel(oracle::monolithic_flux(sys, Vm), sys.psi(Vm));
    const auto sol = sys.solve(Vm);
    double compat = 0.0;
    for (std::size_t i = 1; i < s.num_domains(); ++i)
      compat = std::max(compat, std::abs(sys.connectivity().B[i].apply(sol.lambda).sum()));
    // Two cells joined by a junction: gap law from the recovered potentials.
    const auto b = build_split_circle(2, 4, 0.0, 0.0, 128);
    const auto gsys = build_coupled(b, 0.7, 1.0, 1.0, mode);
    const auto gsol = gsys.solve(random_vector(b.num_transmembrane_nodes(), 22));
    const auto pot = gsys.recover_all_potentials(gsol);
    Eigen::VectorXd jump = Eigen::VectorXd::Zero(b.num_nodes());
    for (std::size_t i = 0; i < b.num_domains(); ++i)
      jump += gsys.connectivity().B[i].apply_transpose(pot.u[i]);
    const double gap = (0.7 * gsys.connectivity().Ag.apply(jump) - gsol.lambda_g).cwiseAbs().maxCoeff();
    ok = ok && s.num_nodes() <= 200 && b.num_nodes() <= 200 && mono < 1e-8 && compat < 1e-9 && gap < 1e-9;
    os << name << ": monolithic " << fmt("%.1e", mono) << " compat " << fmt("%.1e", compat)
       << " gap law " << fmt("%.1e", gap) << "; ";
  }
  return {ok, os.str()};
}

Outcome gauge() {
  double worst = 0.0;
  for (const auto& s : {build_concentric_cells(1, 2, 4, 64), build_single_cell(2, 4, 64),
                        build_split_circle(2, 4, 0.0, 0.0, 128)}) {
    const Eigen::VectorXd Vm = random_vector(s.num_transmembrane_nodes(), 31);
    const auto a = build_coupled(s, 0.7, 1.0, 1.0).psi(Vm);
    const auto b = build_coupled(s, 0.7, 1.0, 10.0).psi(Vm);
    worst = std::max(worst, rel(b, a));
  }
  return {worst < 1e-9, "max relative change " + fmt("%.2e", worst) + " over 3 scenes"};
}

// Closed-form damped Chebyshev stability polynomial.
double stability(int s, double eps, double z) {
  const double w0 = 1.0 + eps / (s * s);
  const double a = std::acosh(w0);
  const double T = std::cosh(s * a);
  const double w1 = T * std::sinh(a) / (s * std::sinh(s * a));
  const double x = w0 + w1 * z;
  const double Tx = std::abs(x) <= 1.0 ? std::cos(s * std::acos(x))
                                       : ((x < 0 && s % 2) ? -1.0 : 1.0) * std::cosh(s * std::acosh(std::abs(x)));
  return Tx / T;
}

Outcome stepping() {
  std::ostringstream os;
  // Certificate over a 10 ms propagating run.
  CVSetup setup;
  setup.array.rows = 2;
  setup.array.cols = 10;
  setup.stepper.dt = 0.02;
  const auto scene = build_cell_array(with_scaled_bath(setup.array));
  const auto sys = build_coupled(scene, setup.kappa, 1e4);
  MitchellSchaeffer ms;
  Stimulus stim;
  stim.amplitude = -300.0;
  stim.duration = 1.0;
  for (int r = 0; r < 2; ++r) {
    const auto n = scene.cell_membrane_nodes(1 + r * 10);
    stim.targets.insert(stim.targets.end(), n.begin(), n.end());
  }
  const auto run = simulate(sys, ms, stim, 1.0, 10.0, setup.stepper, {});
  const bool cert = run.certificate_ok && !run.failed && run.steps == 500;
  os << "certificate " << (cert ? "ok" : "violated") << " (max |R| " << fmt("%.6f", run.max_amplification)
     << ", " << run.steps << " steps); ";

  // Dahlquist: |R_s| <= 1 on [-0.6 s^2, 0] for every s, and at -dt rho for
  // the automatically chosen s.
  bool dahl = true;
  for (double e = -2.0; e <= 6.0; e += 0.05) {
    const double dtrho = std::pow(10.0, e);
    const int s = rkc_stage_count(dtrho, 1.2, 100000);
    dahl = dahl && std::abs(stability(s, 0.05, -dtrho)) <= 1.0;
  }
  for (int s = 1; s <= 300; s += (s < 20 ? 1 : 7))
    for (int k = 0; k <= 4000; ++k) {
      const double z = -0.6 * s * s * k / 4000.0;
      dahl = dahl && std::abs(stability(s, 0.05, z)) <= 1.0 + 1e-12;
    }
  os << "dahlquist " << (dahl ? "stable" : "unstable") << "; ";

  // Richardson on y' = cos t. Over a whole period the error cancels to
  // rounding, so the interval is a quarter period.
  auto err = [](double dt) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
    const long n = std::lround(0.5 * pi / dt);
    for (long k = 0; k < n; ++k)
      y = rkc_advance([](double t, const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, std::cos(t)); },
                      k * dt, y, dt, 3, 0.05);
    return std::abs(y[0] - 1.0);
  };
  bool rich = true;
  double e = err(0.5 * pi / 20);
  os << "ratios";
  for (int h = 1; h <= 3; ++h) {
    const double e2 = err(0.5 * pi / (20 << h));
    rich = rich && e / e2 >= 1.9;
    os << ' ' << fmt("%.2f", e / e2);
    e = e2;
  }
  return {cert && dahl && rich, os.str()};
}

Outcome propagation() {
  std::ostringstream os;
  CVSetup base;
  base.array.rows = 2;
  base.array.cols = 10;
  base.array.dx = 10.0;
  base.stepper.dt = 0.02;
  const auto coarse = run_cv(base);
  const bool propagates = !coarse.failed;
  os << "(i) cv " << fmt("%.1f", coarse.cv) << " um/ms; ";

  CVSetup fine = base;
  fine.array.dx = 5.0;
  fine.stepper.dt = 0.01;
  const auto f = run_cv(fine);
  const double change = f.failed ? INFINITY : std::abs(relative_cv_error(coarse.cv, f.cv));
  os << "(ii) fine cv " << fmt("%.1f", f.cv) << ", change " << fmt("%.2f", 100 * change) << "%; ";

  CVSetup weak = base;
  weak.kappa /= 1e4;
  const auto w = run_cv(weak);
  os << "(iii) kappa/1e4 " << (w.failed ? "flagged" : "not flagged") << "; ";

  auto with = [&](SweepKind k, double v) { return apply_sweep_value(base, k, v); };
  struct Trend {
    const char* name;
    SweepKind kind;
    std::vector<double> values;
    CVSetup base;
    int sign;
  };
  const std::vector<Trend> trends = {
      {"kappa", SweepKind::Kappa, {172.5, 345.0, 690.0}, base, +1},
      {"sigma_i", SweepKind::SigmaI, {1.5, 3.0, 6.0}, base, +1},
      {"cell_length", SweepKind::CellLength, {75.0, 100.0, 125.0}, with(SweepKind::CellWidth, 10.0), -1},
      {"cell_width", SweepKind::CellWidth, {10.0, 20.0, 30.0}, with(SweepKind::CellLength, 100.0), +1},
  };
  bool monotone_ok = true;
  os << "(iv)";
  for (const auto& t : trends) {
    const auto rows = run_sweep(t.kind, t.values, t.base);
    const bool m = monotone(rows, t.sign);
    monotone_ok = monotone_ok && m;
    os << ' ' << t.name << (m ? " ok" : " broken") << " [";
    for (std::size_t k = 0; k < rows.size(); ++k) os << (k ? " " : "") << fmt("%.0f", rows[k].cv);
    os << "]";
  }
  return {propagates && change < 0.05 && w.failed && monotone_ok, os.str()};
}

Outcome exterior_annulus() {
  const std::size_t M = 64;
  const double s0 = 20.0, s1 = 3.0;
  const auto op = exterior_dtn({circle(M, 2.0)}, circle(2 * M, 4.0));
  Eigen::VectorXd u(M), expect(M);
  for (std::size_t j = 0; j < M; ++j) {
    const double th = 2.0 * pi * j / M, c = s1 / s0;
    // u = c (16 + r^2) / (6 r^2) y; derivative into the bath is -d/dr.
    u[j] = c * (16.0 + 4.0) / 24.0 * 2.0 * std::sin(th);
    expect[j] = -c * (-16.0 / 4.0 + 1.0) / 6.0 * std::sin(th);
  }
  const double err = (op.P * u - expect).cwiseAbs().maxCoeff();
  return {err < 1e-8, "max error " + fmt("%.2e", err)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;  // 0 when the criterion states no runtime bound
    Outcome (*run)();
  };
  const std::vector<Criterion> all = {
      {1, "exponential convergence on the disc", 10, disc_exponential},
      {2, "algebraic rates on the split disc", 120, split_disc_rates},
      {3, "rounded corners restore accuracy", 0, smoothing},
      {4, "interior map on circle modes", 0, dtn_modes},
      {5, "double layer identity and constant kernel", 0, gauss_and_kernel},
      {6, "reduced system matches the full transmission solve", 30, reduction},
      {7, "independence of the regularization weight", 0, gauge},
      {8, "stabilized stepping", 0, stepping},
      {9, "propagation properties on a 2x10 array", 900, propagation},
      {10, "exterior map on the annulus", 0, exterior_annulus},
  };
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += " [over the " + fmt("%.0f", c.budget_s) + " s budget]";
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d %s: %s | %s | %.1f s\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures;
}
