#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "emi/error.hpp"
#include "emi/harness.hpp"
#include "emi/integrator.hpp"

using namespace emi;

namespace {

// Damped first-order Chebyshev polynomial in closed form:
// R_s(z) = T_s(w0 + w1 z) / T_s(w0), w0 = 1 + eps / s^2, w1 = T_s(w0) / T_s'(w0).
double chebyshev_T(int s, double x) {
  if (std::abs(x) <= 1.0) return std::cos(s * std::acos(x));
  const double v = std::cosh(s * std::acosh(std::abs(x)));
  return (x < 0 && s % 2) ? -v : v;
}

double stability_closed_form(int s, double eps, double z) {
  const double w0 = 1.0 + eps / (s * s);
  const double a = std::acosh(w0);
  const double T = std::cosh(s * a);
  const double dT = s * std::sinh(s * a) / std::sinh(a);
  const double w1 = T / dT;
  return chebyshev_T(s, w0 + w1 * z) / T;
}

Scene small_array(int rows, int cols, double dx = 10.0) {
  CellArraySpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.dx = dx;
  return build_cell_array(with_scaled_bath(spec));
}

std::size_t nearest_transmembrane(const Scene& s, const Point& p) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < s.num_transmembrane_nodes(); ++l)
    if ((s.node(l) - p).norm() < (s.node(best) - p).norm()) best = l;
  return best;
}

Stimulus left_column(const Scene& s, int rows, int cols) {
  Stimulus st;
  st.amplitude = -300.0;
  st.duration = 1.0;
  for (int r = 0; r < rows; ++r) {
    const auto n = s.cell_membrane_nodes(1 + r * cols);
    st.targets.insert(st.targets.end(), n.begin(), n.end());
  }
  return st;
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("power iteration on known spectra") {
  const Eigen::Vector3d d(-1.0, -10.0, -3.0);
  const auto est = estimate_spectral_radius([&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(d.cwiseProduct(v));
  }, 3);
  CHECK(est.rho == doctest::Approx(10.0).epsilon(0.01));
  const auto zero = estimate_spectral_radius([](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(v.size()));
  }, 5);
  CHECK(zero.rho == 0.0);
}

TEST_CASE("power iteration on psi agrees with a dense eigensolve") {
  const auto s = build_single_cell(2, 4, 64);
  const auto sys = build_coupled(s, 1.0);
  const double cm = 1.0;
  const Eigen::MatrixXd Psi = sys.psi_matrix() / cm;
  Eigen::EigenSolver<Eigen::MatrixXd> es(Psi);
  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  const auto est = estimate_spectral_radius([&](const Eigen::VectorXd& v) { return sys.psi(v) / cm; },
                                            s.num_transmembrane_nodes());
  CHECK(est.rho == doctest::Approx(rho).epsilon(0.02));
}

TEST_CASE("stability polynomial matches the closed form") {
  for (int s : {1, 2, 5, 17, 60})
    for (double z : {-0.1, -1.0, -0.5 * s * s, -0.6 * s * s})
      CHECK(rkc_stability(s, 0.05, z) == doctest::Approx(stability_closed_form(s, 0.05, z)).epsilon(1e-10));
  CHECK(rkc_stability_bound(10, 0.05) > 0.6 * 100);
}

TEST_CASE("dahlquist test with automatic stage count") {
  const double lambda = -100.0, dt = 0.1;
  const int s = rkc_stage_count(-lambda * dt, 1.2, 10000);
  CHECK(std::abs(stability_closed_form(s, 0.05, lambda * dt)) <= 1.0);
  const Eigen::VectorXd y0 = Eigen::VectorXd::Ones(1);
  const auto y1 = rkc_advance([&](double, const Eigen::VectorXd& y) { return Eigen::VectorXd(lambda * y); },
                              0.0, y0, dt, s, 0.05);
  CHECK(y1[0] == doctest::Approx(stability_closed_form(s, 0.05, lambda * dt)).epsilon(1e-10));
  CHECK_THROWS_AS(rkc_stage_count(1e12, 1.2, 10000), ConfigError);
}

TEST_CASE("zero right hand side gives the identity step") {
  MembraneState st;
  st.V = Eigen::VectorXd::LinSpaced(5, -80, 0);
  st.z = Eigen::MatrixXd::Constant(5, 1, 0.5);
  struct Still final : IonicModel {
    std::string name() const override { return "still"; }
    std::size_t num_states() const override { return 1; }
    double rest_potential() const override { return 0.0; }
    Eigen::VectorXd rest_state() const override { return Eigen::VectorXd::Zero(1); }
    double current(double, const double*) const override { return 0.0; }
    void state_rate(double, const double*, double* dz) const override { dz[0] = 0.0; }
    std::pair<double, double> voltage_range() const override { return {-1, 1}; }
    std::vector<std::pair<double, double>> state_bounds() const override { return {{0, 1}}; }
    std::unique_ptr<IonicModel> clone() const override { return std::make_unique<Still>(); }
  } still;
  SplitRHS rhs;
  rhs.psi = [](const Eigen::VectorXd& v) { return Eigen::VectorXd(Eigen::VectorXd::Zero(v.size())); };
  rhs.model = &still;
  StepperConfig cfg;
  cfg.stages = 7;
  const auto next = rkc_step(st, rhs, cfg, 0.0, 0.0);
  CHECK((next.V - st.V).norm() == 0.0);
  CHECK((next.z - st.z).norm() == 0.0);
}

TEST_CASE("first order convergence on a smooth problem") {
  // Over a full period every derivative of cos integrates to zero and the
  // error cancels to rounding, so integrate y' = cos t over a quarter period.
  // y' = -y + cos t over a full period does not cancel.
  auto run = [](double dt, bool damped) {
    const double T = damped ? 2.0 * std::numbers::pi : 0.5 * std::numbers::pi;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
    const long n = std::lround(T / dt);
    for (long k = 0; k < n; ++k)
      y = rkc_advance([&](double t, const Eigen::VectorXd& v) {
        return Eigen::VectorXd::Constant(1, (damped ? -v[0] : 0.0) + std::cos(t));
      }, k * dt, y, dt, 3, 0.05);
    const double exact = damped ? 0.5 * (1.0 - std::exp(-T)) : 1.0;
    return std::abs(y[0] - exact);
  };
  for (bool damped : {false, true}) {
    const double dt = 0.5 * std::numbers::pi / 20;
    double e = run(dt, damped);
    for (int h = 1; h <= 3; ++h) {
      const double e2 = run(dt / (1 << h), damped);
      CHECK(e / e2 >= 1.9);
      CHECK(e / e2 < 2.5);
      e = e2;
    }
  }
}

TEST_CASE("rest is an equilibrium of the coupled system") {
  const auto s = small_array(1, 3);
  const auto sys = build_coupled(s, 690.0, 1e4);
  MitchellSchaeffer ms;
  StepperConfig cfg;
  cfg.dt = 0.02;
  SimulationOptions opts;
  opts.probes = {0, s.num_transmembrane_nodes() / 2};
  const auto r = simulate(sys, ms, Stimulus{}, 1.0, 10.0, cfg, opts);
  CHECK_FALSE(r.failed);
  CHECK(r.certificate_ok);
  CHECK((r.final_state.V.array() - ms.rest_potential()).abs().maxCoeff() < 1e-6);
}

TEST_CASE("propagation on a 2x10 array and time step robustness") {
  const int rows = 2, cols = 10;
  const auto s = small_array(rows, cols);
  const auto sys = build_coupled(s, 690.0, 1e4);
  MitchellSchaeffer ms;
  const auto stim = left_column(s, rows, cols);
  SimulationOptions opts;
  opts.probes = {nearest_transmembrane(s, {100.0, 0.0}), nearest_transmembrane(s, {1050.0, 0.0})};
  opts.stop_when_activated = true;
  double t[2] = {0, 0};
  int k = 0;
  for (double dt : {0.02, 0.01}) {
    StepperConfig cfg;
    cfg.dt = dt;
    const auto r = simulate(sys, ms, stim, 1.0, 10.0, cfg, opts);
    REQUIRE_FALSE(r.failed);
    CHECK(r.certificate_ok);
    REQUIRE(std::isfinite(r.activation[1]));
    CHECK(r.activation[1] > r.activation[0]);
    t[k++] = r.activation[1];
  }
  CHECK(std::abs(t[0] - t[1]) / t[1] < 0.02);
}

TEST_CASE("runs are deterministic") {
  const auto s = small_array(1, 3);
  const auto sys = build_coupled(s, 690.0, 1e4);
  MitchellSchaeffer ms;
  const auto stim = left_column(s, 1, 3);
  StepperConfig cfg;
  cfg.dt = 0.02;
  SimulationOptions opts;
  opts.probes = {0, 5};
  const auto a = simulate(sys, ms, stim, 1.0, 2.0, cfg, opts);
  const auto b = simulate(sys, ms, stim, 1.0, 2.0, cfg, opts);
  CHECK((a.final_state.V - b.final_state.V).norm() == 0.0);
  CHECK((a.final_state.z - b.final_state.z).norm() == 0.0);
  CHECK(a.stage_history == b.stage_history);
}

TEST_CASE("strang splitting also keeps the certificate") {
  const auto s = small_array(1, 3);
  const auto sys = build_coupled(s, 690.0, 1e4);
  MitchellSchaeffer ms;
  const auto stim = left_column(s, 1, 3);
  StepperConfig cfg;
  cfg.dt = 0.02;
  cfg.strang = true;
  const auto r = simulate(sys, ms, stim, 1.0, 3.0, cfg, {});
  CHECK_FALSE(r.failed);
  CHECK(r.certificate_ok);
  CHECK(r.final_state.V.maxCoeff() > 0.0);
}

TEST_CASE("invalid stepping parameters") {
  const auto s = small_array(1, 1);
  const auto sys = build_coupled(s, 690.0, 1e4);
  MitchellSchaeffer ms;
  StepperConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(simulate(sys, ms, {}, 1.0, 1.0, cfg, {}), ConfigError);
  cfg.dt = 0.01;
  SimulationOptions opts;
  opts.probes = {s.num_transmembrane_nodes()};
  CHECK_THROWS_AS(simulate(sys, ms, {}, 1.0, 1.0, cfg, opts), ConfigError);
}

}  // TEST_SUITE
