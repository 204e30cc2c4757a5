#include "emi/ionic.hpp"

#include <cmath>
#include <limits>

#include "emi/error.hpp"

namespace emi {

MitchellSchaeffer::MitchellSchaeffer(MitchellSchaefferParams p) : p_(p) {
  if (!(p_.v_peak > p_.v_rest)) throw ConfigError("mitchell_schaeffer: v_peak must exceed v_rest");
  if (!(p_.tau_in > 0 && p_.tau_out > 0 && p_.tau_open > 0 && p_.tau_close > 0))
    throw ConfigError("mitchell_schaeffer: time constants must be positive");
}

double MitchellSchaeffer::current(double V, const double* z) const {
  const double span = p_.v_peak - p_.v_rest;
  const double v = (V - p_.v_rest) / span;
  const double h = z[0];
  const double j_in = h * v * v * (1.0 - v) / p_.tau_in;
  const double j_out = -v / p_.tau_out;
  return -p_.c_ref * span * (j_in + j_out);
}

void MitchellSchaeffer::state_rate(double V, const double* z, double* dz) const {
  const double v = (V - p_.v_rest) / (p_.v_peak - p_.v_rest);
  const double h = z[0];
  dz[0] = v < p_.v_gate ? (1.0 - h) / p_.tau_open : -h / p_.tau_close;
}

std::pair<double, double> MitchellSchaeffer::voltage_range() const {
  const double span = p_.v_peak - p_.v_rest;
  return {p_.v_rest - 0.2 * span, p_.v_peak + 0.2 * span};
}

std::unique_ptr<IonicModel> MitchellSchaeffer::clone() const {
  return std::make_unique<MitchellSchaeffer>(*this);
}

FitzHughNagumo::FitzHughNagumo(FitzHughNagumoParams p) : p_(p) {
  if (!(p_.b > 0 && p_.epsilon > 0 && p_.tau > 0 && p_.v_scale > 0))
    throw ConfigError("fitzhugh_nagumo: b, epsilon, tau and v_scale must be positive");
  // Rest state: u - u^3/3 - (u + a)/b = 0 by Newton, started on the
  // hyperpolarized branch.
  double u = -1.2;
  for (int it = 0; it < 100; ++it) {
    const double f = u - u * u * u / 3.0 - (u + p_.a) / p_.b;
    const double df = 1.0 - u * u - 1.0 / p_.b;
    const double step = f / df;
    u -= step;
    if (std::abs(step) < 1e-15) break;
  }
  u_rest_ = u;
  w_rest_ = (u + p_.a) / p_.b;
}

double FitzHughNagumo::current(double V, const double* z) const {
  const double u = (V - p_.v_offset) / p_.v_scale;
  return -p_.c_ref * p_.v_scale * (u - u * u * u / 3.0 - z[0]) / p_.tau;
}

void FitzHughNagumo::state_rate(double V, const double* z, double* dz) const {
  const double u = (V - p_.v_offset) / p_.v_scale;
  dz[0] = p_.epsilon * (u + p_.a - p_.b * z[0]) / p_.tau;
}

std::pair<double, double> FitzHughNagumo::voltage_range() const {
  return {p_.v_offset - 2.5 * p_.v_scale, p_.v_offset + 2.5 * p_.v_scale};
}

std::vector<std::pair<double, double>> FitzHughNagumo::state_bounds() const {
  const double inf = std::numeric_limits<double>::infinity();
  return {{-inf, inf}};
}

std::unique_ptr<IonicModel> FitzHughNagumo::clone() const {
  return std::make_unique<FitzHughNagumo>(*this);
}

void Stimulus::validate(std::size_t num_nodes) const {
  if (!(duration > 0.0)) throw ConfigError("stimulus duration must be positive");
  for (auto k : targets)
    if (k >= num_nodes) throw ConfigError("stimulus target outside the transmembrane nodes");
}

IonicRates eval_rhs(const IonicModel& model, const Eigen::VectorXd& V, const Eigen::MatrixXd& z,
                    double t, const Stimulus& stim) {
  const auto n = V.size();
  const auto ns = static_cast<Eigen::Index>(model.num_states());
  if (z.rows() != n || z.cols() != ns) throw DomainError("eval_rhs: state dimensions mismatch");
  IonicRates r;
  r.I_ion.resize(n);
  r.g.resize(n, ns);
  r.I_stim = Eigen::VectorXd::Zero(n);
  std::vector<double> zk(ns), dz(ns);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index c = 0; c < ns; ++c) zk[c] = z(k, c);
    r.I_ion[k] = model.current(V[k], zk.data());
    model.state_rate(V[k], zk.data(), dz.data());
    bool finite = std::isfinite(r.I_ion[k]);
    for (Eigen::Index c = 0; c < ns; ++c) {
      r.g(k, c) = dz[c];
      finite = finite && std::isfinite(dz[c]);
    }
    if (!finite) throw NumericalError("eval_rhs: non-finite rate at node " + std::to_string(k));
  }
  if (stim.active(t))
    for (auto k : stim.targets) {
      if (static_cast<Eigen::Index>(k) >= n) throw DomainError("eval_rhs: stimulus target out of range");
      r.I_stim[k] = stim.amplitude;
    }
  return r;
}

std::vector<std::unique_ptr<IonicModel>> builtin_models() {
  std::vector<std::unique_ptr<IonicModel>> out;
  out.push_back(std::make_unique<MitchellSchaeffer>());
  out.push_back(std::make_unique<FitzHughNagumo>());
  return out;
}

std::unique_ptr<IonicModel> make_model(const std::string& name) {
  if (name == "mitchell_schaeffer") return std::make_unique<MitchellSchaeffer>();
  if (name == "fitzhugh_nagumo") return std::make_unique<FitzHughNagumo>();
  throw ConfigError("unknown ionic model '" + name + "'");
}

}  // namespace emi
