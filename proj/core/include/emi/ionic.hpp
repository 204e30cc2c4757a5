#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace emi {

/// Membrane model: ionic current I_ion(V, z) in uA/cm^2 and state dynamics
/// z' = g(V, z), evaluated node by node. V in mV, t in ms.
class IonicModel {
 public:
  virtual ~IonicModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_states() const = 0;
  virtual double rest_potential() const = 0;
  virtual Eigen::VectorXd rest_state() const = 0;

  virtual double current(double V, const double* z) const = 0;
  virtual void state_rate(double V, const double* z, double* dz) const = 0;

  /// Physiological voltage range the model is meant for.
  virtual std::pair<double, double> voltage_range() const = 0;
  /// Bounds of each state component (infinite when unbounded).
  virtual std::vector<std::pair<double, double>> state_bounds() const = 0;

  virtual std::unique_ptr<IonicModel> clone() const = 0;
};

struct MitchellSchaefferParams {
  double v_rest = -80.0;  // mV
  double v_peak = 20.0;   // mV
  double tau_in = 0.3;    // ms
  double tau_out = 6.0;
  double tau_open = 120.0;
  double tau_close = 150.0;
  double v_gate = 0.13;  // normalized voltage
  double c_ref = 1.0;    // uF/cm^2 converting the normalized rate into a current
};

/// Two-current model with one inactivation gate h in [0, 1].
class MitchellSchaeffer final : public IonicModel {
 public:
  explicit MitchellSchaeffer(MitchellSchaefferParams p = {});

  std::string name() const override { return "mitchell_schaeffer"; }
  std::size_t num_states() const override { return 1; }
  double rest_potential() const override { return p_.v_rest; }
  Eigen::VectorXd rest_state() const override { return Eigen::VectorXd::Ones(1); }
  double current(double V, const double* z) const override;
  void state_rate(double V, const double* z, double* dz) const override;
  std::pair<double, double> voltage_range() const override;
  std::vector<std::pair<double, double>> state_bounds() const override { return {{0.0, 1.0}}; }
  std::unique_ptr<IonicModel> clone() const override;

  const MitchellSchaefferParams& params() const { return p_; }

 private:
  MitchellSchaefferParams p_;
};

struct FitzHughNagumoParams {
  double a = 0.7;
  double b = 0.8;
  double epsilon = 0.08;
  double v_offset = -40.0;  // mV at u = 0
  double v_scale = 35.0;    // mV per unit of u
  double tau = 1.0;         // ms per model time unit
  double c_ref = 1.0;       // uF/cm^2
};

/// Classic FitzHugh-Nagumo dynamics u' = u - u^3/3 - w, w' = eps (u + a - b w)
/// mapped to millivolts by V = v_offset + v_scale u.
class FitzHughNagumo final : public IonicModel {
 public:
  explicit FitzHughNagumo(FitzHughNagumoParams p = {});

  std::string name() const override { return "fitzhugh_nagumo"; }
  std::size_t num_states() const override { return 1; }
  double rest_potential() const override { return p_.v_offset + p_.v_scale * u_rest_; }
  Eigen::VectorXd rest_state() const override { return Eigen::VectorXd::Constant(1, w_rest_); }
  double current(double V, const double* z) const override;
  void state_rate(double V, const double* z, double* dz) const override;
  std::pair<double, double> voltage_range() const override;
  std::vector<std::pair<double, double>> state_bounds() const override;
  std::unique_ptr<IonicModel> clone() const override;

  const FitzHughNagumoParams& params() const { return p_; }

 private:
  FitzHughNagumoParams p_;
  double u_rest_ = 0.0;
  double w_rest_ = 0.0;
};

/// Applied current I_stim(t) = amplitude on the target nodes for t in
/// [start, start + duration), zero otherwise. The current enters the membrane
/// equation like I_ion, so a depolarizing stimulus is negative.
struct Stimulus {
  double amplitude = 0.0;  // uA/cm^2
  double start = 0.0;      // ms
  double duration = 1.0;   // ms
  std::vector<std::size_t> targets;  // indices into the transmembrane nodes

  bool active(double t) const { return t >= start && t < start + duration; }
  void validate(std::size_t num_nodes) const;
};

struct IonicRates {
  Eigen::VectorXd I_ion;
  Eigen::MatrixXd g;  // nodes x states
  Eigen::VectorXd I_stim;
};

/// Nodewise evaluation on every transmembrane node. z is nodes x states.
IonicRates eval_rhs(const IonicModel& model, const Eigen::VectorXd& V, const Eigen::MatrixXd& z,
                    double t, const Stimulus& stim);

std::vector<std::unique_ptr<IonicModel>> builtin_models();
/// Model by name ("mitchell_schaeffer" or "fitzhugh_nagumo").
std::unique_ptr<IonicModel> make_model(const std::string& name);

}  // namespace emi
