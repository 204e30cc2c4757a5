#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "emi/geometry.hpp"
#include "emi/steklov.hpp"

namespace emi {

/// Saddle system of one cell in a bath:
///   [F e; w^T 0] (lambda; beta_1) = (V_m; 0),
///   F = -(sigma_1^{-1} (P_1+)^{-1} + sigma_0^{-1} (P_0+)^{-1}).
///
/// `flux_scale` multiplies every conductivity; it converts sigma * du/dn to
/// the units of lambda (1e4 for mS/cm, mV, um -> uA/cm^2).
class UnicellSystem {
 public:
  UnicellSystem(const Scene& scene, const std::vector<SteklovOperator>& ops,
                double flux_scale = 1.0);

  struct Solution {
    Eigen::VectorXd lambda;
    double beta = 0.0;
  };
  Solution solve(const Eigen::VectorXd& Vm) const;

  const Eigen::MatrixXd& F() const { return F_; }
  const Eigen::MatrixXd& matrix() const { return S_; }

 private:
  Eigen::MatrixXd F_;
  Eigen::MatrixXd S_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Reduced system for the transmembrane and gap-junction currents of a
/// multicell scene:
///
///   [F00        F0g   G0] [lambda_0]   [V_m]
///   [Fg0  Fgg - I/kappa Gg] [lambda_g] = [ 0 ]
///   [H0^T      Hg^T    0 ] [beta    ]   [ 0 ]
///
/// with F = -sum_i sigma_i^{-1} B_i^T (P_i+)^{-1} B_i and G = (B_i^T e_i)_i.
/// The constraint rows use H = (B_i^T w_i)_i in place of G^T, where w_i is the
/// compatibility vector of cell i (H = G in uniform mode).
/// The lambda_g rows are dropped when the scene has no gap junctions.
class CoupledSystem {
 public:
  CoupledSystem(const Scene& scene, std::vector<SteklovOperator> ops, double kappa,
                double flux_scale = 1.0);

  struct Solution {
    Eigen::VectorXd lambda0;
    Eigen::VectorXd lambda_g;
    Eigen::VectorXd beta;    // beta_1..beta_N
    Eigen::VectorXd lambda;  // A0^T lambda0 + Ag^T lambda_g
  };
  Solution solve(const Eigen::VectorXd& Vm) const;

  /// Transmembrane current lambda_0 induced by the transmembrane voltage.
  Eigen::VectorXd psi(const Eigen::VectorXd& Vm) const;

  struct Potentials {
    std::vector<Eigen::VectorXd> u;  // u_0..u_N in domain-local order
    Eigen::VectorXd beta;            // beta_0 = 0, beta_1..beta_N
  };
  /// u_i = -sigma_i^{-1} (P_i+)^{-1} B_i lambda + beta_i e_i.
  Potentials recover_all_potentials(const Solution& s) const;
  Potentials recover_all_potentials(const Eigen::VectorXd& Vm) const {
    return recover_all_potentials(solve(Vm));
  }

  /// Psi as a dense M0 x M0 matrix (one solve per column).
  Eigen::MatrixXd psi_matrix() const;

  const Scene& scene() const { return scene_; }
  const Connectivity& connectivity() const { return conn_; }
  const std::vector<SteklovOperator>& operators() const { return ops_; }
  const Eigen::MatrixXd& F() const { return F_; }
  const Eigen::MatrixXd& G() const { return G_; }
  const Eigen::MatrixXd& H() const { return H_; }
  const Eigen::MatrixXd& matrix() const { return S_; }
  double kappa() const { return kappa_; }
  double flux_scale() const { return flux_scale_; }
  /// sigma_i times the flux scale.
  double conductance(int i) const { return flux_scale_ * scene_.sigma(i); }
  std::size_t num_transmembrane() const { return m0_; }
  std::size_t num_gap() const { return mg_; }

 private:
  Scene scene_;
  Connectivity conn_;
  std::vector<SteklovOperator> ops_;
  double kappa_;
  double flux_scale_;
  std::size_t m0_, mg_, n_;
  Eigen::MatrixXd F_, G_, H_, S_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Convenience: Steklov operators with default alpha and the coupled system.
CoupledSystem build_coupled(const Scene& scene, double kappa, double flux_scale = 1.0,
                            double alpha_scale = 1.0,
                            Compatibility mode = Compatibility::Quadrature);

}  // namespace emi
