#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "emi/curve.hpp"
#include "emi/geometry.hpp"

namespace emi {

/// How the compatibility condition (zero net flux, fixed mean potential) is
/// discretized. Uniform uses the all-ones vector e. Quadrature uses the
/// boundary quadrature weights w scaled to sum M_i, which is the left null
/// vector of P on curves whose interpolated speed is not constant.
enum class Compatibility { Uniform, Quadrature };

/// Discrete Dirichlet-to-Neumann map P of one domain and its rank-one
/// regularization P+ = P + alpha e w^T (w = e in uniform mode).
struct SteklovOperator {
  Eigen::MatrixXd P;
  Eigen::VectorXd weights;  // compatibility vector w; empty means e
  double alpha = 0.0;
  int domain = -1;
  bool unbounded = false;  // exterior of the inner curves without outer boundary
  bool rescaled = false;   // the solve ran on the curve scaled by 2

  std::size_t size() const { return static_cast<std::size_t>(P.rows()); }
  /// w, or e when no weights are set.
  Eigen::VectorXd compatibility() const;
  bool regularized() const { return factor_.rows() > 0; }
  Eigen::MatrixXd P_plus() const;
  /// (P+)^{-1} b using the cached factorization.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve_columns(const Eigen::MatrixXd& b) const;

 private:
  friend SteklovOperator regularize(SteklovOperator op, double alpha);
  Eigen::PartialPivLU<Eigen::MatrixXd> factor_;
};

/// P = V^{-1}(K + I/2) on a closed curve; maps nodal Dirichlet values to the
/// outward normal derivative of the interior harmonic extension.
SteklovOperator interior_dtn(const ParamCurve& curve);

/// Interior map of a domain bounded by several curves; holes[c] marks curves
/// that bound the domain from outside (their normal is flipped).
SteklovOperator interior_dtn(const std::vector<ParamCurve>& curves, const std::vector<bool>& holes);

/// DtN map of the region between the inner curves and `outer`, with zero
/// flux on `outer`. Output is the derivative along the normal pointing out of
/// that region (into the inner curves).
SteklovOperator exterior_dtn(const std::vector<ParamCurve>& inner, const ParamCurve& outer);

/// DtN map of the unbounded exterior of the inner curves.
SteklovOperator unbounded_exterior_dtn(const std::vector<ParamCurve>& inner);

/// Stores P+ = P + alpha e w^T and factorizes it. alpha = 0 is accepted only
/// for unbounded exterior operators.
SteklovOperator regularize(SteklovOperator op, double alpha);

/// Quadrature weights of the curves, concatenated and scaled to sum to their count.
Eigen::VectorXd compatibility_weights(const std::vector<ParamCurve>& curves);

/// ||P||_inf / M_i.
double default_alpha(const SteklovOperator& op);

/// ||P - P^T||_F / ||P||_F.
double symmetry_defect(const Eigen::MatrixXd& P);

/// One regularized operator per domain of the scene, alpha_i = scale * default.
std::vector<SteklovOperator> scene_operators(const Scene& scene, double alpha_scale = 1.0,
                                             Compatibility mode = Compatibility::Quadrature);

}  // namespace emi
