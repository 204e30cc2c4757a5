#pragma once

#include <vector>

#include <Eigen/Core>

#include "emi/curve.hpp"

namespace emi {

/// Collocation matrices of the single layer V and double layer K of one
/// source curve, evaluated at a set of target points.
struct LayerOperators {
  Eigen::MatrixXd V;
  Eigen::MatrixXd K;
  bool self = false;  // targets are the source nodes
};

/// Fundamental solution of the 2D Laplacian, -ln|x - y| / (2 pi).
double greens(const Point& x, const Point& y);

/// Normal derivative in y: <x - y, n_y> / (2 pi |x - y|^2).
double greens_normal(const Point& x, const Point& y, const Point& n_y);

/// V_kj = int G(x_k, gamma(t)) L_j(t) |gamma'(t)| dt and the same for K with
/// the normal derivative kernel.
///
/// Targets that coincide with source nodes get the logarithmic splitting
/// quadrature (and the curvature limit for K); all other targets use the
/// trapezoidal rule. `normal_sign` = -1 flips the normal used by K, as needed
/// when the curve bounds the domain from outside.
///
/// Throws GeometryError for a source without equispaced parameters and
/// DomainError for a target on the curve that is not a collocation node.
LayerOperators assemble_layers(const ParamCurve& source, const std::vector<Point>& targets,
                               double normal_sign = 1.0);

/// Self-interaction shorthand: targets are the source nodes.
LayerOperators assemble_self(const ParamCurve& source, double normal_sign = 1.0);

}  // namespace emi
