#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace emi {

using Point = Eigen::Vector2d;

/// Closed planar curve given by the trigonometric interpolant through a set of
/// collocation nodes.
///
/// The interpolant gamma: [0,1) -> R^2 satisfies gamma(t_j) = x_j for every node.
/// With M = 2n nodes it is the real trigonometric polynomial
///
///   a_0 + sum_{k=1}^{n-1} (a_k cos 2 pi k t + b_k sin 2 pi k t) + a_n cos 2 pi n t
///
/// in each coordinate. Nodes are stored counterclockwise; a clockwise input is
/// reversed on construction (keeping x_0 first) and `reversed()` reports it.
class ParamCurve {
 public:
  /// Builds the interpolant. Without `params` the nodes sit at t_j = j/M.
  ///
  /// Throws GeometryError for fewer than 4 nodes, an odd node count, repeated
  /// consecutive nodes (including last/first) or parameters that are not
  /// strictly increasing in [0,1).
  static ParamCurve fourier(std::vector<Point> nodes,
                            std::optional<std::vector<double>> params = std::nullopt);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<double>& params() const { return params_; }
  const Point& node(std::size_t j) const { return nodes_[j]; }

  bool reversed() const { return reversed_; }
  /// True when t_j = j/M up to rounding.
  bool uniform() const { return uniform_; }
  /// max_j (t_{j+1} - t_j) / min_j (t_{j+1} - t_j), periodically.
  double param_ratio() const;

  Point position(double t) const;
  Point derivative(double t) const;
  Point second_derivative(double t) const;
  double speed(double t) const { return derivative(t).norm(); }
  /// Unit outward normal, the tangent rotated clockwise.
  Point normal(double t) const;
  double curvature(double t) const;

  /// gamma'(t_j) and gamma''(t_j) for all nodes, precomputed.
  const std::vector<Point>& node_derivatives() const { return d1_; }
  const std::vector<Point>& node_second_derivatives() const { return d2_; }
  Point node_normal(std::size_t j) const;
  double node_speed(std::size_t j) const { return d1_[j].norm(); }

  /// Trapezoidal arclength weights |gamma'(t_j)| / M (sum = curve length for
  /// uniform parameters).
  Eigen::VectorXd quadrature_weights() const;
  double length() const { return quadrature_weights().sum(); }

  /// Shoelace area of gamma sampled at `samples` equispaced parameters.
  double signed_area(std::size_t samples) const;

  /// Same curve scaled about the origin.
  ParamCurve scaled(double factor) const;

  /// Axis-aligned bounding box of the nodes: (min, max).
  std::pair<Point, Point> bounding_box() const;

 private:
  ParamCurve() = default;
  void fit();
  Point evaluate(double t, int derivative_order) const;

  std::vector<Point> nodes_;
  std::vector<double> params_;
  bool reversed_ = false;
  bool uniform_ = true;

  // Coefficients per coordinate: cos_[0] = a_0, cos_[k] = a_k, sin_[k] = b_k
  // (sin_[0], sin_[n] unused).
  std::vector<Point> cos_;
  std::vector<Point> sin_;

  std::vector<Point> d1_;
  std::vector<Point> d2_;
};

}  // namespace emi
