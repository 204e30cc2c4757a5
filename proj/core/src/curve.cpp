#include "emi/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "emi/error.hpp"

namespace emi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double shoelace(const std::vector<Point>& pts) {
  double area = 0.0;
  const std::size_t m = pts.size();
  for (std::size_t j = 0; j < m; ++j) {
    const Point& a = pts[j];
    const Point& b = pts[(j + 1) % m];
    area += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * area;
}

}  // namespace

ParamCurve ParamCurve::fourier(std::vector<Point> nodes, std::optional<std::vector<double>> params) {
  const std::size_t m = nodes.size();
  if (m < 4) throw GeometryError("fourier_closed_curve: at least 4 nodes required");
  if (m % 2 != 0) throw GeometryError("fourier_closed_curve: node count must be even");

  double scale = 0.0;
  for (const auto& p : nodes) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double dup_tol = 1e-14 * std::max(scale, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    if ((nodes[(j + 1) % m] - nodes[j]).norm() <= dup_tol)
      throw GeometryError("fourier_closed_curve: duplicate consecutive nodes at index " +
                          std::to_string(j));
  }

  ParamCurve c;
  if (params) {
    if (params->size() != m) throw GeometryError("fourier_closed_curve: params/nodes size mismatch");
    for (std::size_t j = 0; j < m; ++j) {
      const double t = (*params)[j];
      if (!(t >= 0.0 && t < 1.0)) throw GeometryError("fourier_closed_curve: params must lie in [0,1)");
      if (j > 0 && !(t > (*params)[j - 1]))
        throw GeometryError("fourier_closed_curve: params must be strictly increasing");
    }
    c.params_ = std::move(*params);
    c.uniform_ = true;
    for (std::size_t j = 0; j < m; ++j)
      if (std::abs(c.params_[j] - double(j) / double(m)) > 1e-14) c.uniform_ = false;
  } else {
    c.params_.resize(m);
    for (std::size_t j = 0; j < m; ++j) c.params_[j] = double(j) / double(m);
  }

  if (shoelace(nodes) < 0.0) {
    if (!c.uniform_)
      throw GeometryError("fourier_closed_curve: clockwise nodes with explicit non-uniform params");
    std::vector<Point> rev(m);
    for (std::size_t j = 0; j < m; ++j) rev[j] = nodes[(m - j) % m];
    nodes = std::move(rev);
    c.reversed_ = true;
  }
  c.nodes_ = std::move(nodes);
  c.fit();
  return c;
}

void ParamCurve::fit() {
  const std::size_t m = nodes_.size();
  const std::size_t n = m / 2;
  cos_.assign(n + 1, Point::Zero());
  sin_.assign(n + 1, Point::Zero());

  if (uniform_) {
    std::vector<double> ct(m), st(m);
    for (std::size_t r = 0; r < m; ++r) {
      ct[r] = std::cos(kTwoPi * double(r) / double(m));
      st[r] = std::sin(kTwoPi * double(r) / double(m));
    }
    for (std::size_t k = 0; k <= n; ++k) {
      Point a = Point::Zero(), b = Point::Zero();
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t r = (k * j) % m;
        a += ct[r] * nodes_[j];
        b += st[r] * nodes_[j];
      }
      const double w = (k == 0 || k == n) ? 1.0 / double(m) : 2.0 / double(m);
      cos_[k] = w * a;
      if (k != 0 && k != n) sin_[k] = w * b;
    }
  } else {
    // Real trigonometric Vandermonde system at the given parameters.
    Eigen::MatrixXd basis(m, m);
    for (std::size_t j = 0; j < m; ++j) {
      const double t = params_[j];
      std::size_t col = 0;
      basis(j, col++) = 1.0;
      for (std::size_t k = 1; k < n; ++k) {
        basis(j, col++) = std::cos(kTwoPi * double(k) * t);
        basis(j, col++) = std::sin(kTwoPi * double(k) * t);
      }
      basis(j, col++) = std::cos(kTwoPi * double(n) * t);
    }
    Eigen::MatrixXd rhs(m, 2);
    for (std::size_t j = 0; j < m; ++j) rhs.row(j) = nodes_[j].transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) throw GeometryError("fourier_closed_curve: interpolation system is singular");
    const Eigen::MatrixXd coef = lu.solve(rhs);
    std::size_t row = 0;
    cos_[0] = coef.row(row++).transpose();
    for (std::size_t k = 1; k < n; ++k) {
      cos_[k] = coef.row(row++).transpose();
      sin_[k] = coef.row(row++).transpose();
    }
    cos_[n] = coef.row(row++).transpose();
  }

  d1_.resize(m);
  d2_.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    d1_[j] = evaluate(params_[j], 1);
    d2_[j] = evaluate(params_[j], 2);
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (d1_[j].norm() == 0.0)
      throw GeometryError("fourier_closed_curve: degenerate parametrization at node " + std::to_string(j));
  }
}

Point ParamCurve::evaluate(double t, int order) const {
  const std::size_t n = cos_.size() - 1;
  Point out = order == 0 ? cos_[0] : Point::Zero();
  for (std::size_t k = 1; k <= n; ++k) {
    const double w = kTwoPi * double(k);
    const double c = std::cos(w * t);
    const double s = std::sin(w * t);
    switch (order) {
      case 0:
        out += c * cos_[k] + s * sin_[k];
        break;
      case 1:
        out += w * (-s * cos_[k] + c * sin_[k]);
        break;
      default:
        out += -w * w * (c * cos_[k] + s * sin_[k]);
        break;
    }
  }
  return out;
}

Point ParamCurve::position(double t) const { return evaluate(t, 0); }
Point ParamCurve::derivative(double t) const { return evaluate(t, 1); }
Point ParamCurve::second_derivative(double t) const { return evaluate(t, 2); }

Point ParamCurve::normal(double t) const {
  const Point d = derivative(t);
  return Point(d.y(), -d.x()) / d.norm();
}

Point ParamCurve::node_normal(std::size_t j) const {
  const Point& d = d1_[j];
  return Point(d.y(), -d.x()) / d.norm();
}

double ParamCurve::curvature(double t) const {
  const Point d = derivative(t);
  const Point dd = second_derivative(t);
  return (d.x() * dd.y() - d.y() * dd.x()) / std::pow(d.norm(), 3);
}

double ParamCurve::param_ratio() const {
  const std::size_t m = params_.size();
  double lo = 1.0, hi = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double dt = (j + 1 < m) ? params_[j + 1] - params_[j] : params_[0] + 1.0 - params_[j];
    lo = std::min(lo, dt);
    hi = std::max(hi, dt);
  }
  return hi / lo;
}

Eigen::VectorXd ParamCurve::quadrature_weights() const {
  const std::size_t m = nodes_.size();
  Eigen::VectorXd w(m);
  for (std::size_t j = 0; j < m; ++j) w[j] = d1_[j].norm() / double(m);
  return w;
}

double ParamCurve::signed_area(std::size_t samples) const {
  std::vector<Point> pts(samples);
  for (std::size_t j = 0; j < samples; ++j) pts[j] = position(double(j) / double(samples));
  return shoelace(pts);
}

ParamCurve ParamCurve::scaled(double factor) const {
  ParamCurve c = *this;
  for (auto& p : c.nodes_) p *= factor;
  for (auto& p : c.cos_) p *= factor;
  for (auto& p : c.sin_) p *= factor;
  for (auto& p : c.d1_) p *= factor;
  for (auto& p : c.d2_) p *= factor;
  return c;
}

std::pair<Point, Point> ParamCurve::bounding_box() const {
  Point lo = nodes_.front(), hi = nodes_.front();
  for (const auto& p : nodes_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

}  // namespace emi
