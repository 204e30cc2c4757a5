#include "emi/bem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "emi/error.hpp"

namespace emi {

namespace {

constexpr double pi = std::numbers::pi;

// Weights of the product rule for int_0^{2 pi} ln(4 sin^2((s_k - s)/2)) f(s) ds,
// indexed by the node offset k - j modulo M.
std::vector<double> log_weights(std::size_t M) {
  const std::size_t n = M / 2;
  std::vector<double> R(M);
  for (std::size_t m = 0; m < M; ++m) {
    double s = 0.0;
    for (std::size_t p = 1; p < n; ++p)
      s += std::cos(2.0 * pi * double(p * m % M) / double(M)) / double(p);
    s += ((m % 2) ? -1.0 : 1.0) / double(2 * n);
    R[m] = -4.0 * pi / double(M) * s;
  }
  return R;
}

}  // namespace

double greens(const Point& x, const Point& y) {
  const double r2 = (x - y).squaredNorm();
  if (r2 == 0.0) throw DomainError("greens: x and y coincide");
  return -std::log(r2) / (4.0 * pi);
}

double greens_normal(const Point& x, const Point& y, const Point& n_y) {
  const Point d = x - y;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) throw DomainError("greens_normal: x and y coincide");
  return d.dot(n_y) / (2.0 * pi * r2);
}

namespace {

// Distance from x to the curve near parameter t, by Newton on
// (gamma(t) - x) . gamma'(t) = 0 with steps capped at one node spacing.
double distance_near(const ParamCurve& c, const Point& x, double t) {
  const double cap = 1.0 / static_cast<double>(c.size());
  double best = (c.position(t) - x).norm();
  for (int it = 0; it < 30; ++it) {
    const Point g = c.position(t) - x, d1 = c.derivative(t), d2 = c.second_derivative(t);
    const double f = g.dot(d1), df = d1.squaredNorm() + g.dot(d2);
    double step = df > 0.0 ? f / df : 0.0;
    step = std::clamp(step, -cap, cap);
    t -= step;
    best = std::min(best, (c.position(t) - x).norm());
    if (std::abs(step) < 1e-15) break;
  }
  return best;
}

}  // namespace

LayerOperators assemble_layers(const ParamCurve& source, const std::vector<Point>& targets,
                               double normal_sign) {
  if (!source.uniform())
    throw GeometryError("assemble_layers: source curve must use equispaced parameters");
  const std::size_t M = source.size();
  const std::size_t T = targets.size();
  const auto& y = source.nodes();
  const auto& d1 = source.node_derivatives();
  const auto& d2 = source.node_second_derivatives();

  std::vector<double> speed(M);
  std::vector<Point> nu(M);
  for (std::size_t j = 0; j < M; ++j) {
    speed[j] = d1[j].norm();
    nu[j] = normal_sign * source.node_normal(j);
  }
  double scale = 0.0;
  for (const auto& p : y) scale = std::max(scale, p.norm());
  const double touch = 1e-12 * std::max(scale, 1.0);

  LayerOperators op;
  op.V.resize(T, M);
  op.K.resize(T, M);
  op.self = T == M;

  std::vector<double> R;
  for (std::size_t k = 0; k < T; ++k) {
    const Point& x = targets[k];
    // Is x one of the source nodes?
    std::size_t hit = M;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < M; ++j) {
      const double d = (x - y[j]).norm();
      if (d < nearest) { nearest = d; if (d == 0.0) hit = j; }
    }
    if (hit == M) {
      std::size_t jn = 0;
      for (std::size_t j = 1; j < M; ++j)
        if ((x - y[j]).norm() < (x - y[jn]).norm()) jn = j;
      if (nearest < 2.0 * speed[jn] / double(M) &&
          distance_near(source, x, source.params()[jn]) < touch)
        throw DomainError("assemble_layers: target " + std::to_string(k) +
                          " lies on the source curve but is not a node");
    }
    if (!(op.self && hit == k)) op.self = false;

    if (hit == M) {
      for (std::size_t j = 0; j < M; ++j) {
        const double w = speed[j] / double(M);
        op.V(k, j) = greens(x, y[j]) * w;
        op.K(k, j) = greens_normal(x, y[j], nu[j]) * w;
      }
      continue;
    }

    if (R.empty()) R = log_weights(M);
    const std::size_t c = hit;
    for (std::size_t j = 0; j < M; ++j) {
      const std::size_t off = (c + M - j) % M;
      double h;
      if (j == c) {
        h = -std::log(speed[j] * speed[j] / (4.0 * pi * pi)) / (4.0 * pi);
      } else {
        const double sn = std::sin(pi * double(off) / double(M));
        h = -std::log((x - y[j]).squaredNorm() / (4.0 * sn * sn)) / (4.0 * pi);
      }
      op.V(k, j) = (-R[off] / (4.0 * pi) + 2.0 * pi / double(M) * h) * speed[j] / (2.0 * pi);
      const double w = speed[j] / double(M);
      if (j == c)
        op.K(k, j) = d2[j].dot(nu[j]) / (2.0 * speed[j] * speed[j]) / (2.0 * pi) * w;
      else
        op.K(k, j) = greens_normal(x, y[j], nu[j]) * w;
    }
  }
  return op;
}

LayerOperators assemble_self(const ParamCurve& source, double normal_sign) {
  return assemble_layers(source, source.nodes(), normal_sign);
}

}  // namespace emi
