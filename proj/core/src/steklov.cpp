#include "emi/steklov.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "emi/bem.hpp"
#include "emi/error.hpp"

namespace emi {

namespace {

constexpr double min_rcond = 1e-10;

// Layer operators of all source curves stacked by columns, evaluated at targets.
LayerOperators stacked(const std::vector<ParamCurve>& sources, const std::vector<Point>& targets,
                       const std::vector<double>& normal_sign) {
  std::size_t cols = 0;
  for (const auto& c : sources) cols += c.size();
  LayerOperators out;
  out.V.resize(targets.size(), cols);
  out.K.resize(targets.size(), cols);
  std::size_t off = 0;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const auto& c = sources[k];
    auto op = assemble_layers(c, targets, normal_sign[k]);
    out.V.middleCols(off, c.size()) = op.V;
    out.K.middleCols(off, c.size()) = op.K;
    off += c.size();
  }
  return out;
}

std::vector<Point> all_nodes(const std::vector<ParamCurve>& curves) {
  std::vector<Point> pts;
  for (const auto& c : curves) pts.insert(pts.end(), c.nodes().begin(), c.nodes().end());
  return pts;
}

std::vector<ParamCurve> scaled(const std::vector<ParamCurve>& curves, double f) {
  std::vector<ParamCurve> out;
  for (const auto& c : curves) out.push_back(c.scaled(f));
  return out;
}

// V^{-1}(K + I/2) on the union of `curves`; nullopt when V is near singular.
std::optional<Eigen::MatrixXd> first_kind_dtn(const std::vector<ParamCurve>& curves,
                                              const std::vector<double>& normal_sign) {
  const auto op = stacked(curves, all_nodes(curves), normal_sign);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.V);
  if (!(lu.rcond() > min_rcond)) return std::nullopt;
  Eigen::MatrixXd rhs = op.K;
  rhs.diagonal().array() += 0.5;
  return Eigen::MatrixXd(lu.solve(rhs));
}

std::optional<Eigen::MatrixXd> bounded_exterior(const std::vector<ParamCurve>& inner,
                                                const ParamCurve& outer) {
  const auto gamma = all_nodes(inner);
  const auto& sigma = outer.nodes();
  const Eigen::Index m = static_cast<Eigen::Index>(gamma.size());
  const Eigen::Index s = static_cast<Eigen::Index>(sigma.size());

  // Inner curves carry the normal pointing into the cells.
  const std::vector<double> flip(inner.size(), -1.0);
  const auto gg = stacked(inner, gamma, flip);
  const auto sg = stacked(inner, sigma, flip);
  const auto gs = assemble_layers(outer, gamma);
  const auto ss = assemble_self(outer);

  // Unknowns: Neumann data on the inner curves, Dirichlet data on the outer one.
  Eigen::MatrixXd A(m + s, m + s);
  A.topLeftCorner(m, m) = gg.V;
  A.topRightCorner(m, s) = -gs.K;
  A.bottomLeftCorner(s, m) = sg.V;
  A.bottomRightCorner(s, s) = -ss.K;
  A.bottomRightCorner(s, s).diagonal().array() -= 0.5;

  Eigen::MatrixXd rhs(m + s, m);
  rhs.topRows(m) = gg.K;
  rhs.topRows(m).diagonal().array() += 0.5;
  rhs.bottomRows(s) = sg.K;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (!(lu.rcond() > min_rcond)) return std::nullopt;
  return Eigen::MatrixXd(lu.solve(rhs).topRows(m));
}

}  // namespace

Eigen::VectorXd SteklovOperator::compatibility() const {
  if (weights.size() == 0) return Eigen::VectorXd::Ones(P.rows());
  return weights;
}

Eigen::MatrixXd SteklovOperator::P_plus() const {
  Eigen::MatrixXd out = P;
  if (weights.size() == 0)
    out.array() += alpha;
  else
    out.rowwise() += alpha * weights.transpose();
  return out;
}

Eigen::VectorXd SteklovOperator::solve(const Eigen::VectorXd& b) const {
  if (!regularized()) throw SolverError("steklov operator is not regularized");
  return factor_.solve(b);
}

Eigen::MatrixXd SteklovOperator::solve_columns(const Eigen::MatrixXd& b) const {
  if (!regularized()) throw SolverError("steklov operator is not regularized");
  return factor_.solve(b);
}

SteklovOperator interior_dtn(const ParamCurve& curve) { return interior_dtn({curve}, {false}); }

SteklovOperator interior_dtn(const std::vector<ParamCurve>& curves, const std::vector<bool>& holes) {
  if (curves.empty() || holes.size() != curves.size())
    throw GeometryError("interior_dtn: one hole flag per curve required");
  std::size_t total = 0;
  std::vector<double> sign;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    total += curves[c].size();
    sign.push_back(holes[c] ? -1.0 : 1.0);
  }
  if (total < 8) throw GeometryError("interior_dtn: at least 8 nodes required");
  SteklovOperator op;
  if (auto P = first_kind_dtn(curves, sign)) {
    op.P = std::move(*P);
    return op;
  }
  // Unit logarithmic capacity: the single layer kills a constant. The DtN map
  // of the doubled curve is half the original one.
  auto P = first_kind_dtn(scaled(curves, 2.0), sign);
  if (!P) throw SolverError("interior_dtn: single layer operator is singular");
  op.P = 2.0 * *P;
  op.rescaled = true;
  return op;
}

SteklovOperator exterior_dtn(const std::vector<ParamCurve>& inner, const ParamCurve& outer) {
  if (inner.empty()) throw GeometryError("exterior_dtn: no inner curves");
  // Containment: every inner node strictly inside the outer curve, bounding
  // boxes of inner curves pairwise disjoint.
  const auto [olo, ohi] = outer.bounding_box();
  for (std::size_t a = 0; a < inner.size(); ++a) {
    const auto [lo, hi] = inner[a].bounding_box();
    if (!((lo.array() > olo.array()).all() && (hi.array() < ohi.array()).all()))
      throw GeometryError("exterior_dtn: inner curve " + std::to_string(a) +
                          " is not inside the outer boundary");
    for (std::size_t b = a + 1; b < inner.size(); ++b) {
      const auto [lo2, hi2] = inner[b].bounding_box();
      const bool apart = (hi.array() < lo2.array()).any() || (hi2.array() < lo.array()).any();
      if (!apart) throw GeometryError("exterior_dtn: inner curves intersect");
    }
  }
  SteklovOperator op;
  op.domain = 0;
  if (auto P = bounded_exterior(inner, outer)) {
    op.P = std::move(*P);
    return op;
  }
  auto P = bounded_exterior(scaled(inner, 2.0), outer.scaled(2.0));
  if (!P) throw SolverError("exterior_dtn: block system is singular");
  op.P = 2.0 * *P;
  op.rescaled = true;
  return op;
}

SteklovOperator unbounded_exterior_dtn(const std::vector<ParamCurve>& inner) {
  if (inner.empty()) throw GeometryError("unbounded_exterior_dtn: no inner curves");
  SteklovOperator op;
  op.domain = 0;
  op.unbounded = true;
  const std::vector<double> flip(inner.size(), -1.0);
  if (auto P = first_kind_dtn(inner, flip)) {
    op.P = std::move(*P);
    return op;
  }
  auto P = first_kind_dtn(scaled(inner, 2.0), flip);
  if (!P) throw SolverError("unbounded_exterior_dtn: single layer operator is singular");
  op.P = 2.0 * *P;
  op.rescaled = true;
  return op;
}

SteklovOperator regularize(SteklovOperator op, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("regularize: alpha must be nonnegative");
  if (alpha == 0.0 && !op.unbounded)
    throw DomainError("regularize: alpha = 0 is only valid for the unbounded exterior");
  if (op.weights.size() != 0 && op.weights.size() != op.P.rows())
    throw DomainError("regularize: compatibility weights do not match the operator");
  op.alpha = alpha;
  op.factor_.compute(op.P_plus());
  if (!(op.factor_.rcond() > 1e-14))
    throw SolverError("regularize: regularized operator is singular (rcond " +
                      std::to_string(op.factor_.rcond()) + ")");
  return op;
}

Eigen::VectorXd compatibility_weights(const std::vector<ParamCurve>& curves) {
  Eigen::Index n = 0;
  for (const auto& c : curves) n += static_cast<Eigen::Index>(c.size());
  Eigen::VectorXd w(n);
  Eigen::Index o = 0;
  for (const auto& c : curves) {
    const auto m = static_cast<Eigen::Index>(c.size());
    w.segment(o, m) = c.quadrature_weights();
    o += m;
  }
  return w * (static_cast<double>(n) / w.sum());
}

double default_alpha(const SteklovOperator& op) {
  return op.P.cwiseAbs().rowwise().sum().maxCoeff() / static_cast<double>(op.size());
}

double symmetry_defect(const Eigen::MatrixXd& P) {
  return (P - P.transpose()).norm() / P.norm();
}

std::vector<SteklovOperator> scene_operators(const Scene& scene, double alpha_scale,
                                             Compatibility mode) {
  std::vector<SteklovOperator> ops;
  for (std::size_t i = 0; i < scene.num_domains(); ++i) {
    const auto& d = scene.domain(static_cast<int>(i));
    SteklovOperator op;
    if (i == 0) {
      op = scene.outer() ? exterior_dtn(d.curves, *scene.outer()) : unbounded_exterior_dtn(d.curves);
    } else {
      op = interior_dtn(d.curves, d.holes);
    }
    op.domain = static_cast<int>(i);
    if (mode == Compatibility::Quadrature) op.weights = compatibility_weights(d.curves);
    const double alpha = alpha_scale * default_alpha(op);
    ops.push_back(regularize(std::move(op), alpha));
  }
  return ops;
}

}  // namespace emi
