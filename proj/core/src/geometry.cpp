#include "emi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "emi/error.hpp"

namespace emi {

namespace detail {

constexpr double pi = std::numbers::pi;

// Smooth parametrized arc u in [0,1] -> R^2.
struct Piece {
  std::function<Point(double)> at;
  std::function<Point(double)> tangent;
};

Piece line(Point a, Point b) {
  return {[a, b](double u) -> Point { return a + u * (b - a); },
          [a, b](double) -> Point { return b - a; }};
}

Piece arc(Point c, double r, double th0, double th1) {
  const double span = th1 - th0;
  return {[=](double u) -> Point {
            const double th = th0 + u * span;
            return c + r * Point(std::cos(th), std::sin(th));
          },
          [=](double u) -> Point {
            const double th = th0 + u * span;
            return r * span * Point(-std::sin(th), std::cos(th));
          }};
}

// x = x_base + a sin(2 pi k (y - y0) / width), traversed from y_from to y_to.
Piece sine_edge(double x_base, double y0, double width, double amp, double freq, double y_from,
                double y_to) {
  const double w = 2.0 * pi * freq / width;
  return {[=](double u) -> Point {
            const double y = y_from + u * (y_to - y_from);
            return {x_base + amp * std::sin(w * (y - y0)), y};
          },
          [=](double u) -> Point {
            const double y = y_from + u * (y_to - y_from);
            const double dy = y_to - y_from;
            return {amp * w * std::cos(w * (y - y0)) * dy, dy};
          }};
}

Piece mirrored_x(const Piece& p) {
  auto flip = [](Point q) { return Point(-q.x(), q.y()); };
  return {[p, flip](double u) { return flip(p.at(1.0 - u)); },
          [p, flip](double u) { return Point(-flip(p.tangent(1.0 - u))); }};
}

// Gauss-Legendre 5 point rule on [0,1].
constexpr double gl_x[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                            0.76923465505284155, 0.95308992296933200};
constexpr double gl_w[5] = {0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
                            0.23931433524968324, 0.11846344252809454};
constexpr int panels = 64;

double length_between(const Piece& p, double u0, double u1) {
  double s = 0.0;
  const double h = (u1 - u0) / panels;
  for (int k = 0; k < panels; ++k) {
    const double a = u0 + k * h;
    for (int q = 0; q < 5; ++q) s += gl_w[q] * h * p.tangent(a + gl_x[q] * h).norm();
  }
  return s;
}

// Parameter u with arclength s from the start of the piece.
double invert_length(const Piece& p, double s, double total) {
  double lo = 0.0, hi = 1.0;
  double u = s / total;
  for (int it = 0; it < 100; ++it) {
    const double f = length_between(p, 0.0, u) - s;
    if (std::abs(f) < 1e-14 * std::max(1.0, total)) break;
    if (f > 0) hi = u; else lo = u;
    double next = u - f / p.tangent(u).norm();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  return u;
}

std::size_t even_count(double length, double h) {
  const auto half = static_cast<long>(std::lround(length / (2.0 * h)));
  return static_cast<std::size_t>(std::max(1L, half)) * 2;
}

struct RunSpec {
  std::vector<Piece> pieces;
  int i, j;
  std::size_t count;
  bool closed;
};

struct LoopSpec {
  int domain;
  std::vector<std::pair<int, bool>> runs;  // (run, reversed)
};

}  // namespace detail

using namespace detail;

// Collects runs and domain loops, then numbers nodes and fits curves.
class SceneBuilder {
 public:
  int add_run(std::vector<Piece> pieces, int i, int j, std::size_t count, bool closed = false) {
    if (i <= j || j < 0) throw TopologyError("interface owner pair must satisfy i > j >= 0");
    runs_.push_back({std::move(pieces), i, j, count, closed});
    return static_cast<int>(runs_.size()) - 1;
  }
  void add_loop(int domain, std::vector<std::pair<int, bool>> runs) {
    loops_.push_back({domain, std::move(runs)});
  }
  void set_outer(ParamCurve c) { outer_ = std::move(c); }
  std::size_t membrane_count() const {
    std::size_t n = 0;
    for (const auto& r : runs_) n += r.j == 0 ? r.count : 0;
    return n;
  }

  Scene build(int num_domains, const Conductivities& sigma);

 private:
  std::vector<RunSpec> runs_;
  std::vector<LoopSpec> loops_;
  std::optional<ParamCurve> outer_;
};

Scene SceneBuilder::build(int num_domains, const Conductivities& sigma) {
  Scene s;
  s.sigma_.assign(num_domains, sigma.intracellular);
  s.sigma_[0] = sigma.extracellular;

  // Node coordinates per run, canonical order.
  std::vector<std::vector<Point>> coords(runs_.size());
  std::vector<std::vector<double>> arcs(runs_.size());
  std::vector<double> lengths(runs_.size());
  for (std::size_t r = 0; r < runs_.size(); ++r) {
    const auto& run = runs_[r];
    std::vector<double> plen;
    for (const auto& p : run.pieces) plen.push_back(length_between(p, 0.0, 1.0));
    double L = 0.0;
    for (double l : plen) L += l;
    lengths[r] = L;
    const double h = L / static_cast<double>(run.count);
    std::size_t piece = 0;
    double offset = 0.0;
    for (std::size_t k = 0; k < run.count; ++k) {
      const double target = (static_cast<double>(k) + 0.5) * h;
      while (piece + 1 < plen.size() && target > offset + plen[piece]) offset += plen[piece++];
      const double u = invert_length(run.pieces[piece], target - offset, plen[piece]);
      coords[r].push_back(run.pieces[piece].at(u));
      arcs[r].push_back(target);
    }
  }

  // Transmembrane runs first, then gap junctions.
  std::vector<std::vector<std::size_t>> global(runs_.size());
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t r = 0; r < runs_.size(); ++r) {
      const bool membrane = runs_[r].j == 0;
      if (membrane != (pass == 0)) continue;
      for (std::size_t k = 0; k < coords[r].size(); ++k) {
        global[r].push_back(s.nodes_.size());
        s.nodes_.push_back(coords[r][k]);
        s.node_run_.push_back(static_cast<int>(r));
      }
    }
    if (pass == 0) s.m0_ = s.nodes_.size();
  }

  std::map<std::pair<int, int>, std::size_t> seg_index;
  for (std::size_t r = 0; r < runs_.size(); ++r) {
    const std::pair<int, int> key{runs_[r].i, runs_[r].j};
    auto [it, fresh] = seg_index.try_emplace(key, s.segments_.size());
    if (fresh) s.segments_.push_back({key.first, key.second, {}});
    auto& seg = s.segments_[it->second].nodes;
    seg.insert(seg.end(), global[r].begin(), global[r].end());
    s.runs_.push_back({runs_[r].i, runs_[r].j, lengths[r], runs_[r].closed, global[r], arcs[r]});
  }
  // Keep segments in global order: transmembrane first.
  std::stable_sort(s.segments_.begin(), s.segments_.end(),
                   [](const Segment& a, const Segment& b) { return a.j == 0 && b.j != 0; });

  s.domains_.resize(num_domains);
  for (const auto& loop : loops_) {
    std::vector<Point> pts;
    std::vector<std::size_t> idx;
    for (auto [r, rev] : loop.runs) {
      const auto& run = runs_.at(r);
      if (run.i != loop.domain && run.j != loop.domain)
        throw TopologyError("loop of domain " + std::to_string(loop.domain) +
                            " uses a run it does not touch");
      const auto& g = global[r];
      for (std::size_t k = 0; k < g.size(); ++k) {
        const std::size_t l = rev ? g[g.size() - 1 - k] : g[k];
        idx.push_back(l);
        pts.push_back(s.nodes_[l]);
      }
    }
    auto curve = ParamCurve::fourier(pts);
    if (curve.reversed())
      throw GeometryError("boundary loop of domain " + std::to_string(loop.domain) +
                          " is not counterclockwise");
    auto& d = s.domains_.at(loop.domain);
    d.curves.push_back(std::move(curve));
    d.holes.push_back(loop.domain == 0);
    d.global.insert(d.global.end(), idx.begin(), idx.end());
  }
  s.outer_ = outer_;
  // A cell bounded by several curves lies inside the largest one.
  for (std::size_t i = 1; i < s.domains_.size(); ++i) {
    auto& d = s.domains_[i];
    if (d.curves.size() < 2) continue;
    std::size_t big = 0;
    for (std::size_t c = 0; c < d.curves.size(); ++c) {
      d.holes[c] = true;
      if (d.curves[c].signed_area(256) > d.curves[big].signed_area(256)) big = c;
    }
    d.holes[big] = false;
  }

  std::vector<int> seen(s.nodes_.size(), 0);
  for (const auto& d : s.domains_)
    for (auto l : d.global) ++seen[l];
  for (std::size_t l = 0; l < seen.size(); ++l)
    if (seen[l] != 2)
      throw TopologyError("node " + std::to_string(l) + " belongs to " + std::to_string(seen[l]) +
                          " domains");
  return s;
}

Scene Scene::with_conductivities(const Conductivities& c) const {
  Scene s = *this;
  for (std::size_t i = 0; i < s.sigma_.size(); ++i) s.sigma_[i] = i == 0 ? c.extracellular : c.intracellular;
  return s;
}

std::pair<int, int> Scene::node_domains(std::size_t l) const {
  const auto& r = runs_.at(node_run_.at(l));
  return {r.i, r.j};
}

std::vector<std::size_t> Scene::cell_membrane_nodes(int cell) const {
  std::vector<std::size_t> out;
  for (const auto& seg : segments_)
    if (seg.j == 0 && seg.i == cell) out.insert(out.end(), seg.nodes.begin(), seg.nodes.end());
  std::sort(out.begin(), out.end());
  return out;
}

double Scene::max_param_ratio() const {
  double r = 1.0;
  for (const auto& d : domains_)
    for (const auto& c : d.curves) r = std::max(r, c.param_ratio());
  return r;
}

Eigen::VectorXd Selection::apply(const Eigen::VectorXd& global) const {
  if (static_cast<std::size_t>(global.size()) != num_columns)
    throw DomainError("selection applied to a vector of the wrong size");
  Eigen::VectorXd out(rows());
  for (std::size_t k = 0; k < rows(); ++k) out[k] = signs[k] * global[columns[k]];
  return out;
}

Eigen::VectorXd Selection::apply_transpose(const Eigen::VectorXd& local) const {
  if (static_cast<std::size_t>(local.size()) != rows())
    throw DomainError("selection transpose applied to a vector of the wrong size");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_columns);
  for (std::size_t k = 0; k < rows(); ++k) out[columns[k]] += signs[k] * local[k];
  return out;
}

Eigen::MatrixXd Selection::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows(), num_columns);
  for (std::size_t k = 0; k < rows(); ++k) m(k, columns[k]) = signs[k];
  return m;
}

Connectivity connectivity(const Scene& scene) {
  const std::size_t M = scene.num_nodes();
  Connectivity c;
  std::vector<int> seen(M, 0);
  for (std::size_t i = 0; i < scene.num_domains(); ++i) {
    Selection a, b;
    a.num_columns = b.num_columns = M;
    for (auto l : scene.domain(static_cast<int>(i)).global) {
      if (l >= M) throw TopologyError("domain references a node outside the scene");
      ++seen[l];
      const auto [hi, lo] = scene.node_domains(l);
      if (hi != static_cast<int>(i) && lo != static_cast<int>(i))
        throw TopologyError("domain " + std::to_string(i) + " lists node " + std::to_string(l) +
                            " of a foreign interface");
      a.columns.push_back(l);
      a.signs.push_back(1.0);
      b.columns.push_back(l);
      b.signs.push_back(hi == static_cast<int>(i) ? 1.0 : -1.0);
    }
    c.A.push_back(std::move(a));
    c.B.push_back(std::move(b));
  }
  for (std::size_t l = 0; l < M; ++l)
    if (seen[l] != 2)
      throw TopologyError("node " + std::to_string(l) + " assigned to " + std::to_string(seen[l]) +
                          " domains");
  c.A0.num_columns = c.Ag.num_columns = M;
  for (std::size_t l = 0; l < M; ++l) {
    auto& sel = scene.node_domains(l).second == 0 ? c.A0 : c.Ag;
    sel.columns.push_back(l);
    sel.signs.push_back(1.0);
  }
  return c;
}

ParamCurve fourier_closed_curve(std::vector<Point> nodes, std::optional<std::vector<double>> params) {
  return ParamCurve::fourier(std::move(nodes), std::move(params));
}

namespace {

ParamCurve circle_curve(double radius, std::size_t count) {
  std::vector<Point> pts;
  for (std::size_t k = 0; k < count; ++k) {
    const double th = 2.0 * pi * static_cast<double>(k) / static_cast<double>(count);
    pts.emplace_back(radius * std::cos(th), radius * std::sin(th));
  }
  return ParamCurve::fourier(std::move(pts));
}

std::size_t auto_outer_nodes(std::size_t m0) {
  std::size_t n = std::clamp<std::size_t>(m0, 16, 256);
  return n + (n % 2);
}

}  // namespace

Scene build_single_cell(double inner_radius, double outer_radius, std::size_t M,
                        const Conductivities& sigma, std::size_t outer_nodes) {
  if (!(inner_radius > 0.0) || !(outer_radius > inner_radius))
    throw GeometryError("single cell requires 0 < inner radius < outer radius");
  if (M < 4 || M % 2) throw GeometryError("node count must be even and at least 4");
  if (outer_nodes % 2) throw GeometryError("outer node count must be even");

  SceneBuilder b;
  // Closed circle; the phase puts node 0 at angle 0.
  const double phase = -pi / static_cast<double>(M);
  const int r = b.add_run({arc({0, 0}, inner_radius, phase, phase + 2.0 * pi)}, 1, 0, M, true);
  b.add_loop(1, {{r, false}});
  b.add_loop(0, {{r, false}});
  b.set_outer(circle_curve(outer_radius, outer_nodes ? outer_nodes : auto_outer_nodes(M)));
  return b.build(2, sigma);
}

Scene build_split_circle(double radius, double outer_radius, double gap, double fillet,
                         std::size_t nodes_target, const Conductivities& sigma,
                         std::size_t outer_nodes) {
  if (!(radius > 0.0)) throw GeometryError("radius must be positive");
  if (gap < 0.0 || fillet < 0.0) throw GeometryError("gap and fillet must be nonnegative");
  if (!(outer_radius > radius + 0.5 * gap))
    throw GeometryError("outer circle must contain both cells");
  if (fillet > 0.0 && gap == 0.0) throw GeometryError("fillets require separated cells");
  if (fillet > 0.0 && 2.0 * fillet >= radius)
    throw GeometryError("fillet radius must be below half the straight edge half-length");
  if (nodes_target < 8) throw GeometryError("too few nodes requested");
  if (outer_nodes % 2) throw GeometryError("outer node count must be even");

  SceneBuilder b;
  const double R = radius;
  if (gap == 0.0) {
    const double h = (2.0 * pi * R + 2.0 * R) / static_cast<double>(nodes_target);
    const auto na = even_count(pi * R, h);
    const auto ns = even_count(2.0 * R, h);
    const int right = b.add_run({arc({0, 0}, R, -pi / 2, pi / 2)}, 2, 0, na);
    const int left = b.add_run({arc({0, 0}, R, pi / 2, 3 * pi / 2)}, 1, 0, na);
    const int junction = b.add_run({line({0, R}, {0, -R})}, 2, 1, ns);
    b.add_loop(2, {{right, false}, {junction, false}});
    b.add_loop(1, {{left, false}, {junction, true}});
    b.add_loop(0, {{right, false}, {left, false}});
  } else if (fillet == 0.0) {
    const double h = 2.0 * (pi * R + 2.0 * R) / static_cast<double>(nodes_target);
    const auto na = even_count(pi * R, h);
    const auto ns = even_count(2.0 * R, h);
    const double c = 0.5 * gap;
    const int ra = b.add_run({arc({c, 0}, R, -pi / 2, pi / 2)}, 2, 0, na);
    const int rf = b.add_run({line({c, R}, {c, -R})}, 2, 0, ns);
    const int la = b.add_run({arc({-c, 0}, R, pi / 2, 3 * pi / 2)}, 1, 0, na);
    const int lf = b.add_run({line({-c, -R}, {-c, R})}, 1, 0, ns);
    b.add_loop(2, {{ra, false}, {rf, false}});
    b.add_loop(1, {{la, false}, {lf, false}});
    b.add_loop(0, {{ra, false}, {rf, false}});
    b.add_loop(0, {{la, false}, {lf, false}});
  } else {
    const double r = fillet;
    const double c = 0.5 * gap;
    const double yc = std::sqrt((R - r) * (R - r) - r * r);
    const double tf = std::atan2(yc, r);
    // Right half, counterclockwise from the bottom tangent point.
    std::vector<Piece> right{arc({c, 0}, R, -tf, tf), arc({c + r, yc}, r, tf, pi),
                             line({c, yc}, {c, -yc}), arc({c + r, -yc}, r, pi, 2 * pi - tf)};
    std::vector<Piece> left;
    for (auto it = right.rbegin(); it != right.rend(); ++it) left.push_back(mirrored_x(*it));
    double L = 0.0;
    for (const auto& p : right) L += length_between(p, 0.0, 1.0);
    const double h = 2.0 * L / static_cast<double>(nodes_target);
    const auto n = even_count(L, h);
    const int rr = b.add_run(std::move(right), 2, 0, n, true);
    const int lr = b.add_run(std::move(left), 1, 0, n, true);
    b.add_loop(2, {{rr, false}});
    b.add_loop(1, {{lr, false}});
    b.add_loop(0, {{rr, false}});
    b.add_loop(0, {{lr, false}});
  }
  b.set_outer(circle_curve(outer_radius,
                           outer_nodes ? outer_nodes : auto_outer_nodes(b.membrane_count())));
  return b.build(3, sigma);
}

Scene build_concentric_cells(double inner_radius, double ring_radius, double outer_radius,
                             std::size_t inner_nodes, const Conductivities& sigma,
                             std::size_t outer_nodes) {
  if (!(inner_radius > 0.0) || !(ring_radius > inner_radius) || !(outer_radius > ring_radius))
    throw GeometryError("concentric cells require 0 < inner < ring < outer radius");
  if (inner_nodes < 4 || inner_nodes % 2) throw GeometryError("node count must be even and at least 4");
  if (outer_nodes % 2) throw GeometryError("outer node count must be even");
  const double h = 2.0 * pi * inner_radius / static_cast<double>(inner_nodes);
  const std::size_t ring_nodes = even_count(2.0 * pi * ring_radius, h);

  SceneBuilder b;
  auto circle = [](double r, std::size_t n) {
    const double phase = -pi / static_cast<double>(n);
    return arc({0, 0}, r, phase, phase + 2.0 * pi);
  };
  const int membrane = b.add_run({circle(ring_radius, ring_nodes)}, 2, 0, ring_nodes, true);
  const int junction = b.add_run({circle(inner_radius, inner_nodes)}, 2, 1, inner_nodes, true);
  b.add_loop(2, {{membrane, false}});
  b.add_loop(2, {{junction, false}});
  b.add_loop(1, {{junction, false}});
  b.add_loop(0, {{membrane, false}});
  b.set_outer(circle_curve(outer_radius, outer_nodes ? outer_nodes : auto_outer_nodes(ring_nodes)));
  return b.build(3, sigma);
}

Scene build_cell_array(const CellArraySpec& spec, const Conductivities& sigma) {
  const int rows = spec.rows, cols = spec.cols;
  const double cw = spec.cell_width, cl = spec.cell_length;
  if (rows < 1 || cols < 1) throw GeometryError("cell array needs at least one row and column");
  if (!(cw > 0.0) || !(cl > 0.0)) throw GeometryError("cell dimensions must be positive");
  if (!(spec.dx > 0.0)) throw GeometryError("node spacing must be positive");
  if (!(spec.bath_length > cols * cl) || !(spec.bath_width > rows * cw))
    throw GeometryError("bath does not contain the cell block");
  const bool sine = spec.junction.kind == JunctionShape::Kind::Sinusoid && cols > 1;
  if (sine && std::abs(spec.junction.amplitude) >= 0.5 * cl)
    throw GeometryError("junction amplitude must be below half the cell length");
  if (spec.junction.kind == JunctionShape::Kind::Sinusoid && spec.junction.frequency < 0.0)
    throw GeometryError("junction frequency must be nonnegative");

  auto cell = [cols](int r, int c) { return 1 + r * cols + c; };
  SceneBuilder b;
  auto add_piece_run = [&](Piece p, int i, int j) {
    const double L = length_between(p, 0.0, 1.0);
    return b.add_run({std::move(p)}, i, j, even_count(L, spec.dx));
  };

  // Edge runs per cell, with a flag telling whether the cell walks it reversed.
  struct Edge { int run; bool rev; };
  std::vector<Edge> bottom(rows * cols), right(rows * cols), top(rows * cols), left(rows * cols);
  auto at = [cols](int r, int c) { return r * cols + c; };

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x0 = c * cl, y0 = r * cw;
      const int i = cell(r, c);
      if (r == 0) bottom[at(r, c)] = {add_piece_run(line({x0, y0}, {x0 + cl, y0}), i, 0), false};
      if (r == rows - 1)
        top[at(r, c)] = {add_piece_run(line({x0 + cl, y0 + cw}, {x0, y0 + cw}), i, 0), false};
      if (c == 0) left[at(r, c)] = {add_piece_run(line({x0, y0 + cw}, {x0, y0}), i, 0), false};
      if (c == cols - 1)
        right[at(r, c)] = {add_piece_run(line({x0 + cl, y0}, {x0 + cl, y0 + cw}), i, 0), false};
      if (r > 0) {
        // Junction with the cell below, owned by this (higher index) cell.
        const int run = add_piece_run(line({x0, y0}, {x0 + cl, y0}), i, cell(r - 1, c));
        bottom[at(r, c)] = {run, false};
        top[at(r - 1, c)] = {run, true};
      }
      if (c > 0) {
        Piece p = sine ? sine_edge(x0, y0, cw, spec.junction.amplitude, spec.junction.frequency,
                                   y0 + cw, y0)
                       : line({x0, y0 + cw}, {x0, y0});
        const int run = add_piece_run(std::move(p), i, cell(r, c - 1));
        left[at(r, c)] = {run, false};
        right[at(r, c - 1)] = {run, true};
      }
    }
  }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const auto k = at(r, c);
      b.add_loop(cell(r, c), {{bottom[k].run, bottom[k].rev},
                              {right[k].run, right[k].rev},
                              {top[k].run, top[k].rev},
                              {left[k].run, left[k].rev}});
    }
  std::vector<std::pair<int, bool>> outer_loop;
  for (int c = 0; c < cols; ++c) outer_loop.push_back({bottom[at(0, c)].run, false});
  for (int r = 0; r < rows; ++r) outer_loop.push_back({right[at(r, cols - 1)].run, false});
  for (int c = cols - 1; c >= 0; --c) outer_loop.push_back({top[at(rows - 1, c)].run, false});
  for (int r = rows - 1; r >= 0; --r) outer_loop.push_back({left[at(r, 0)].run, false});
  b.add_loop(0, outer_loop);

  // Rectangular bath boundary centred on the block.
  const double odx = spec.outer_dx > 0.0 ? spec.outer_dx : 4.0 * spec.dx;
  const Point centre(0.5 * cols * cl, 0.5 * rows * cw);
  const Point lo = centre - 0.5 * Point(spec.bath_length, spec.bath_width);
  const Point hi = centre + 0.5 * Point(spec.bath_length, spec.bath_width);
  const Point corners[4] = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  std::vector<Point> outer;
  for (int side = 0; side < 4; ++side) {
    const Point a = corners[side], e = corners[(side + 1) % 4];
    const auto n = even_count((e - a).norm(), odx);
    for (std::size_t k = 0; k < n; ++k)
      outer.push_back(a + (static_cast<double>(k) + 0.5) / static_cast<double>(n) * (e - a));
  }
  b.set_outer(ParamCurve::fourier(std::move(outer)));
  return b.build(rows * cols + 1, sigma);
}

}  // namespace emi
