#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "emi/curve.hpp"

namespace emi {

enum class SegmentKind { Transmembrane, GapJunction };

/// Interface Gamma_ij between domains i > j. Domain 0 is the extracellular space.
struct Segment {
  int i = 0;
  int j = 0;
  std::vector<std::size_t> nodes;  // global indices

  SegmentKind kind() const { return j == 0 ? SegmentKind::Transmembrane : SegmentKind::GapJunction; }
};

/// A maximal smooth piece of an interface, discretized with equispaced (in
/// arclength) nodes that avoid its endpoints. Runs carry the bookkeeping that
/// lets two resolutions of the same geometry be compared node against node.
struct Run {
  int i = 0;
  int j = 0;
  double length = 0.0;
  bool closed = false;
  std::vector<std::size_t> nodes;  // global indices in canonical order
  std::vector<double> arclength;   // position of each node along the run
};

/// Boundary of a single domain as one or more closed curves. Local node k of
/// the domain is node k of the concatenation of `curves`.
struct DomainBoundary {
  std::vector<ParamCurve> curves;
  std::vector<bool> holes;          // curve bounds the domain from outside
  std::vector<std::size_t> global;  // local -> global node index

  std::size_t size() const { return global.size(); }
};

struct Conductivities {
  double extracellular = 20.0;  // mS/cm
  double intracellular = 3.0;   // mS/cm
};

/// Multi-domain topology: domains 0..N, the M shared collocation nodes and
/// the optional outer boundary of the extracellular domain.
///
/// Global numbering places every transmembrane node (Gamma_0) before every
/// gap-junction node (Gamma_g). A scene is immutable once built.
class Scene {
 public:
  std::size_t num_cells() const { return domains_.size() - 1; }
  std::size_t num_domains() const { return domains_.size(); }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_transmembrane_nodes() const { return m0_; }
  std::size_t num_gap_nodes() const { return nodes_.size() - m0_; }
  std::size_t domain_size(int i) const { return domains_.at(i).size(); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(std::size_t l) const { return nodes_[l]; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Run>& runs() const { return runs_; }
  const DomainBoundary& domain(int i) const { return domains_.at(i); }
  const std::optional<ParamCurve>& outer() const { return outer_; }

  double sigma(int i) const { return sigma_.at(i); }
  const std::vector<double>& sigmas() const { return sigma_; }
  Scene with_conductivities(const Conductivities& c) const;

  /// Pair (i, j), i > j, of the interface carrying global node l.
  std::pair<int, int> node_domains(std::size_t l) const;
  /// Index into runs() of the run carrying global node l.
  int node_run(std::size_t l) const { return node_run_.at(l); }
  /// Global indices of the transmembrane nodes belonging to cell i.
  std::vector<std::size_t> cell_membrane_nodes(int cell) const;
  /// Largest ratio of parameter spacings over all domain curves.
  double max_param_ratio() const;

 private:
  friend class SceneBuilder;

  std::vector<Point> nodes_;
  std::vector<int> node_run_;
  std::vector<Segment> segments_;
  std::vector<Run> runs_;
  std::vector<DomainBoundary> domains_;
  std::vector<double> sigma_;
  std::optional<ParamCurve> outer_;
  std::size_t m0_ = 0;
};

/// Sparse matrix with exactly one entry (+1 or -1) per row.
struct Selection {
  std::vector<std::size_t> columns;
  std::vector<double> signs;
  std::size_t num_columns = 0;

  std::size_t rows() const { return columns.size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& global) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& local) const;
  Eigen::MatrixXd dense() const;
};

/// Boolean selections A_i, signed selections B_i and the Gamma_0 / Gamma_g
/// restrictions A_0, A_g.
struct Connectivity {
  std::vector<Selection> A;
  std::vector<Selection> B;
  Selection A0;
  Selection Ag;
};

Connectivity connectivity(const Scene& scene);

/// Closed curve through the given nodes (t_j = j/M unless params are given).
ParamCurve fourier_closed_curve(std::vector<Point> nodes,
                                std::optional<std::vector<double>> params = std::nullopt);

/// One circular cell of radius `inner_radius` with M nodes, inside a bath
/// bounded by the circle of radius `outer_radius`.
Scene build_single_cell(double inner_radius, double outer_radius, std::size_t M,
                        const Conductivities& sigma = {}, std::size_t outer_nodes = 0);

/// The circle of radius `radius` split by x_1 = 0 into two cells.
///
/// gap == 0: the halves share a vertical gap junction. gap > 0: the halves are
/// translated apart horizontally by `gap` and isolated. fillet > 0 (requires
/// gap > 0): the two corners of each half are replaced by tangent circular arcs
/// of that radius. `nodes_target` is the approximate number of interface nodes M.
Scene build_split_circle(double radius, double outer_radius, double gap, double fillet,
                         std::size_t nodes_target, const Conductivities& sigma = {},
                         std::size_t outer_nodes = 0);

/// Disc cell r < inner_radius (domain 1) enclosed by a ring cell
/// inner_radius < r < ring_radius (domain 2) in a circular bath. The circle
/// r = inner_radius is a closed gap junction; `inner_nodes` sit on it and the
/// membrane gets the same spacing.
Scene build_concentric_cells(double inner_radius, double ring_radius, double outer_radius,
                             std::size_t inner_nodes, const Conductivities& sigma = {},
                             std::size_t outer_nodes = 0);

struct JunctionShape {
  enum class Kind { Flat, Sinusoid };
  Kind kind = Kind::Flat;
  double amplitude = 0.0;  // um
  double frequency = 0.0;  // periods across the cell width
};

struct CellArraySpec {
  int rows = 2;
  int cols = 30;
  double cell_width = 20.0;    // c_w, um
  double cell_length = 100.0;  // c_l, um
  double bath_width = 440.0;
  double bath_length = 5000.0;
  JunctionShape junction;
  double dx = 10.0;        // target node spacing on interfaces, um
  double outer_dx = 0.0;   // node spacing on the bath boundary; 0 selects 4 dx
};

/// rows x cols rectangular cells, bottom-left vertex of cell (r, c) at
/// (c * c_l, r * c_w), inside a rectangular bath centred on the block.
/// Cell (r, c) is domain 1 + r * cols + c.
Scene build_cell_array(const CellArraySpec& spec, const Conductivities& sigma = {});

}  // namespace emi
