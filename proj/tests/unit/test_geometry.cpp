#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "emi/error.hpp"
#include "emi/geometry.hpp"

using namespace emi;

namespace {

std::vector<Point> circle_points(std::size_t M, double R) {
  std::vector<Point> p;
  for (std::size_t j = 0; j < M; ++j) {
    const double a = 2.0 * std::numbers::pi * j / M;
    p.emplace_back(R * std::cos(a), R * std::sin(a));
  }
  return p;
}

Eigen::VectorXd random_vector(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

void check_topology(const Scene& s) {
  const auto con = connectivity(s);
  const std::size_t M = s.num_nodes();
  const Eigen::VectorXd v = random_vector(M, 7);
  Eigen::VectorXd aa = Eigen::VectorXd::Zero(M), ab = Eigen::VectorXd::Zero(M),
                  bb = Eigen::VectorXd::Zero(M);
  for (std::size_t i = 0; i < s.num_domains(); ++i) {
    aa += con.A[i].apply_transpose(con.A[i].apply(v));
    ab += con.A[i].apply_transpose(con.B[i].apply(v));
    bb += con.B[i].apply_transpose(con.B[i].apply(v));
  }
  CHECK((aa - 2.0 * v).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(ab.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((bb - 2.0 * v).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  Eigen::VectorXd split = con.A0.apply_transpose(con.A0.apply(v));
  if (con.Ag.rows()) split += con.Ag.apply_transpose(con.Ag.apply(v));
  CHECK((split - v).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("interpolant passes through four points on the unit circle") {
  const auto c = ParamCurve::fourier({{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
  CHECK((c.position(0.0) - Point(1, 0)).norm() < 1e-14);
  CHECK((c.position(0.25) - Point(0, 1)).norm() < 1e-14);
}

TEST_CASE("trigonometric interpolation of a circle is exact") {
  const auto c = ParamCurve::fourier(circle_points(64, 2.0));
  double err = 0.0;
  for (int k = 0; k < 1000; ++k) err = std::max(err, std::abs(c.position(k / 1000.0).norm() - 2.0));
  CHECK(err < 1e-12);
  CHECK(c.length() == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-13));
  CHECK(c.curvature(0.3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((c.normal(0.0) - Point(1, 0)).norm() < 1e-13);
}

TEST_CASE("square boundary is interpolated through all nodes") {
  std::vector<Point> p;
  for (int k = 0; k < 8; ++k) p.emplace_back(-1.0 + 2.0 * (k + 0.5) / 8, -1.0);
  for (int k = 0; k < 8; ++k) p.emplace_back(1.0, -1.0 + 2.0 * (k + 0.5) / 8);
  for (int k = 0; k < 8; ++k) p.emplace_back(1.0 - 2.0 * (k + 0.5) / 8, 1.0);
  for (int k = 0; k < 8; ++k) p.emplace_back(-1.0, 1.0 - 2.0 * (k + 0.5) / 8);
  const auto c = ParamCurve::fourier(p);
  for (std::size_t j = 0; j < p.size(); ++j)
    CHECK((c.position(static_cast<double>(j) / p.size()) - p[j]).norm() < 1e-12);
  CHECK(c.signed_area(320) > 0.0);
}

TEST_CASE("clockwise input is reversed and flagged") {
  auto p = circle_points(16, 1.0);
  std::reverse(p.begin() + 1, p.end());
  const auto c = ParamCurve::fourier(p);
  CHECK(c.reversed());
  CHECK(c.signed_area(160) > 0.0);
  CHECK((c.node(0) - p[0]).norm() == 0.0);
}

TEST_CASE("invalid curves are rejected") {
  CHECK_THROWS_AS(ParamCurve::fourier(circle_points(7, 1.0)), GeometryError);
  CHECK_THROWS_AS(ParamCurve::fourier({{0, 0}, {1, 0}}), GeometryError);
  auto p = circle_points(8, 1.0);
  p[3] = p[2];
  CHECK_THROWS_AS(ParamCurve::fourier(p), GeometryError);
  CHECK_THROWS_AS(ParamCurve::fourier(circle_points(8, 1.0),
                                      std::vector<double>{0, .1, .3, .2, .5, .6, .7, .8}),
                  GeometryError);
}

TEST_CASE("single cell scene counts and selections") {
  const auto s = build_single_cell(1, 2, 8);
  CHECK(s.num_nodes() == 8);
  CHECK(s.num_transmembrane_nodes() == 8);
  CHECK(s.num_gap_nodes() == 0);
  CHECK(s.domain_size(1) == 8);
  const auto con = connectivity(s);
  const Eigen::MatrixXd A1 = con.A[1].dense(), B1 = con.B[1].dense();
  const Eigen::MatrixXd A0 = con.A[0].dense(), B0 = con.B[0].dense();
  CHECK((A1 - B1).norm() == 0.0);
  CHECK((A0 + B0).norm() == 0.0);
  check_topology(s);
  CHECK_THROWS_AS(build_single_cell(2, 1, 8), GeometryError);
}

TEST_CASE("annulus scene for the disc study") {
  const auto s = build_single_cell(2, 4, 64);
  REQUIRE(s.outer());
  for (auto l = 0u; l < s.num_nodes(); ++l) CHECK(s.node(l).norm() == doctest::Approx(2.0));
  const auto [lo, hi] = s.outer()->bounding_box();
  CHECK(hi.x() == doctest::Approx(4.0));
  CHECK(lo.y() == doctest::Approx(-4.0).epsilon(1e-3));
}

TEST_CASE("split circle variants") {
  const auto b = build_split_circle(2, 4, 0.0, 0.0, 128);
  CHECK(b.num_cells() == 2);
  CHECK(b.num_gap_nodes() > 0);
  for (const auto& seg : b.segments())
    if (seg.kind() == SegmentKind::GapJunction)
      for (auto l : seg.nodes) CHECK(std::abs(b.node(l).x()) < 1e-14);
  check_topology(b);

  const auto c = build_split_circle(2, 4, 0.4, 0.0, 128);
  CHECK(c.num_gap_nodes() == 0);
  for (auto l = 0u; l < c.num_nodes(); ++l) CHECK(std::abs(c.node(l).x()) >= 0.2 - 1e-12);
  check_topology(c);

  const auto d = build_split_circle(2, 4, 0.4, 0.2, 128);
  CHECK(d.num_gap_nodes() == 0);
  check_topology(d);
  CHECK_THROWS_AS(build_split_circle(2, 4, 0.4, 1.5, 128), GeometryError);
}

TEST_CASE("cell array of the conduction study") {
  CellArraySpec spec;
  const auto s = build_cell_array(spec);
  CHECK(s.num_cells() == 60);
  Point lo(1e9, 1e9), hi(-1e9, -1e9);
  for (auto l = 0u; l < s.num_nodes(); ++l) {
    lo = lo.cwiseMin(s.node(l));
    hi = hi.cwiseMax(s.node(l));
  }
  CHECK(hi.x() - lo.x() <= 3000.0);
  CHECK(hi.x() - lo.x() > 2980.0);
  CHECK(hi.y() - lo.y() <= 40.0);
  const auto [blo, bhi] = s.outer()->bounding_box();
  CHECK(bhi.x() - blo.x() == doctest::Approx(5000.0).epsilon(1e-3));
  CHECK(bhi.y() - blo.y() == doctest::Approx(440.0).epsilon(1e-3));
  check_topology(s);
}

TEST_CASE("one and two cell arrays") {
  CellArraySpec one;
  one.rows = 1;
  one.cols = 1;
  one.cell_width = 10;
  one.bath_width = 200;
  one.bath_length = 400;
  const auto s1 = build_cell_array(one);
  CHECK(s1.num_cells() == 1);
  CHECK(s1.num_gap_nodes() == 0);

  auto two = one;
  two.cols = 2;
  const auto s2 = build_cell_array(two);
  std::size_t gap_segments = 0, gap_nodes = 0;
  for (const auto& seg : s2.segments())
    if (seg.kind() == SegmentKind::GapJunction) {
      ++gap_segments;
      gap_nodes += seg.nodes.size();
    }
  CHECK(gap_segments == 1);
  CHECK(s2.num_gap_nodes() == gap_nodes);
  CHECK(s2.num_nodes() == s2.num_transmembrane_nodes() + gap_nodes);
  check_topology(s2);
}

TEST_CASE("cell array rejects impossible layouts") {
  CellArraySpec spec;
  spec.bath_length = 1000;
  CHECK_THROWS_AS(build_cell_array(spec), GeometryError);
  spec = {};
  spec.junction.kind = JunctionShape::Kind::Sinusoid;
  spec.junction.amplitude = 60;
  spec.junction.frequency = 1;
  CHECK_THROWS_AS(build_cell_array(spec), GeometryError);
}

TEST_CASE("every domain curve interpolates its nodes and is counterclockwise") {
  CellArraySpec spec;
  spec.rows = 2;
  spec.cols = 3;
  spec.bath_length = 600;
  spec.bath_width = 200;
  spec.junction.kind = JunctionShape::Kind::Sinusoid;
  spec.junction.amplitude = 1.0;
  spec.junction.frequency = 3;
  const auto s = build_cell_array(spec);
  check_topology(s);
  for (std::size_t i = 0; i < s.num_domains(); ++i)
    for (const auto& c : s.domain(static_cast<int>(i)).curves) {
      for (std::size_t j = 0; j < c.size(); ++j)
        CHECK((c.position(c.params()[j]) - c.node(j)).norm() < 1e-12);
      CHECK(c.signed_area(10 * c.size()) > 0.0);
    }
}

TEST_CASE("shared nodes are bit-identical across domains") {
  const auto s = build_split_circle(2, 4, 0.0, 0.0, 64);
  for (std::size_t i = 1; i < s.num_domains(); ++i) {
    const auto& d = s.domain(static_cast<int>(i));
    std::size_t k = 0;
    for (const auto& c : d.curves)
      for (std::size_t j = 0; j < c.size(); ++j, ++k) {
        const Point& p = c.node(j);
        const Point& q = s.node(d.global[k]);
        CHECK(p.x() == q.x());
        CHECK(p.y() == q.y());
      }
  }
}

}  // TEST_SUITE
