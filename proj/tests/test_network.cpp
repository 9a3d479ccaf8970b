#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "gridmap/error.hpp"
#include "gridmap/network.hpp"
#include "json.hpp"
#include "synthetic.hpp"

using namespace gridmap;

namespace {

// Random convex polygon (points on a jittered circle) and interior points.
struct Instance {
  Polygon ring;
  std::vector<Point> inner;
};

Instance random_instance(std::mt19937_64& rng, int ring_n, int inner_n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  std::vector<double> angles;
  for (int i = 0; i < ring_n; ++i) angles.push_back(2 * std::numbers::pi * u(rng));
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
  for (double a : angles) in.ring.ring.push_back({10 * std::cos(a), 10 * std::sin(a)});
  while (static_cast<int>(in.inner.size()) < inner_n) {
    const Point p{u(rng) * 20 - 10, u(rng) * 20 - 10};
    if (point_strictly_inside(p, in.ring, 0.05)) in.inner.push_back(p);
  }
  return in;
}

long double incircle_oracle(Point a, Point b, Point c, Point d) {
  // Direct 3x3 determinant of the lifted points.
  const long double m[3][3] = {
      {(long double)a.x - d.x, (long double)a.y - d.y,
       ((long double)a.x - d.x) * ((long double)a.x - d.x) + ((long double)a.y - d.y) * ((long double)a.y - d.y)},
      {(long double)b.x - d.x, (long double)b.y - d.y,
       ((long double)b.x - d.x) * ((long double)b.x - d.x) + ((long double)b.y - d.y) * ((long double)b.y - d.y)},
      {(long double)c.x - d.x, (long double)c.y - d.y,
       ((long double)c.x - d.x) * ((long double)c.x - d.x) + ((long double)c.y - d.y) * ((long double)c.y - d.y)}};
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Relative neighbours by definition: no third point strictly closer to both ends.
bool rng_oracle(const std::vector<Point>& pts, std::size_t a, std::size_t b) {
  const double ab = squared_distance(pts[a], pts[b]);
  for (std::size_t w = 0; w < pts.size(); ++w) {
    if (w == a || w == b) continue;
    if (squared_distance(pts[a], pts[w]) < ab && squared_distance(pts[b], pts[w]) < ab)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("square with one interior point") {
  const Polygon sq{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}};
  const std::vector<Point> inner{{1.0, 0.9}};
  const Triangulation t = build_cdt(inner, sq);
  CHECK(t.triangles.size() == 4);
  CHECK(t.interior_count == 1);
  CHECK(t.vertices[0] == inner[0]);
  CHECK(t.vertices[1] == sq[0]);
  std::size_t constrained = 0;
  for (const auto& e : t.edges()) constrained += e.constrained;
  CHECK(constrained == 4);
}

TEST_CASE("triangulations of random convex polygons are Delaunay and cover the polygon") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const Instance in = random_instance(rng, 6 + trial % 10, trial % 15);
    const Triangulation t = build_cdt(in.inner, in.ring);
    const std::size_t n = in.ring.size(), m = in.inner.size();
    CHECK(t.triangles.size() == n - 2 + 2 * m);
    double sum = 0.0;
    for (const auto& tri : t.triangles) {
      const Polygon p{{t.vertices[tri[0]], t.vertices[tri[1]], t.vertices[tri[2]]}};
      CHECK(signed_area(p) > 0.0);
      sum += signed_area(p);
      // Empty circumcircle against every vertex (convex hull: CDT == DT).
      for (std::size_t v = 0; v < t.vertices.size(); ++v) {
        if (v == tri[0] || v == tri[1] || v == tri[2]) continue;
        CHECK(incircle_oracle(p[0], p[1], p[2], t.vertices[v]) <= 1e-9L);
      }
    }
    CHECK(sum == doctest::Approx(area(in.ring)).epsilon(1e-12));
    // Every ring segment is an edge flagged as constrained.
    std::set<std::pair<std::size_t, std::size_t>> ring_edges;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t a = m + k, b = m + (k + 1) % n;
      ring_edges.insert({std::min(a, b), std::max(a, b)});
    }
    for (const auto& e : t.edges()) CHECK(e.constrained == (ring_edges.count({e.a, e.b}) == 1));
  }
}

TEST_CASE("non-convex boundary: only the interior is triangulated") {
  // U shape; a triangle across the notch would add area.
  const Polygon u{{{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}}};
  const std::vector<Point> inner{{0.5, 2.0}, {2.5, 2.0}, {1.5, 0.5}};
  const Triangulation t = build_cdt(inner, u);
  double sum = 0.0;
  for (const auto& tri : t.triangles)
    sum += signed_area(Polygon{{t.vertices[tri[0]], t.vertices[tri[1]], t.vertices[tri[2]]}});
  CHECK(sum == doctest::Approx(area(u)));
}

TEST_CASE("input errors") {
  const Polygon sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  std::vector<Point> dup{{0.5, 0.5}, {0.5, 0.5}};
  CHECK_THROWS_AS(build_cdt(dup, sq), ValidationError);
  std::vector<Point> outside{{2.0, 0.5}};
  CHECK_THROWS_AS(build_cdt(outside, sq), ValidationError);
  std::vector<Point> on_edge{{0.5, 0.0}};
  CHECK_THROWS_AS(build_cdt(on_edge, sq), ValidationError);
}

TEST_CASE("relative-neighbour pruning agrees with the exhaustive oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance in = random_instance(rng, 5 + trial % 12, 1 + trial % 25);
    const Triangulation t = build_cdt(in.inner, in.ring);
    const LinearNetwork net = extract_network(t, std::span<const RegionPair>{});
    std::set<std::pair<std::size_t, std::size_t>> kept;
    for (const auto& e : net.edges()) kept.insert({e.a, e.b});
    for (const auto& e : t.edges()) {
      const bool expect = e.constrained || rng_oracle(t.vertices, e.a, e.b);
      CHECK(kept.count({e.a, e.b}) == static_cast<std::size_t>(expect));
    }
    // The relative neighbourhood graph is a subgraph of the Delaunay triangulation.
    std::set<std::pair<std::size_t, std::size_t>> cdt_edges;
    for (const auto& e : t.edges()) cdt_edges.insert({e.a, e.b});
    for (std::size_t a = 0; a < t.vertices.size(); ++a)
      for (std::size_t b = a + 1; b < t.vertices.size(); ++b)
        if (rng_oracle(t.vertices, a, b)) CHECK(cdt_edges.count({a, b}) == 1);
    CHECK(net.is_connected());
  }
}

TEST_CASE("RNG test: ties keep the edge") {
  // Witness exactly |ab| from one end (3-4-5 triangle) does not prune.
  const std::vector<double> xs{0.0, 5.0, 3.0}, ys{0.0, 0.0, 4.0};
  CHECK(passes_rng_test({0, 0}, {5, 0}, xs, ys));
  const std::vector<double> xs2{0.0, 1.0, 0.5}, ys2{0.0, 0.0, 0.1};
  CHECK_FALSE(passes_rng_test({0, 0}, {1, 0}, xs2, ys2));
}

TEST_CASE("network of a tiling: ids, flags and adjacency edges") {
  const RegionSet rs = testing::tiling(3, 3);
  const LinearNetwork net = build_network(rs, 1e-6);
  CHECK(net.centroid_count() == 9);
  CHECK(net.boundary_count() == rs.boundary.size());
  for (std::size_t i = 0; i < net.nodes().size(); ++i) {
    CHECK(net.nodes()[i].id == i);
    CHECK((net.nodes()[i].kind == NetNode::Kind::centroid) == (i < 9));
  }
  CHECK(net.boundary_polygon().ring == rs.boundary.ring);
  // Every adjacent pair is linked and flagged.
  for (auto [a, b] : rs.adjacency) {
    const auto& nb = net.neighbors(a);
    CHECK(std::binary_search(nb.begin(), nb.end(), b));
  }
  std::size_t flagged = 0;
  for (const auto& e : net.edges()) {
    CHECK(e.a < e.b);
    CHECK(e.flags != 0);
    CHECK(e.length == doctest::Approx(distance(net.nodes()[e.a].pos, net.nodes()[e.b].pos)));
    flagged += e.has(kRegionAdjacency);
  }
  CHECK(flagged == rs.adjacency.size());
  CHECK_THROWS_AS(net.neighbors(1000), std::out_of_range);
  CHECK(&neighbors(net, 0) == &net.neighbors(0));
}

TEST_CASE("adjacent centroids missing from the triangulation are linked anyway") {
  // Long thin regions: the two far centroids are adjacent but separated by others.
  const Polygon sq{{{0, 0}, {4, 0}, {4, 1}, {0, 1}}};
  const std::vector<Point> inner{{0.5, 0.5}, {3.5, 0.5}, {2.0, 0.5}};
  const Triangulation t = build_cdt(inner, sq);
  const std::vector<RegionPair> adj{{0, 1}};
  const LinearNetwork net = extract_network(t, adj);
  const auto& nb = net.neighbors(0);
  CHECK(std::binary_search(nb.begin(), nb.end(), std::size_t{1}));
}

TEST_CASE("moved_to keeps topology and recomputes lengths") {
  const RegionSet rs = testing::tiling(2, 2);
  const LinearNetwork net = build_network(rs, 1e-6);
  auto pos = net.positions();
  for (auto& p : pos) p = 2.0 * p;
  const LinearNetwork moved = net.moved_to(pos);
  REQUIRE(moved.edges().size() == net.edges().size());
  for (std::size_t i = 0; i < net.edges().size(); ++i)
    CHECK(moved.edges()[i].length == doctest::Approx(2 * net.edges()[i].length));
}

TEST_CASE("GeoJSON dump has one feature per edge") {
  const LinearNetwork net = build_network(testing::tiling(2, 3), 1e-6);
  std::ostringstream os;
  write_network_geojson(net, os);
  const auto doc = nlohmann::json::parse(os.str());
  CHECK(doc["features"].size() == net.edges().size());
}
