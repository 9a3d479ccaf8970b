#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "gridmap/error.hpp"
#include "gridmap/geometry.hpp"
#include "gridmap/log.hpp"
#include "synthetic.hpp"

using namespace gridmap;

namespace {

Polygon rect(double x0, double y0, double x1, double y1) {
  return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

// Captures warnings for the lifetime of the guard.
struct WarningCapture {
  std::vector<std::string> messages;
  WarningCapture() {
    set_warning_sink([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { set_warning_sink(nullptr); }
};

}  // namespace

TEST_CASE("signed area and orientation") {
  const Polygon sq = rect(0, 0, 2, 3);
  CHECK(signed_area(sq) == doctest::Approx(6.0));
  Polygon cw = sq;
  std::reverse(cw.ring.begin(), cw.ring.end());
  CHECK(signed_area(cw) == doctest::Approx(-6.0));
  CHECK(signed_area(make_ccw(cw)) == doctest::Approx(6.0));
}

TEST_CASE("centroid of an L matches the area-weighted rectangle decomposition") {
  // L = [0,2]x[0,1] union [0,1]x[1,2]
  const Polygon l{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}};
  const double a1 = 2.0, a2 = 1.0;
  const Point c1{1.0, 0.5}, c2{0.5, 1.5};
  const Point expect = (1.0 / (a1 + a2)) * (a1 * c1 + a2 * c2);
  const Point got = compute_centroid(l);
  CHECK(got.x == doctest::Approx(expect.x).epsilon(1e-14));
  CHECK(got.y == doctest::Approx(expect.y).epsilon(1e-14));
}

TEST_CASE("clean_ring and validation") {
  const Polygon p = clean_ring({{0, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 0}});
  CHECK(p.size() == 3);
  CHECK_THROWS_AS(validate_polygon(Polygon{{{0, 0}, {1, 0}}}, "x"), ValidationError);
  CHECK_THROWS_AS(validate_polygon(Polygon{{{0, 0}, {1, 0}, {2, 0}}}, "x"), ValidationError);
  CHECK_THROWS_AS(validate_polygon(Polygon{{{0, 0}, {1, 0}, {1, 0}, {0, 1}}}, "x"),
                  ValidationError);
  CHECK_NOTHROW(validate_polygon(rect(0, 0, 1, 1), "x"));
}

TEST_CASE("segment intersection") {
  CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  CHECK(segments_intersect({0, 0}, {1, 0}, {1, 0}, {2, 5}));    // shared endpoint
  CHECK(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));    // collinear overlap
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));
  CHECK(segments_intersect({0, 0}, {2, 0}, {1, 0}, {1, 1}));    // T touch
}

TEST_CASE("simplicity") {
  CHECK(polygon_is_simple(rect(0, 0, 1, 1)));
  CHECK_FALSE(polygon_is_simple(Polygon{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}));  // bow tie
  // Ring that touches itself at a vertex.
  CHECK_FALSE(polygon_is_simple(Polygon{{{0, 0}, {2, 0}, {1, 1}, {2, 2}, {0, 2}, {1, 1}}}));
}

TEST_CASE("point in polygon counts the boundary as inside") {
  const Polygon sq = rect(0, 0, 1, 1);
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK(point_in_polygon({0.0, 0.5}, sq));
  CHECK(point_in_polygon({1.0, 1.0}, sq));
  CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));
  CHECK_FALSE(point_strictly_inside({0.0, 0.5}, sq));
  CHECK(point_strictly_inside({0.5, 0.5}, sq, 0.1));
  CHECK_FALSE(point_strictly_inside({0.05, 0.5}, sq, 0.1));
}

TEST_CASE("box overlap equals the interval product for rectangles") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 200; ++t) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    if (b - a < 1e-3 || d - c < 1e-3) continue;
    double e = u(rng), f = u(rng), g = u(rng), h = u(rng);
    if (e > f) std::swap(e, f);
    if (g > h) std::swap(g, h);
    const double ox = std::max(0.0, std::min(b, f) - std::max(a, e));
    const double oy = std::max(0.0, std::min(d, h) - std::max(c, g));
    CHECK(overlap_area_with_box(rect(a, c, b, d), {e, g, f, h}) ==
          doctest::Approx(ox * oy).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("box overlap is additive over a partition of the box") {
  const Polygon star{{{0, -3}, {1, -1}, {3, 0}, {1, 1}, {0, 3}, {-1, 1}, {-3, 0}, {-1, -1}}};
  const double whole = overlap_area_with_box(star, {-4, -4, 4, 4});
  CHECK(whole == doctest::Approx(area(star)));
  const double parts = overlap_area_with_box(star, {-4, -4, 0.3, 0.7}) +
                       overlap_area_with_box(star, {0.3, -4, 4, 0.7}) +
                       overlap_area_with_box(star, {-4, 0.7, 0.3, 4}) +
                       overlap_area_with_box(star, {0.3, 0.7, 4, 4});
  CHECK(parts == doctest::Approx(whole).epsilon(1e-12));
}

TEST_CASE("Douglas-Peucker simplification") {
  const Polygon p{{{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};
  SUBCASE("zero tolerance is the identity") { CHECK(simplify_boundary(p, 0.0).ring == p.ring); }
  SUBCASE("collinear vertices go") {
    const Polygon s = simplify_boundary(p, 1e-9);
    CHECK(s.size() == 4);
    CHECK(area(s) == doctest::Approx(4.0));
  }
  SUBCASE("collapse keeps a 3-vertex hull and warns") {
    WarningCapture w;
    const Polygon s = simplify_boundary(p, 100.0);
    CHECK(s.size() == 3);
    CHECK(w.messages.size() == 1);
  }
  SUBCASE("negative tolerance is rejected") {
    CHECK_THROWS_AS(simplify_boundary(p, -1.0), ValidationError);
  }
}

TEST_CASE("simplification keeps a subsequence and never grows with tolerance") {
  const RegionSet disc = testing::wiggly_disc(8, 400);
  std::size_t prev = disc.boundary.size() + 1;
  for (double tol : {0.0, 0.01, 0.05, 0.1, 0.3, 1.0}) {
    const Polygon s = simplify_boundary(disc.boundary, tol);
    CHECK(s.size() <= prev);
    prev = s.size();
    // Every kept vertex is an input vertex, in the same cyclic order.
    std::size_t k = 0;
    for (const Point& q : s.ring) {
      while (k < disc.boundary.size() && !(disc.boundary[k] == q)) ++k;
      CHECK(k < disc.boundary.size());
    }
    // Every dropped vertex lies within tol of the simplified ring.
    for (const Point& q : disc.boundary.ring) {
      double best = 1e300;
      for (std::size_t i = 0; i < s.size(); ++i)
        best = std::min(best, point_segment_distance(q, s[i], s.next(i)));
      CHECK(best <= tol + 1e-12);
    }
  }
}

TEST_CASE("rook adjacency of a k x k tiling") {
  for (int k : {1, 2, 3, 5}) {
    const RegionSet rs = testing::tiling(k, k);
    CHECK(rs.adjacency.size() == static_cast<std::size_t>(2 * k * (k - 1)));
    for (auto [a, b] : rs.adjacency) {
      CHECK(a < b);
      const Point d = rs.centroids[a] - rs.centroids[b];
      CHECK(std::abs(d.x) + std::abs(d.y) == doctest::Approx(1.0));
    }
    CHECK(area(rs.boundary) == doctest::Approx(k * k));
    CHECK(signed_area(rs.boundary) > 0);
    CHECK(polygon_is_simple(rs.boundary));
    CHECK(rs.boundary.size() == static_cast<std::size_t>(4 * k));  // lattice points kept
  }
}

TEST_CASE("T-junctions are noded: one big square beside two small ones") {
  std::vector<Region> regions{{"big", rect(0, 0, 2, 2)},
                              {"lo", rect(2, 0, 3, 1)},
                              {"hi", rect(2, 1, 3, 2)}};
  const RegionSet rs = make_region_set(regions);
  std::set<RegionPair> adj(rs.adjacency.begin(), rs.adjacency.end());
  CHECK(adj == std::set<RegionPair>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(area(rs.boundary) == doctest::Approx(6.0));
}

TEST_CASE("diagonal contact is not adjacency") {
  std::vector<Region> regions{
      {"a", rect(0, 0, 1, 1)}, {"b", rect(1, 0, 2, 1)}, {"c", rect(1, 1, 2, 2)}};
  const auto adj = region_adjacency(regions);
  CHECK(adj == std::vector<RegionPair>{{0, 1}, {1, 2}});
}

TEST_CASE("holes and islands are topology errors") {
  std::vector<Region> ring;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!(r == 1 && c == 1)) ring.push_back({std::to_string(r * 3 + c), rect(c, r, c + 1, r + 1)});
  CHECK_THROWS_AS(outer_boundary(ring), TopologyError);
  std::vector<Region> islands{{"a", rect(0, 0, 1, 1)}, {"b", rect(5, 5, 6, 6)}};
  CHECK_THROWS_AS(outer_boundary(islands), TopologyError);
  std::vector<Region> pinched{{"a", rect(0, 0, 1, 1)}, {"b", rect(1, 1, 2, 2)}};
  CHECK_THROWS_AS(outer_boundary(pinched), TopologyError);
}

TEST_CASE("near-coincident vertices are snapped") {
  std::vector<Region> regions{{"a", rect(0, 0, 1, 1)},
                              {"b", Polygon{{{1 + 1e-13, 0}, {2, 0}, {2, 1}, {1, 1 - 1e-13}}}}};
  const RegionSet rs = make_region_set(regions);
  CHECK(rs.adjacency.size() == 1);
  CHECK(area(rs.boundary) == doctest::Approx(2.0));
}

TEST_CASE("region set validation") {
  CHECK_THROWS_AS(make_region_set({}), ValidationError);
  std::vector<Region> dup{{"a", rect(0, 0, 1, 1)}, {"a", rect(1, 0, 2, 1)}};
  try {
    make_region_set(dup);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.stage() == "load");
  }
}

TEST_CASE("GeoJSON loading") {
  const std::string ok = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"name":"west"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
    {"type":"Feature","id":7,"properties":{},"geometry":{"type":"Polygon","coordinates":[[[1,0],[2,0],[2,1],[1,1],[1,0]]]}}]})";
  const RegionSet rs = load_regions(std::string_view(ok));
  REQUIRE(rs.size() == 2);
  CHECK(rs.regions[0].id == "west");
  CHECK(rs.regions[1].id == "7");
  CHECK(rs.index_of("7") == std::optional<std::size_t>(1));
  CHECK(rs.adjacency.size() == 1);

  SUBCASE("malformed JSON") { CHECK_THROWS_AS(load_regions(std::string_view("{")), ParseError); }
  SUBCASE("missing id") {
    const std::string s = R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})";
    CHECK_THROWS_AS(load_regions(std::string_view(s)), ValidationError);
  }
  SUBCASE("holes") {
    const std::string s = R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"id":"h"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4],[0,0]],[[1,1],[2,1],[2,2],[1,1]]]}}]})";
    CHECK_THROWS_AS(load_regions(std::string_view(s)), TopologyError);
  }
  SUBCASE("multipolygon keeps the largest part with a warning") {
    WarningCapture w;
    const std::string s = R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"id":"m"},"geometry":{"type":"MultiPolygon","coordinates":[[[[0,0],[1,0],[1,1],[0,0]]],[[[5,5],[8,5],[8,8],[5,8],[5,5]]]]}}]})";
    const RegionSet m = load_regions(std::string_view(s));
    CHECK(area(m.regions[0].polygon) == doctest::Approx(9.0));
    CHECK(w.messages.size() == 1);
  }
  SUBCASE("explicit boundary") {
    const Polygon b = load_boundary(R"({"type":"Polygon","coordinates":[[[0,0],[0,1],[2,1],[2,0],[0,0]]]})");
    CHECK(signed_area(b) > 0);  // made counter-clockwise
    const RegionSet with = load_regions(std::string_view(ok), b);
    CHECK(area(with.boundary) == doctest::Approx(2.0));
  }
}
