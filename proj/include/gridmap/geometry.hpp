#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gridmap {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
  friend Point operator*(Point p, double s) { return {s * p.x, s * p.y}; }
  Point& operator+=(Point o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  friend bool operator==(Point a, Point b) = default;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise.
/// Evaluated in extended precision.
double orient2d(Point a, Point b, Point c);

/// A simple ring, closed implicitly (the first vertex is not repeated at the end).
struct Polygon {
  std::vector<Point> ring;

  std::size_t size() const { return ring.size(); }
  const Point& operator[](std::size_t i) const { return ring[i]; }
  const Point& next(std::size_t i) const { return ring[(i + 1) % ring.size()]; }
};

struct BoundingBox {
  double x_min, y_min, x_max, y_max;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double diagonal() const { return std::hypot(width(), height()); }
};

struct Region {
  std::string id;
  Polygon polygon;
};

/// Index pair (a < b) into RegionSet::regions.
using RegionPair = std::pair<std::size_t, std::size_t>;

/// The input map: regions, their centroids, rook adjacency and the outer boundary ring.
struct RegionSet {
  std::vector<Region> regions;
  std::vector<Point> centroids;
  std::vector<RegionPair> adjacency;  // sorted, a < b
  Polygon boundary;                   // counter-clockwise

  std::size_t size() const { return regions.size(); }
  double total_area() const;
  std::optional<std::size_t> index_of(std::string_view id) const;
};

double signed_area(const Polygon& p);
inline double area(const Polygon& p) { return std::abs(signed_area(p)); }
BoundingBox bounding_box(const Polygon& p);
BoundingBox bounding_box(const std::vector<Point>& pts);

/// Reverses the ring when it is clockwise.
Polygon make_ccw(Polygon p);

/// Throws ValidationError unless: >= 3 vertices, finite coordinates, no consecutive
/// duplicates, non-zero area.
void validate_polygon(const Polygon& p, std::string_view what);

/// Drops a repeated closing vertex and consecutive duplicates.
Polygon clean_ring(std::vector<Point> pts);

/// Area-weighted centroid.
Point compute_centroid(const Polygon& p);

/// Douglas-Peucker simplification of a closed ring. tol == 0 returns the input.
Polygon simplify_boundary(const Polygon& p, double tol);

double point_segment_distance(Point q, Point a, Point b);

/// True when closed segments [a,b] and [c,d] share at least one point.
bool segments_intersect(Point a, Point b, Point c, Point d);

bool polygon_is_simple(const Polygon& p);

/// Containment with boundary points counted as inside.
bool point_in_polygon(Point q, const Polygon& p);

/// Containment excluding a band of width `margin` around the boundary.
bool point_strictly_inside(Point q, const Polygon& p, double margin = 0.0);

/// Area of the intersection of `p` with an axis-aligned box (exact clipping).
double overlap_area_with_box(const Polygon& p, const BoundingBox& box);

/// Moves a point that lies on (or within `dist` of) the boundary inward by `dist`
/// along the inward normal of the nearest edge. Interior points are returned as-is.
Point nudge_inside(Point q, const Polygon& p, double dist);

// ---------------------------------------------------------------------------
// Region-set topology. Vertices are snapped with tolerance
// snap_factor * (bounding-box diagonal) and edges are split at T-junctions
// before rook adjacency and boundary extraction.

inline constexpr double kDefaultSnapFactor = 1e-9;

std::vector<RegionPair> region_adjacency(const std::vector<Region>& regions,
                                         double snap_factor = kDefaultSnapFactor);
std::vector<RegionPair> region_adjacency(const RegionSet& rs);

/// Ring of region edges that appear exactly once. Throws TopologyError unless they
/// chain into exactly one simple ring.
Polygon outer_boundary(const std::vector<Region>& regions,
                       double snap_factor = kDefaultSnapFactor);
Polygon outer_boundary(const RegionSet& rs);

/// Computes centroids, adjacency and the boundary (unless one is supplied).
/// Validates ids and geometry.
RegionSet make_region_set(std::vector<Region> regions,
                          std::optional<Polygon> boundary = std::nullopt);

// ---------------------------------------------------------------------------
// GeoJSON input.

/// Reads a FeatureCollection of Polygon (or MultiPolygon) features.
RegionSet load_regions(std::istream& source, std::optional<Polygon> boundary = std::nullopt);
RegionSet load_regions(std::string_view text, std::optional<Polygon> boundary = std::nullopt);
std::vector<Region> parse_regions(std::string_view text);

/// Reads a boundary polygon from a GeoJSON Polygon geometry, Feature, or a
/// FeatureCollection holding one polygon feature.
Polygon load_boundary(std::istream& source);
Polygon load_boundary(std::string_view text);

}  // namespace gridmap
