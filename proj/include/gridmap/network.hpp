#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gridmap/geometry.hpp"

namespace gridmap {

/// Triangulation of a polygon plus interior points. Vertex numbering: interior
/// points first (0..m-1), then the constraint ring in ring order (m..m+n-1).
struct Triangulation {
  std::vector<Point> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;  // counter-clockwise
  std::size_t interior_count = 0;

  struct Edge {
    std::size_t a, b;  // a < b
    bool constrained;  // lies on the constraint ring
  };
  /// Unique undirected edges, sorted by (a, b).
  std::vector<Edge> edges() const;
};

/// Constrained Delaunay triangulation of the constraint ring and the interior points.
/// Every ring segment is an edge; only the polygon interior is triangulated.
/// Throws ValidationError for coincident points or points not strictly inside.
Triangulation build_cdt(std::span<const Point> interior, const Polygon& constraint);

enum EdgeFlag : std::uint8_t {
  kConstrainedBoundary = 1u << 0,
  kRegionAdjacency = 1u << 1,
  kRelativeNeighbor = 1u << 2,
};

struct NetNode {
  enum class Kind { centroid, boundary };
  std::size_t id;
  Kind kind;
  std::size_t ref;  // region index for centroids, ring position for boundary nodes
  Point pos;
};

struct NetEdge {
  std::size_t a, b;  // a < b
  double length;
  std::uint8_t flags;

  bool has(EdgeFlag f) const { return (flags & f) != 0; }
};

/// Centroid nodes (ids 0..M-1, in region order) and boundary nodes (ids M..M+N-1,
/// in ring order) joined by flagged edges.
class LinearNetwork {
 public:
  LinearNetwork() = default;
  LinearNetwork(std::vector<NetNode> nodes, std::vector<NetEdge> edges);

  const std::vector<NetNode>& nodes() const { return nodes_; }
  const std::vector<NetEdge>& edges() const { return edges_; }
  std::size_t centroid_count() const { return centroid_count_; }
  std::size_t boundary_count() const { return nodes_.size() - centroid_count_; }

  /// Sorted neighbour ids. Throws std::out_of_range for an unknown id.
  const std::vector<std::size_t>& neighbors(std::size_t node) const;
  const std::vector<std::vector<std::size_t>>& adjacency() const { return adjacency_; }

  bool is_connected() const;
  std::vector<Point> positions() const;
  std::vector<Point> centroid_positions() const;
  Polygon boundary_polygon() const;

  /// Same topology at new node positions; edge lengths recomputed.
  LinearNetwork moved_to(std::span<const Point> positions) const;

 private:
  std::vector<NetNode> nodes_;
  std::vector<NetEdge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::size_t centroid_count_ = 0;
};

/// Relative-neighbour test: no w with max(|aw|, |bw|) < |ab| among `witnesses`.
bool passes_rng_test(Point a, Point b, std::span<const double> xs, std::span<const double> ys);

/// Keeps CDT edges that lie on the boundary ring, join adjacent regions' centroids,
/// or pass the relative-neighbour test against all nodes. Adjacent centroid pairs
/// missing from the CDT are added. `adjacency` holds centroid index pairs.
LinearNetwork extract_network(const Triangulation& cdt, std::span<const RegionPair> adjacency);
LinearNetwork extract_network(const Triangulation& cdt, const RegionSet& rs);

/// build_cdt over rs.centroids and rs.boundary followed by extract_network. Centroids
/// on (or within nudge distance of) the boundary are moved inward by `nudge` first.
LinearNetwork build_network(const RegionSet& rs, double nudge);
LinearNetwork build_network(std::span<const Point> centroids, const Polygon& boundary,
                            std::span<const RegionPair> adjacency, double nudge);

const std::vector<std::size_t>& neighbors(const LinearNetwork& net, std::size_t node);

/// GeoJSON FeatureCollection of LineStrings with flag properties.
void write_network_geojson(const LinearNetwork& net, std::ostream& out);

}  // namespace gridmap
