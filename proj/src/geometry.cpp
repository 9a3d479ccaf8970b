#include "gridmap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "gridmap/error.hpp"
#include "gridmap/log.hpp"

namespace gridmap {

double orient2d(Point a, Point b, Point c) {
  const long double abx = static_cast<long double>(b.x) - a.x;
  const long double aby = static_cast<long double>(b.y) - a.y;
  const long double acx = static_cast<long double>(c.x) - a.x;
  const long double acy = static_cast<long double>(c.y) - a.y;
  return static_cast<double>(abx * acy - aby * acx);
}

double RegionSet::total_area() const {
  double sum = 0.0;
  for (const auto& r : regions) sum += area(r.polygon);
  return sum;
}

std::optional<std::size_t> RegionSet::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].id == id) return i;
  return std::nullopt;
}

double signed_area(const Polygon& p) {
  const std::size_t n = p.size();
  if (n < 3) return 0.0;
  // Shifted to the first vertex to limit cancellation for far-from-origin data.
  const Point o = p[0];
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) twice += cross(p[i] - o, p[i + 1] - o);
  return 0.5 * twice;
}

BoundingBox bounding_box(const std::vector<Point>& pts) {
  BoundingBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  for (const Point& q : pts) {
    b.x_min = std::min(b.x_min, q.x);
    b.y_min = std::min(b.y_min, q.y);
    b.x_max = std::max(b.x_max, q.x);
    b.y_max = std::max(b.y_max, q.y);
  }
  return b;
}

BoundingBox bounding_box(const Polygon& p) { return bounding_box(p.ring); }

Polygon make_ccw(Polygon p) {
  if (signed_area(p) < 0.0) std::reverse(p.ring.begin(), p.ring.end());
  return p;
}

Polygon clean_ring(std::vector<Point> pts) {
  Polygon out;
  out.ring.reserve(pts.size());
  for (const Point& q : pts)
    if (out.ring.empty() || !(out.ring.back() == q)) out.ring.push_back(q);
  while (out.ring.size() > 1 && out.ring.front() == out.ring.back()) out.ring.pop_back();
  return out;
}

void validate_polygon(const Polygon& p, std::string_view what) {
  const std::string name(what);
  if (p.size() < 3) throw ValidationError(name + ": polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i].x) || !std::isfinite(p[i].y))
      throw ValidationError(name + ": non-finite coordinate");
    if (p[i] == p.next(i)) throw ValidationError(name + ": repeated consecutive vertex");
  }
  if (signed_area(p) == 0.0) throw ValidationError(name + ": zero-area polygon");
}

Point compute_centroid(const Polygon& p) {
  const std::size_t n = p.size();
  const double a = signed_area(p);
  const BoundingBox box = bounding_box(p);
  const double scale = box.width() * box.height();
  if (n < 3 || !(std::abs(a) > 1e-14 * scale) || a == 0.0)
    throw DegenerateGeometryError("centroid of a zero-area polygon");
  const Point o = p[0];
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point u = p[i] - o;
    const Point v = p.next(i) - o;
    const double c = cross(u, v);
    cx += (u.x + v.x) * c;
    cy += (u.y + v.y) * c;
  }
  return {o.x + cx / (6.0 * a), o.y + cy / (6.0 * a)};
}

double point_segment_distance(Point q, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 == 0.0) return distance(q, a);
  double t = ((q.x - a.x) * ab.x + (q.y - a.y) * ab.y) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(q, a + t * ab);
}

namespace {

// First index of maximum distance to segment [a, b] among ring[lo+1 .. hi-1].
void douglas_peucker(const std::vector<Point>& pts, std::size_t lo, std::size_t hi, double tol,
                     std::vector<bool>& keep) {
  if (hi <= lo + 1) return;
  const Point a = pts[lo];
  const Point b = pts[hi % pts.size()];
  double best = -1.0;
  std::size_t best_i = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = point_segment_distance(pts[i], a, b);
    if (d > best) {
      best = d;
      best_i = i;
    }
  }
  if (best > tol) {
    keep[best_i] = true;
    douglas_peucker(pts, lo, best_i, tol, keep);
    douglas_peucker(pts, best_i, hi, tol, keep);
  }
}

}  // namespace

Polygon simplify_boundary(const Polygon& p, double tol) {
  if (tol < 0.0 || !std::isfinite(tol)) throw ValidationError("simplify tolerance must be >= 0");
  const std::size_t n = p.size();
  if (tol == 0.0 || n <= 3) return p;

  std::size_t far = 0;
  double far_d = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = distance(p[0], p[i]);
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  std::vector<bool> keep(n, false);
  keep[0] = keep[far] = true;
  douglas_peucker(p.ring, 0, far, tol, keep);
  douglas_peucker(p.ring, far, n, tol, keep);

  Polygon out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.ring.push_back(p[i]);
  if (out.size() < 3) {
    std::size_t third = 0;
    double third_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = point_segment_distance(p[i], p[0], p[far]);
      if (d > third_d) {
        third_d = d;
        third = i;
      }
    }
    warn("boundary simplification collapsed below 3 vertices; keeping a 3-vertex hull");
    std::vector<std::size_t> idx{0, far, third};
    std::sort(idx.begin(), idx.end());
    out.ring = {p[idx[0]], p[idx[1]], p[idx[2]]};
  }
  return out;
}

namespace {

bool on_segment(Point q, Point a, Point b) {
  if (orient2d(a, b, q) != 0.0) return false;
  return std::min(a.x, b.x) <= q.x && q.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= q.y &&
         q.y <= std::max(a.y, b.y);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

bool segments_intersect(Point a, Point b, Point c, Point d) {
  const int o1 = sign(orient2d(a, b, c));
  const int o2 = sign(orient2d(a, b, d));
  const int o3 = sign(orient2d(c, d, a));
  const int o4 = sign(orient2d(c, d, b));
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment(c, a, b)) return true;
  if (o2 == 0 && on_segment(d, a, b)) return true;
  if (o3 == 0 && on_segment(a, c, d)) return true;
  return o4 == 0 && on_segment(b, c, d);
}

bool polygon_is_simple(const Polygon& p) {
  const std::size_t n = p.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] == p.next(i)) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = p[i];
    const Point b = p.next(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point c = p[j];
      const Point d = p.next(j);
      if (j == i + 1) {
        // Shared vertex b == c: they must not overlap beyond it.
        if (on_segment(a, c, d) || on_segment(d, a, b)) return false;
      } else if (i == 0 && j == n - 1) {
        // Shared vertex a == d.
        if (on_segment(b, c, d) || on_segment(c, a, b)) return false;
      } else if (segments_intersect(a, b, c, d)) {
        return false;
      }
    }
  }
  return true;
}

bool point_in_polygon(Point q, const Polygon& p) {
  const std::size_t n = p.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = p[j];
    const Point b = p[i];
    if (on_segment(q, a, b)) return true;
    if ((b.y > q.y) != (a.y > q.y)) {
      const double x_at = b.x + (q.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (q.x < x_at) inside = !inside;
    }
  }
  return inside;
}

bool point_strictly_inside(Point q, const Polygon& p, double margin) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = point_segment_distance(q, p[i], p.next(i));
    if (d <= margin || on_segment(q, p[i], p.next(i))) return false;
  }
  return point_in_polygon(q, p);
}

double overlap_area_with_box(const Polygon& p, const BoundingBox& box) {
  std::vector<Point> cur = p.ring;
  std::vector<Point> next;
  // Sutherland-Hodgman against the four half-planes; exact in area for a convex clip.
  auto clip = [&](auto inside, auto intersect) {
    next.clear();
    const std::size_t n = cur.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = cur[i];
      const Point b = cur[(i + 1) % n];
      const bool ia = inside(a);
      const bool ib = inside(b);
      if (ia) next.push_back(a);
      if (ia != ib) next.push_back(intersect(a, b));
    }
    cur.swap(next);
  };
  auto at_x = [](Point a, Point b, double x) {
    const double t = (x - a.x) / (b.x - a.x);
    return Point{x, a.y + t * (b.y - a.y)};
  };
  auto at_y = [](Point a, Point b, double y) {
    const double t = (y - a.y) / (b.y - a.y);
    return Point{a.x + t * (b.x - a.x), y};
  };
  clip([&](Point q) { return q.x >= box.x_min; },
       [&](Point a, Point b) { return at_x(a, b, box.x_min); });
  if (cur.empty()) return 0.0;
  clip([&](Point q) { return q.x <= box.x_max; },
       [&](Point a, Point b) { return at_x(a, b, box.x_max); });
  if (cur.empty()) return 0.0;
  clip([&](Point q) { return q.y >= box.y_min; },
       [&](Point a, Point b) { return at_y(a, b, box.y_min); });
  if (cur.empty()) return 0.0;
  clip([&](Point q) { return q.y <= box.y_max; },
       [&](Point a, Point b) { return at_y(a, b, box.y_max); });
  if (cur.size() < 3) return 0.0;
  return area(Polygon{cur});
}

Point nudge_inside(Point q, const Polygon& p, double dist) {
  const double orientation = signed_area(p) >= 0.0 ? 1.0 : -1.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = point_segment_distance(q, p[i], p.next(i));
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  const bool on_edge = on_segment(q, p[best_i], p.next(best_i));
  if (!on_edge && best > dist && point_in_polygon(q, p)) return q;
  const Point a = p[best_i];
  const Point b = p.next(best_i);
  const Point ab = b - a;
  const double len = norm(ab);
  const Point normal{-ab.y / len * orientation, ab.x / len * orientation};
  const double t = std::clamp(((q.x - a.x) * ab.x + (q.y - a.y) * ab.y) / (len * len), 0.0, 1.0);
  return a + t * ab + dist * normal;
}

// ---------------------------------------------------------------------------
// Topology

namespace {

struct Topology {
  std::vector<Point> vertices;
  std::vector<std::vector<std::size_t>> rings;  // per region, counter-clockwise, noded
};

using EdgeKey = std::pair<std::size_t, std::size_t>;

EdgeKey undirected(std::size_t a, std::size_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

class VertexSnapper {
 public:
  explicit VertexSnapper(double tol) : tol_(tol) {}

  std::size_t insert(Point q) {
    if (tol_ <= 0.0) {
      auto [it, fresh] = exact_.try_emplace({q.x, q.y}, vertices_.size());
      if (fresh) vertices_.push_back(q);
      return it->second;
    }
    const long long cx = static_cast<long long>(std::floor(q.x / tol_));
    const long long cy = static_cast<long long>(std::floor(q.y / tol_));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find({cx + dx, cy + dy});
        if (it == cells_.end()) continue;
        for (std::size_t id : it->second)
          if (distance(vertices_[id], q) <= tol_) return id;
      }
    cells_[{cx, cy}].push_back(vertices_.size());
    vertices_.push_back(q);
    return vertices_.size() - 1;
  }

  std::vector<Point> take() { return std::move(vertices_); }

 private:
  double tol_;
  std::vector<Point> vertices_;
  std::map<std::pair<long long, long long>, std::vector<std::size_t>> cells_;
  std::map<std::pair<double, double>, std::size_t> exact_;
};

Topology build_topology(const std::vector<Region>& regions, double snap_factor) {
  std::vector<Point> all;
  for (const auto& r : regions) all.insert(all.end(), r.polygon.ring.begin(), r.polygon.ring.end());
  const double tol = snap_factor * bounding_box(all).diagonal();

  VertexSnapper snapper(tol);
  Topology topo;
  std::vector<std::vector<std::size_t>> raw;
  for (const auto& r : regions) {
    const Polygon ccw = make_ccw(r.polygon);
    std::vector<std::size_t> ring;
    for (const Point& q : ccw.ring) {
      const std::size_t id = snapper.insert(q);
      if (ring.empty() || ring.back() != id) ring.push_back(id);
    }
    while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    if (ring.size() < 3)
      throw DegenerateGeometryError("region '" + r.id + "' collapses under vertex snapping");
    raw.push_back(std::move(ring));
  }
  topo.vertices = snapper.take();

  // Split edges at vertices lying on them (T-junctions).
  const auto& vs = topo.vertices;
  for (const auto& ring : raw) {
    std::vector<std::size_t> noded;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const std::size_t u = ring[i];
      const std::size_t v = ring[(i + 1) % ring.size()];
      noded.push_back(u);
      const Point a = vs[u];
      const Point b = vs[v];
      const Point ab = b - a;
      const double len2 = ab.x * ab.x + ab.y * ab.y;
      const double lo_x = std::min(a.x, b.x) - tol, hi_x = std::max(a.x, b.x) + tol;
      const double lo_y = std::min(a.y, b.y) - tol, hi_y = std::max(a.y, b.y) + tol;
      std::vector<std::pair<double, std::size_t>> on;
      for (std::size_t w = 0; w < vs.size(); ++w) {
        if (w == u || w == v) continue;
        const Point q = vs[w];
        if (q.x < lo_x || q.x > hi_x || q.y < lo_y || q.y > hi_y) continue;
        const double t = ((q.x - a.x) * ab.x + (q.y - a.y) * ab.y) / len2;
        if (t <= 0.0 || t >= 1.0) continue;
        const double d = point_segment_distance(q, a, b);
        if (d <= tol || (tol == 0.0 && orient2d(a, b, q) == 0.0)) on.emplace_back(t, w);
      }
      std::sort(on.begin(), on.end());
      for (const auto& [t, w] : on) noded.push_back(w);
    }
    topo.rings.push_back(std::move(noded));
  }
  return topo;
}

std::map<EdgeKey, std::vector<std::size_t>> edge_owners(const Topology& topo) {
  std::map<EdgeKey, std::vector<std::size_t>> owners;
  for (std::size_t r = 0; r < topo.rings.size(); ++r) {
    const auto& ring = topo.rings[r];
    for (std::size_t i = 0; i < ring.size(); ++i)
      owners[undirected(ring[i], ring[(i + 1) % ring.size()])].push_back(r);
  }
  return owners;
}

}  // namespace

std::vector<RegionPair> region_adjacency(const std::vector<Region>& regions, double snap_factor) {
  const Topology topo = build_topology(regions, snap_factor);
  std::set<RegionPair> pairs;
  for (const auto& [edge, owners] : edge_owners(topo)) {
    for (std::size_t i = 0; i < owners.size(); ++i)
      for (std::size_t j = i + 1; j < owners.size(); ++j) {
        const std::size_t a = owners[i];
        const std::size_t b = owners[j];
        if (a != b) pairs.insert(a < b ? RegionPair{a, b} : RegionPair{b, a});
      }
  }
  return {pairs.begin(), pairs.end()};
}

std::vector<RegionPair> region_adjacency(const RegionSet& rs) {
  return region_adjacency(rs.regions);
}

Polygon outer_boundary(const std::vector<Region>& regions, double snap_factor) {
  if (regions.empty()) throw ValidationError("no regions");
  const Topology topo = build_topology(regions, snap_factor);
  const auto owners = edge_owners(topo);

  std::map<std::size_t, std::vector<std::size_t>> outgoing;
  std::size_t boundary_edges = 0;
  for (const auto& ring : topo.rings) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const std::size_t u = ring[i];
      const std::size_t v = ring[(i + 1) % ring.size()];
      const auto& own = owners.at(undirected(u, v));
      if (own.size() > 2) throw TopologyError("overlapping regions share an edge more than twice");
      if (own.size() == 1) {
        outgoing[u].push_back(v);
        ++boundary_edges;
      }
    }
  }
  if (outgoing.empty()) throw TopologyError("regions have no outer boundary");
  for (const auto& [u, outs] : outgoing)
    if (outs.size() != 1)
      throw TopologyError("outer boundary is pinched at a vertex (multiple rings touch)");

  Polygon out;
  const std::size_t start = outgoing.begin()->first;
  std::size_t cur = start;
  do {
    out.ring.push_back(topo.vertices[cur]);
    cur = outgoing.at(cur).front();
    if (out.ring.size() > boundary_edges) throw TopologyError("boundary edges do not close");
  } while (cur != start);
  if (out.ring.size() != boundary_edges)
    throw TopologyError("boundary edges form more than one ring (holes or islands)");
  if (signed_area(out) <= 0.0)
    throw TopologyError("outer boundary is not counter-clockwise (enclosed hole?)");
  return out;
}

Polygon outer_boundary(const RegionSet& rs) { return outer_boundary(rs.regions); }

RegionSet make_region_set(std::vector<Region> regions, std::optional<Polygon> boundary) {
  if (regions.empty()) throw ValidationError("input contains no regions", "load");
  std::set<std::string> ids;
  for (auto& r : regions) {
    if (r.id.empty()) throw ValidationError("region without id", "load");
    if (!ids.insert(r.id).second) throw ValidationError("duplicate region id '" + r.id + "'", "load");
    validate_polygon(r.polygon, "region '" + r.id + "'");
    r.polygon = make_ccw(std::move(r.polygon));
  }
  RegionSet rs;
  rs.regions = std::move(regions);
  for (const auto& r : rs.regions) rs.centroids.push_back(compute_centroid(r.polygon));
  rs.adjacency = region_adjacency(rs.regions);
  if (boundary) {
    validate_polygon(*boundary, "boundary");
    rs.boundary = make_ccw(std::move(*boundary));
  } else {
    rs.boundary = outer_boundary(rs.regions);
  }
  if (!polygon_is_simple(rs.boundary)) throw TopologyError("boundary polygon is not simple");
  return rs;
}

}  // namespace gridmap
