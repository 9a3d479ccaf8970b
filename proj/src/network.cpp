#include "gridmap/network.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "gridmap/error.hpp"
#include "gridmap/kernels.hpp"
#include "json.hpp"

namespace gridmap {
namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// > 0 when d lies strictly inside the circumcircle of counter-clockwise (a, b, c).
long double incircle(Point a, Point b, Point c, Point d) {
  const long double adx = static_cast<long double>(a.x) - d.x;
  const long double ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x;
  const long double bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x;
  const long double cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

// Mutable triangle mesh with neighbour links. nb[t][i] is the triangle across the
// edge opposite v[t][i]; kNone on the constraint ring.
class Mesh {
 public:
  explicit Mesh(const std::vector<Point>& pts) : pts_(pts) {}

  std::vector<std::array<std::size_t, 3>> v;
  std::vector<std::array<std::size_t, 3>> nb;

  void link_all() {
    std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, int>> directed;
    nb.assign(v.size(), {kNone, kNone, kNone});
    for (std::size_t t = 0; t < v.size(); ++t)
      for (int i = 0; i < 3; ++i) directed[{v[t][(i + 1) % 3], v[t][(i + 2) % 3]}] = {t, i};
    for (std::size_t t = 0; t < v.size(); ++t)
      for (int i = 0; i < 3; ++i) {
        auto it = directed.find({v[t][(i + 2) % 3], v[t][(i + 1) % 3]});
        if (it != directed.end()) nb[t][i] = it->second.first;
      }
  }

  void insert(std::size_t p) {
    const Point q = pts_[p];
    for (std::size_t t = 0; t < v.size(); ++t) {
      double o[3];
      int zeros = 0;
      bool outside = false;
      for (int i = 0; i < 3; ++i) {
        o[i] = orient2d(pts_[v[t][(i + 1) % 3]], pts_[v[t][(i + 2) % 3]], q);
        if (o[i] < 0.0) outside = true;
        if (o[i] == 0.0) ++zeros;
      }
      if (outside) continue;
      if (zeros >= 2) throw ValidationError("network point coincides with another node", "network");
      if (zeros == 1) {
        const int i = o[0] == 0.0 ? 0 : (o[1] == 0.0 ? 1 : 2);
        if (nb[t][i] == kNone)
          throw ValidationError("centroid lies on the boundary polygon", "network");
        split_edge(t, i, p);
      } else {
        split_triangle(t, p);
      }
      return;
    }
    throw ValidationError("centroid lies outside the boundary polygon", "network");
  }

  // Lawson flips until every interior edge is locally Delaunay.
  void make_delaunay() {
    std::vector<std::pair<std::size_t, int>> stack;
    for (std::size_t t = 0; t < v.size(); ++t)
      for (int i = 0; i < 3; ++i) stack.emplace_back(t, i);
    drain(stack, kNone);
  }

  bool locally_delaunay(std::size_t t, int i) const {
    const std::size_t u = nb[t][i];
    if (u == kNone) return true;
    const int j = back_index(u, t);
    return incircle(pts_[v[t][0]], pts_[v[t][1]], pts_[v[t][2]], pts_[v[u][j]]) <= 0.0L;
  }

 private:
  const std::vector<Point>& pts_;

  int back_index(std::size_t u, std::size_t t) const {
    for (int j = 0; j < 3; ++j)
      if (nb[u][j] == t) return j;
    throw std::logic_error("broken triangle adjacency");
  }

  void relink(std::size_t tri, std::size_t from, std::size_t to) {
    if (tri == kNone) return;
    for (int j = 0; j < 3; ++j)
      if (nb[tri][j] == from) {
        nb[tri][j] = to;
        return;
      }
  }

  void set(std::size_t t, std::size_t a, std::size_t b, std::size_t c, std::size_t na,
           std::size_t nb_, std::size_t nc) {
    v[t] = {a, b, c};
    nb[t] = {na, nb_, nc};
  }

  std::size_t add() {
    v.push_back({});
    nb.push_back({});
    return v.size() - 1;
  }

  void split_triangle(std::size_t t, std::size_t p) {
    const auto [a, b, c] = v[t];
    const auto [na, nbb, nc] = nb[t];
    const std::size_t t1 = add();
    const std::size_t t2 = add();
    set(t, a, b, p, t1, t2, nc);
    set(t1, b, c, p, t2, t, na);
    set(t2, c, a, p, t, t1, nbb);
    relink(na, t, t1);
    relink(nbb, t, t2);
    std::vector<std::pair<std::size_t, int>> stack{{t, 2}, {t1, 2}, {t2, 2}};
    drain(stack, p);
  }

  void split_edge(std::size_t t, int i, std::size_t p) {
    const std::size_t u = nb[t][i];
    const int j = back_index(u, t);
    const std::size_t a = v[t][i];
    const std::size_t q = v[t][(i + 1) % 3];
    const std::size_t r = v[t][(i + 2) % 3];
    const std::size_t d = v[u][j];
    const std::size_t t_qa = nb[t][(i + 2) % 3];
    const std::size_t t_ra = nb[t][(i + 1) % 3];
    const std::size_t u_dr = nb[u][(j + 2) % 3];
    const std::size_t u_qd = nb[u][(j + 1) % 3];
    const std::size_t t1 = add();
    const std::size_t u1 = add();
    set(t, a, q, p, u1, t1, t_qa);
    set(t1, a, p, r, u, t_ra, t);
    set(u, d, r, p, t1, u1, u_dr);
    set(u1, d, p, q, t, u_qd, u);
    relink(t_ra, t, t1);
    relink(u_qd, u, u1);
    std::vector<std::pair<std::size_t, int>> stack{{t, 2}, {t1, 1}, {u, 2}, {u1, 1}};
    drain(stack, p);
  }

  // Flips edge i of t; returns the two triangles now sharing the new diagonal.
  void flip(std::size_t t, int i, std::vector<std::pair<std::size_t, int>>& stack,
            std::size_t apex) {
    const std::size_t u = nb[t][i];
    const int j = back_index(u, t);
    const std::size_t p = v[t][i];
    const std::size_t q = v[t][(i + 1) % 3];
    const std::size_t r = v[t][(i + 2) % 3];
    const std::size_t d = v[u][j];
    const std::size_t A = nb[t][(i + 2) % 3];
    const std::size_t B = nb[t][(i + 1) % 3];
    const std::size_t C = nb[u][(j + 1) % 3];
    const std::size_t D = nb[u][(j + 2) % 3];
    set(t, p, q, d, C, u, A);
    set(u, p, d, r, D, B, t);
    relink(C, u, t);
    relink(B, t, u);
    if (apex == kNone) {
      stack.emplace_back(t, 0);
      stack.emplace_back(t, 2);
      stack.emplace_back(u, 0);
      stack.emplace_back(u, 1);
    } else {
      // p is the freshly inserted apex: only edges opposite it can become illegal.
      stack.emplace_back(t, 0);
      stack.emplace_back(u, 0);
    }
  }

  bool flippable(std::size_t t, int i) const {
    const std::size_t u = nb[t][i];
    if (u == kNone) return false;
    const int j = back_index(u, t);
    const Point p = pts_[v[t][i]];
    const Point q = pts_[v[t][(i + 1) % 3]];
    const Point r = pts_[v[t][(i + 2) % 3]];
    const Point d = pts_[v[u][j]];
    if (incircle(p, q, r, d) <= 0.0L) return false;
    return orient2d(p, q, d) > 0.0 && orient2d(p, d, r) > 0.0;
  }

  void drain(std::vector<std::pair<std::size_t, int>>& stack, std::size_t apex) {
    std::size_t budget = 64 * (v.size() + 16) * (v.size() + 16);
    while (!stack.empty()) {
      auto [t, i] = stack.back();
      stack.pop_back();
      if (apex != kNone) {
        // Re-anchor on the apex: the edge to test is the one opposite it.
        int k = -1;
        for (int m = 0; m < 3; ++m)
          if (v[t][m] == apex) k = m;
        if (k < 0) continue;
        i = k;
      }
      if (!flippable(t, i)) continue;
      if (budget-- == 0) throw NumericalError("Delaunay flipping did not terminate");
      flip(t, i, stack, apex);
    }
  }
};

}  // namespace

std::vector<Triangulation::Edge> Triangulation::edges() const {
  std::map<std::pair<std::size_t, std::size_t>, int> count;
  for (const auto& t : triangles)
    for (int i = 0; i < 3; ++i) {
      std::size_t a = t[i];
      std::size_t b = t[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  std::vector<Edge> out;
  out.reserve(count.size());
  for (const auto& [e, c] : count) out.push_back({e.first, e.second, c == 1});
  return out;
}

Triangulation build_cdt(std::span<const Point> interior, const Polygon& constraint) {
  validate_polygon(constraint, "boundary");
  const std::size_t m = interior.size();
  const std::size_t n = constraint.size();

  Triangulation tri;
  tri.interior_count = m;
  tri.vertices.assign(interior.begin(), interior.end());
  tri.vertices.insert(tri.vertices.end(), constraint.ring.begin(), constraint.ring.end());

  {
    std::set<std::pair<double, double>> seen;
    for (const Point& q : tri.vertices)
      if (!seen.insert({q.x, q.y}).second)
        throw ValidationError("coincident network points", "network");
  }
  for (const Point& q : interior)
    if (!point_strictly_inside(q, constraint))
      throw ValidationError("centroid not strictly inside the boundary polygon", "network");

  std::vector<std::size_t> poly(n);
  for (std::size_t k = 0; k < n; ++k) poly[k] = m + k;
  if (signed_area(constraint) < 0.0) std::reverse(poly.begin(), poly.end());

  const auto& pts = tri.vertices;
  Mesh mesh(pts);
  // Ear clipping.
  std::size_t cursor = 0;
  while (poly.size() > 3) {
    const std::size_t sz = poly.size();
    bool clipped = false;
    for (std::size_t step = 0; step < sz; ++step) {
      const std::size_t i = (cursor + step) % sz;
      const std::size_t u = poly[(i + sz - 1) % sz];
      const std::size_t v = poly[i];
      const std::size_t w = poly[(i + 1) % sz];
      if (orient2d(pts[u], pts[v], pts[w]) <= 0.0) continue;
      bool ear = true;
      for (std::size_t k : poly) {
        if (k == u || k == v || k == w) continue;
        if (orient2d(pts[u], pts[v], pts[k]) >= 0.0 && orient2d(pts[v], pts[w], pts[k]) >= 0.0 &&
            orient2d(pts[w], pts[u], pts[k]) >= 0.0) {
          ear = false;
          break;
        }
      }
      if (!ear) continue;
      mesh.v.push_back({u, v, w});
      poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
      cursor = i % poly.size();
      clipped = true;
      break;
    }
    if (!clipped) throw TopologyError("boundary polygon could not be triangulated (not simple?)");
  }
  mesh.v.push_back({poly[0], poly[1], poly[2]});
  mesh.link_all();
  mesh.make_delaunay();
  for (std::size_t p = 0; p < m; ++p) mesh.insert(p);
  mesh.make_delaunay();

  tri.triangles = std::move(mesh.v);
  return tri;
}

// ---------------------------------------------------------------------------

LinearNetwork::LinearNetwork(std::vector<NetNode> nodes, std::vector<NetEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), adjacency_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != i) throw std::invalid_argument("network node ids must be 0..n-1");
    if (nodes_[i].kind == NetNode::Kind::centroid) {
      if (centroid_count_ != i) throw std::invalid_argument("centroid nodes must come first");
      ++centroid_count_;
    }
  }
  for (const auto& e : edges_) {
    adjacency_.at(e.a).push_back(e.b);
    adjacency_.at(e.b).push_back(e.a);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

const std::vector<std::size_t>& LinearNetwork::neighbors(std::size_t node) const {
  if (node >= adjacency_.size())
    throw std::out_of_range("unknown network node " + std::to_string(node));
  return adjacency_[node];
}

bool LinearNetwork::is_connected() const {
  if (nodes_.empty()) return true;
  std::vector<bool> seen(nodes_.size(), false);
  std::deque<std::size_t> q{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop_front();
    for (std::size_t w : adjacency_[v])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        q.push_back(w);
      }
  }
  return count == nodes_.size();
}

std::vector<Point> LinearNetwork::positions() const {
  std::vector<Point> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.pos);
  return out;
}

std::vector<Point> LinearNetwork::centroid_positions() const {
  std::vector<Point> out;
  for (std::size_t i = 0; i < centroid_count_; ++i) out.push_back(nodes_[i].pos);
  return out;
}

Polygon LinearNetwork::boundary_polygon() const {
  Polygon p;
  for (std::size_t i = centroid_count_; i < nodes_.size(); ++i) p.ring.push_back(nodes_[i].pos);
  return p;
}

LinearNetwork LinearNetwork::moved_to(std::span<const Point> positions) const {
  if (positions.size() != nodes_.size()) throw std::invalid_argument("position count mismatch");
  LinearNetwork out = *this;
  for (std::size_t i = 0; i < nodes_.size(); ++i) out.nodes_[i].pos = positions[i];
  for (auto& e : out.edges_) e.length = distance(positions[e.a], positions[e.b]);
  return out;
}

const std::vector<std::size_t>& neighbors(const LinearNetwork& net, std::size_t node) {
  return net.neighbors(node);
}

bool passes_rng_test(Point a, Point b, std::span<const double> xs, std::span<const double> ys) {
  return kernels::count_witnesses(a.x, a.y, b.x, b.y, squared_distance(a, b), xs, ys) == 0;
}

LinearNetwork extract_network(const Triangulation& cdt, std::span<const RegionPair> adjacency) {
  const std::size_t m = cdt.interior_count;
  const std::size_t total = cdt.vertices.size();
  std::vector<NetNode> nodes;
  nodes.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const bool centroid = i < m;
    nodes.push_back({i, centroid ? NetNode::Kind::centroid : NetNode::Kind::boundary,
                     centroid ? i : i - m, cdt.vertices[i]});
  }
  std::vector<double> xs(total), ys(total);
  for (std::size_t i = 0; i < total; ++i) {
    xs[i] = cdt.vertices[i].x;
    ys[i] = cdt.vertices[i].y;
  }
  std::set<RegionPair> adjacent;
  for (auto [a, b] : adjacency) {
    if (a >= m || b >= m) throw std::out_of_range("adjacency references an unknown region");
    adjacent.insert(a < b ? RegionPair{a, b} : RegionPair{b, a});
  }

  auto flags_for = [&](std::size_t a, std::size_t b, bool constrained) {
    std::uint8_t f = 0;
    if (constrained) f |= kConstrainedBoundary;
    if (a < m && b < m && adjacent.count({a, b})) f |= kRegionAdjacency;
    if (passes_rng_test(cdt.vertices[a], cdt.vertices[b], xs, ys)) f |= kRelativeNeighbor;
    return f;
  };

  std::vector<NetEdge> edges;
  std::set<RegionPair> present;
  for (const auto& e : cdt.edges()) {
    const std::uint8_t f = flags_for(e.a, e.b, e.constrained);
    present.insert({e.a, e.b});
    if (f != 0) edges.push_back({e.a, e.b, distance(cdt.vertices[e.a], cdt.vertices[e.b]), f});
  }
  for (const auto& pair : adjacent)
    if (!present.count(pair))
      edges.push_back({pair.first, pair.second,
                       distance(cdt.vertices[pair.first], cdt.vertices[pair.second]),
                       flags_for(pair.first, pair.second, false)});
  std::sort(edges.begin(), edges.end(),
            [](const NetEdge& x, const NetEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });

  LinearNetwork net(std::move(nodes), std::move(edges));
  if (!net.is_connected()) throw std::logic_error("linear network is disconnected");
  return net;
}

LinearNetwork extract_network(const Triangulation& cdt, const RegionSet& rs) {
  return extract_network(cdt, rs.adjacency);
}

LinearNetwork build_network(std::span<const Point> centroids, const Polygon& boundary,
                            std::span<const RegionPair> adjacency, double nudge) {
  std::vector<Point> inner(centroids.begin(), centroids.end());
  for (Point& c : inner)
    if (point_in_polygon(c, boundary) && !point_strictly_inside(c, boundary))
      c = nudge_inside(c, boundary, nudge);
  return extract_network(build_cdt(inner, boundary), adjacency);
}

LinearNetwork build_network(const RegionSet& rs, double nudge) {
  return build_network(rs.centroids, rs.boundary, rs.adjacency, nudge);
}

void write_network_geojson(const LinearNetwork& net, std::ostream& out) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& e : net.edges()) {
    const Point a = net.nodes()[e.a].pos;
    const Point b = net.nodes()[e.b].pos;
    features.push_back({{"type", "Feature"},
                        {"geometry",
                         {{"type", "LineString"}, {"coordinates", {{a.x, a.y}, {b.x, b.y}}}}},
                        {"properties",
                         {{"a", e.a},
                          {"b", e.b},
                          {"length", e.length},
                          {"constrained_boundary", e.has(kConstrainedBoundary)},
                          {"region_adjacency", e.has(kRegionAdjacency)},
                          {"rng", e.has(kRelativeNeighbor)}}}});
  }
  out << nlohmann::json{{"type", "FeatureCollection"}, {"features", features}}.dump(2) << '\n';
}

}  // namespace gridmap
