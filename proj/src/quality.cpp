#include "gridmap/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "gridmap/error.hpp"
#include "gridmap/log.hpp"

namespace gridmap {

double metric_location(std::span<const Point> centroids, const GridLayout& layout) {
  if (centroids.size() != layout.assignment.cell_of.size())
    throw ValidationError("centroid count does not match the assignment", "quality");
  if (centroids.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < centroids.size(); ++i)
    sum += distance(centroids[i], layout.cell_for_region(i).center);
  return sum / static_cast<double>(centroids.size());
}

double metric_adjacency(std::span<const RegionPair> adjacency, const GridLayout& layout,
                        GridAdjacency mode) {
  if (adjacency.empty()) return 1.0;
  std::size_t kept = 0;
  for (auto [a, b] : adjacency) {
    const GridCell& ca = layout.cell_for_region(a);
    const GridCell& cb = layout.cell_for_region(b);
    const long dr = std::labs(ca.row - cb.row);
    const long dc = std::labs(ca.col - cb.col);
    const bool touch = mode == GridAdjacency::rook ? dr + dc == 1
                                                   : std::max(dr, dc) == 1;
    if (touch) ++kept;
  }
  return static_cast<double>(kept) / static_cast<double>(adjacency.size());
}

namespace {

double direction_deg(Point from, Point to) {
  return std::atan2(to.y - from.y, to.x - from.x) * 180.0 / std::numbers::pi;
}

double angle_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

}  // namespace

double metric_orientation(std::span<const Point> original_centroids, const LinearNetwork& net,
                          const GridLayout& layout) {
  const std::size_t m = net.centroid_count();
  if (original_centroids.size() != m)
    throw ValidationError("centroid count does not match the network", "quality");
  double sum = 0.0;
  std::size_t links = 0;
  for (const auto& e : net.edges()) {
    if (e.a >= m || e.b >= m) continue;
    ++links;
    const Point ta = layout.cell_for_region(e.a).center;
    const Point tb = layout.cell_for_region(e.b).center;
    if (ta == tb) {
      warn("link between regions sharing a cell center ignored");
      continue;
    }
    sum += angle_gap(direction_deg(original_centroids[e.a], original_centroids[e.b]),
                     direction_deg(ta, tb));
  }
  return links == 0 ? 0.0 : sum / static_cast<double>(links);
}

namespace {

// Lowest vertex (then leftmost) first, counter-clockwise.
Polygon canonical_ring(const Polygon& p) {
  Polygon q = make_ccw(p);
  std::size_t start = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i].y < q[start].y || (q[i].y == q[start].y && q[i].x < q[start].x)) start = i;
  std::rotate(q.ring.begin(), q.ring.begin() + static_cast<std::ptrdiff_t>(start), q.ring.end());
  return q;
}

std::vector<Point> resample(const Polygon& p, std::size_t count) {
  const std::size_t n = p.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + distance(p[i], p.next(i));
  const double total = cum[n];
  std::vector<Point> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = total * static_cast<double>(k) / static_cast<double>(count);
    while (seg + 1 < n && cum[seg + 1] <= t) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double u = len > 0.0 ? (t - cum[seg]) / len : 0.0;
    out.push_back(p[seg] + u * (p.next(seg) - p[seg]));
  }
  return out;
}

}  // namespace

std::vector<double> shape_spectrum(const Polygon& outline, const ShapeParams& params) {
  validate_polygon(outline, "outline");
  if (params.samples < 2 * params.harmonics + 1 || params.harmonics == 0)
    throw ValidationError("shape sampling must resolve the requested harmonics", "quality");
  const Polygon ring = canonical_ring(outline);
  const Point c = compute_centroid(ring);
  const auto pts = resample(ring, params.samples);
  const std::size_t n = pts.size();
  std::vector<double> sig(n);
  for (std::size_t i = 0; i < n; ++i) sig[i] = distance(pts[i], c);

  std::vector<double> mag(params.harmonics);
  for (std::size_t k = 1; k <= params.harmonics; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>((k * i) % n) /
                         static_cast<double>(n);
      re += sig[i] * std::cos(ang);
      im -= sig[i] * std::sin(ang);
    }
    mag[k - 1] = std::hypot(re, im);
  }
  double sq = 0.0;
  for (double v : mag) sq += v * v;
  const double len = std::sqrt(sq);
  double mean = 0.0;
  for (double v : sig) mean += v;
  mean /= static_cast<double>(n);
  // A (near) circular signature has no harmonics left to compare.
  if (!(len > 1e-12 * mean * static_cast<double>(n))) return std::vector<double>(mag.size(), 0.0);
  for (double& v : mag) v /= len;
  return mag;
}

double metric_shape(const Polygon& a, const Polygon& b, const ShapeParams& params) {
  const auto fa = shape_spectrum(a, params);
  const auto fb = shape_spectrum(b, params);
  double sq = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) sq += (fa[i] - fb[i]) * (fa[i] - fb[i]);
  return std::clamp(1.0 - std::sqrt(sq) / 2.0, 0.0, 1.0);
}

QualityReport evaluate_layout(const RegionSet& rs, const LinearNetwork& original_net,
                              std::span<const Point> transformed_centroids,
                              const GridLayout& layout, const QualityOptions& opts) {
  QualityReport r;
  r.c_location = metric_location(
      opts.location == LocationReference::transformed ? transformed_centroids
                                                      : std::span<const Point>(rs.centroids),
      layout);
  r.c_adjacent = metric_adjacency(rs.adjacency, layout, opts.adjacency);
  r.c_orientation = metric_orientation(rs.centroids, original_net, layout);
  r.c_shape = metric_shape(rs.boundary, layout.grid_outline, opts.shape);
  return r;
}

std::vector<Point> gaussian_noise(std::span<const Point> centroids, double md,
                                  const LinearNetwork& net, std::uint64_t seed) {
  if (!(md >= 0.0) || !std::isfinite(md))
    throw ValidationError("noise level must be >= 0", "quality");
  if (centroids.size() != net.centroid_count())
    throw ValidationError("centroid count does not match the network", "quality");
  std::vector<Point> out(centroids.begin(), centroids.end());
  if (md == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const auto& nodes = net.nodes();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& nb = net.neighbors(i);
    double mean = 0.0;
    for (std::size_t j : nb) mean += distance(nodes[i].pos, nodes[j].pos);
    if (!nb.empty()) mean /= static_cast<double>(nb.size());
    const double sigma = md * mean;
    // Draw both axes even when sigma is 0 so one node never shifts another's stream.
    const double gx = unit(rng);
    const double gy = unit(rng);
    out[i] += Point{sigma * gx, sigma * gy};
  }
  return out;
}

std::vector<Point> candidate_origins() { return {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}}; }

TopsisResult topsis_select(std::span<const QualityReport> reports, const TopsisWeights& weights) {
  if (reports.empty()) throw ValidationError("TOPSIS needs at least one candidate", "quality");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError("TOPSIS weights must be >= 0", "config");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw ValidationError("TOPSIS weights must not all be zero", "config");

  const std::size_t n = reports.size();
  TopsisResult res;
  if (n == 1) {
    res.closeness = {1.0};
    return res;
  }
  auto value = [&](std::size_t i, int c) {
    const QualityReport& r = reports[i];
    switch (c) {
      case 0: return r.c_location;
      case 1: return r.c_adjacent;
      case 2: return r.c_orientation;
      default: return r.c_shape;
    }
  };
  constexpr bool benefit[4] = {false, true, false, true};

  std::vector<double> dplus(n, 0.0), dminus(n, 0.0);
  for (int c = 0; c < 4; ++c) {
    double sq = 0.0, lo = value(0, c), hi = value(0, c);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = value(i, c);
      sq += v * v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi || !(sq > 0.0)) continue;
    const double scale = weights[c] / wsum / std::sqrt(sq);
    const double best = (benefit[c] ? hi : lo) * scale;
    const double worst = (benefit[c] ? lo : hi) * scale;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = value(i, c) * scale;
      dplus[i] += (v - best) * (v - best);
      dminus[i] += (v - worst) * (v - worst);
    }
  }
  res.closeness.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::sqrt(dplus[i]);
    const double m = std::sqrt(dminus[i]);
    res.closeness[i] = p + m > 0.0 ? m / (p + m) : 1.0;
    if (res.closeness[i] > res.closeness[res.chosen]) res.chosen = i;
  }
  return res;
}

}  // namespace gridmap
