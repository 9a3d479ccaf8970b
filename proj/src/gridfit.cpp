#include "gridmap/gridfit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "gridmap/error.hpp"
#include "gridmap/kernels.hpp"
#include "gridmap/log.hpp"
#include "json.hpp"

namespace gridmap {

GridSpec make_grid_spec(const Polygon& boundary, double s, Point shift) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("cell size must be positive", "gridfit");
  const BoundingBox box = bounding_box(boundary);
  GridSpec spec;
  spec.s = s;
  spec.shift = shift;
  spec.origin = {box.x_min + shift.x * s, box.y_max + shift.y * s};
  spec.col_min = static_cast<long>(std::floor((box.x_min - spec.origin.x) / s));
  spec.col_max = static_cast<long>(std::ceil((box.x_max - spec.origin.x) / s)) - 1;
  spec.row_min = static_cast<long>(std::floor((spec.origin.y - box.y_max) / s));
  spec.row_max = static_cast<long>(std::ceil((spec.origin.y - box.y_min) / s)) - 1;
  return spec;
}

double cell_score(const GridSpec& spec, long row, long col, const Polygon& boundary) {
  const double overlap = overlap_area_with_box(boundary, spec.cell_box(row, col));
  const double bonus = point_in_polygon(spec.center(row, col), boundary) ? 1.0 : 0.0;
  return overlap / (spec.s * spec.s) + bonus;
}

std::vector<GridCell> lay_grid(const GridSpec& spec, const Polygon& boundary) {
  std::vector<GridCell> out;
  const double s2 = spec.s * spec.s;
  for (long r = spec.row_min; r <= spec.row_max; ++r)
    for (long c = spec.col_min; c <= spec.col_max; ++c) {
      const double overlap = overlap_area_with_box(boundary, spec.cell_box(r, c));
      // Slivers from rounding along a shared lattice line are not overlaps.
      if (!(overlap > 1e-12 * s2)) continue;
      const Point ctr = spec.center(r, c);
      out.push_back({r, c, ctr, overlap / s2 + (point_in_polygon(ctr, boundary) ? 1.0 : 0.0)});
    }
  return out;
}

std::vector<GridCell> lay_grid(const Polygon& boundary, double s, Point shift) {
  validate_polygon(boundary, "boundary");
  return lay_grid(make_grid_spec(boundary, s, shift), boundary);
}

std::vector<GridCell> select_cells(std::vector<GridCell> candidates, std::size_t m) {
  if (candidates.size() < m)
    throw InfeasibleGridError("only " + std::to_string(candidates.size()) +
                              " grid cells intersect the boundary, " + std::to_string(m) +
                              " needed");
  std::sort(candidates.begin(), candidates.end(), [](const GridCell& a, const GridCell& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  candidates.resize(m);
  return candidates;
}

std::vector<std::size_t> hungarian(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw std::invalid_argument("cost matrix must be n x n");
  // Shortest augmenting paths with row/column potentials; 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == 0) throw NumericalError("assignment cost matrix is not finite");
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of(n);
  for (std::size_t j = 1; j <= n; ++j) col_of[p[j] - 1] = j - 1;
  return col_of;
}

Assignment assign_regions(std::span<const Point> centroids, std::span<const GridCell> cells) {
  const std::size_t n = centroids.size();
  if (cells.size() != n)
    throw ValidationError("assignment needs as many cells as regions (" + std::to_string(n) +
                              " vs " + std::to_string(cells.size()) + ")",
                          "gridfit");
  std::vector<double> xs(n), ys(n), cost(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = cells[j].center.x;
    ys[j] = cells[j].center.y;
  }
  for (std::size_t i = 0; i < n; ++i)
    kernels::squared_distances(centroids[i].x, centroids[i].y, xs, ys,
                               std::span<double>(cost).subspan(i * n, n));
  Assignment a;
  a.cell_of = hungarian(cost, n);
  for (std::size_t i = 0; i < n; ++i) a.total_cost += cost[i * n + a.cell_of[i]];
  return a;
}

namespace {

using LatticePoint = std::pair<long, long>;  // (X, Y) = (col, -row)

std::vector<std::size_t> largest_component(std::span<const GridCell> cells) {
  std::map<std::pair<long, long>, std::size_t> index;
  for (std::size_t i = 0; i < cells.size(); ++i) index[{cells[i].row, cells[i].col}] = i;
  std::vector<int> comp(cells.size(), -1);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t start = 0; start < cells.size(); ++start) {
    if (comp[start] >= 0) continue;
    comps.emplace_back();
    std::deque<std::size_t> q{start};
    comp[start] = static_cast<int>(comps.size() - 1);
    while (!q.empty()) {
      const std::size_t c = q.front();
      q.pop_front();
      comps.back().push_back(c);
      const long r = cells[c].row, k = cells[c].col;
      for (auto [dr, dc] : {std::pair{1L, 0L}, {-1L, 0L}, {0L, 1L}, {0L, -1L}}) {
        auto it = index.find({r + dr, k + dc});
        if (it != index.end() && comp[it->second] < 0) {
          comp[it->second] = comp[c];
          q.push_back(it->second);
        }
      }
    }
  }
  if (comps.size() > 1)
    warn("selected grid cells form " + std::to_string(comps.size()) +
         " separate groups; outlining the largest");
  std::size_t best = 0;
  for (std::size_t i = 1; i < comps.size(); ++i)
    if (comps[i].size() > comps[best].size()) best = i;
  return comps.empty() ? std::vector<std::size_t>{} : comps[best];
}

long cross_sign(LatticePoint a, LatticePoint b) { return a.first * b.second - a.second * b.first; }

}  // namespace

Polygon grid_outline(std::span<const GridCell> cells, const GridSpec& spec) {
  if (cells.empty()) return {};
  const auto keep = largest_component(cells);
  // Counter-clockwise unit edges of every square; shared edges cancel in pairs.
  std::set<std::pair<LatticePoint, LatticePoint>> edges;
  for (std::size_t idx : keep) {
    const long x = cells[idx].col;
    const long y = -cells[idx].row;
    const LatticePoint c[4] = {{x, y - 1}, {x + 1, y - 1}, {x + 1, y}, {x, y}};
    for (int i = 0; i < 4; ++i) {
      const auto e = std::pair{c[i], c[(i + 1) % 4]};
      const auto rev = std::pair{e.second, e.first};
      if (edges.erase(rev) == 0) edges.insert(e);
    }
  }
  std::multimap<LatticePoint, LatticePoint> out_edges;
  for (const auto& [a, b] : edges) out_edges.emplace(a, b);

  // Chain into cycles. At a pinch vertex take the rightmost turn so the outer
  // contour stays in one loop.
  std::vector<std::vector<LatticePoint>> cycles;
  while (!out_edges.empty()) {
    auto it = out_edges.begin();
    const LatticePoint start = it->first;
    LatticePoint prev = start, cur = it->second;
    out_edges.erase(it);
    std::vector<LatticePoint> cyc{start};
    while (cur != start) {
      cyc.push_back(cur);
      auto [lo, hi] = out_edges.equal_range(cur);
      if (lo == hi) throw std::logic_error("grid outline edges do not close");
      const LatticePoint din{cur.first - prev.first, cur.second - prev.second};
      auto pick = lo;
      int best_rank = 99;
      for (auto e = lo; e != hi; ++e) {
        const LatticePoint dout{e->second.first - cur.first, e->second.second - cur.second};
        const long turn = cross_sign(din, dout);
        const long along = din.first * dout.first + din.second * dout.second;
        // right turn < straight < left turn
        const int rank = turn < 0 ? 0 : (turn == 0 && along > 0 ? 1 : 2);
        if (rank < best_rank) {
          best_rank = rank;
          pick = e;
        }
      }
      prev = cur;
      cur = pick->second;
      out_edges.erase(pick);
    }
    cycles.push_back(std::move(cyc));
  }

  auto lattice_area = [](const std::vector<LatticePoint>& c) {
    long twice = 0;
    for (std::size_t i = 0; i < c.size(); ++i) twice += cross_sign(c[i], c[(i + 1) % c.size()]);
    return twice;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < cycles.size(); ++i)
    if (lattice_area(cycles[i]) > lattice_area(cycles[best])) best = i;

  Polygon ring;
  for (const auto& [x, y] : cycles[best])
    ring.ring.push_back({spec.origin.x + static_cast<double>(x) * spec.s,
                         spec.origin.y + static_cast<double>(y) * spec.s});
  return ring;
}

GridLayout fit_grid(const Polygon& boundary, std::span<const Point> centroids, double s,
                    Point shift) {
  GridLayout layout;
  layout.spec = make_grid_spec(boundary, s, shift);
  layout.cells = select_cells(lay_grid(layout.spec, boundary), centroids.size());
  layout.assignment = assign_regions(centroids, layout.cells);
  layout.grid_outline = grid_outline(layout.cells, layout.spec);
  return layout;
}

void write_layout_json(const GridLayout& layout, const std::vector<std::string>& region_ids,
                       std::ostream& out) {
  using nlohmann::ordered_json;
  if (region_ids.size() != layout.assignment.cell_of.size())
    throw std::invalid_argument("one region id per assignment entry expected");
  ordered_json doc;
  doc["origin"] = {layout.spec.origin.x, layout.spec.origin.y};
  doc["s"] = layout.spec.s;
  doc["shift"] = {layout.spec.shift.x, layout.spec.shift.y};
  ordered_json cells = ordered_json::array();
  for (const auto& c : layout.cells) cells.push_back({{"row", c.row}, {"col", c.col}});
  doc["cells"] = std::move(cells);
  ordered_json assign = ordered_json::array();
  for (std::size_t i = 0; i < region_ids.size(); ++i) {
    const GridCell& c = layout.cell_for_region(i);
    assign.push_back({{"region_id", region_ids[i]}, {"row", c.row}, {"col", c.col}});
  }
  doc["assignment"] = std::move(assign);
  doc["total_cost"] = layout.assignment.total_cost;
  out << doc.dump(2) << '\n';
}

LayoutDocument read_layout_json(std::istream& in) {
  using nlohmann::json;
  LayoutDocument docout;
  try {
    const json doc = json::parse(in);
    GridLayout& layout = docout.layout;
    layout.spec.origin = {doc.at("origin").at(0).get<double>(), doc.at("origin").at(1).get<double>()};
    layout.spec.s = doc.at("s").get<double>();
    if (!(layout.spec.s > 0.0)) throw ValidationError("layout cell size must be positive", "load");
    if (doc.contains("shift"))
      layout.spec.shift = {doc["shift"].at(0).get<double>(), doc["shift"].at(1).get<double>()};
    std::map<std::pair<long, long>, std::size_t> index;
    for (const auto& c : doc.at("cells")) {
      const long r = c.at("row").get<long>();
      const long k = c.at("col").get<long>();
      if (!index.emplace(std::pair{r, k}, layout.cells.size()).second)
        throw ValidationError("duplicate cell in layout", "load");
      layout.cells.push_back({r, k, layout.spec.center(r, k), 0.0});
    }
    for (const auto& a : doc.at("assignment")) {
      auto it = index.find({a.at("row").get<long>(), a.at("col").get<long>()});
      if (it == index.end()) throw ValidationError("assignment refers to an unknown cell", "load");
      docout.region_ids.push_back(a.at("region_id").get<std::string>());
      layout.assignment.cell_of.push_back(it->second);
    }
    layout.assignment.total_cost = doc.value("total_cost", 0.0);
    if (!layout.cells.empty()) layout.grid_outline = grid_outline(layout.cells, layout.spec);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed layout JSON: ") + e.what());
  }
  return docout;
}

}  // namespace gridmap
