#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gridmap/geometry.hpp"

namespace gridmap {

struct GridSpec {
  Point origin;          // top-left lattice corner: (X_min + dx s, Y_max + dy s)
  double s = 0.0;        // cell size
  Point shift;           // origin offset in fractions of s
  long row_min = 0, row_max = -1;  // lattice index range covering the bounding box
  long col_min = 0, col_max = -1;

  long rows() const { return row_max - row_min + 1; }
  long cols() const { return col_max - col_min + 1; }
  /// Rows grow downward from the origin.
  Point center(long row, long col) const {
    return {origin.x + (static_cast<double>(col) + 0.5) * s,
            origin.y - (static_cast<double>(row) + 0.5) * s};
  }
  BoundingBox cell_box(long row, long col) const {
    const double x0 = origin.x + static_cast<double>(col) * s;
    const double y1 = origin.y - static_cast<double>(row) * s;
    return {x0, y1 - s, x0 + s, y1};
  }
};

struct GridCell {
  long row = 0;
  long col = 0;
  Point center;
  double score = 0.0;
};

struct Assignment {
  std::vector<std::size_t> cell_of;  // region index -> index into GridLayout::cells
  double total_cost = 0.0;
};

struct GridLayout {
  GridSpec spec;
  std::vector<GridCell> cells;  // selected, in ranking order
  Assignment assignment;
  Polygon grid_outline;

  const GridCell& cell_for_region(std::size_t region) const {
    return cells.at(assignment.cell_of.at(region));
  }
};

/// Lattice anchored at the boundary's bounding box shifted by `shift` (fractions of s).
/// The lattice extends far enough to cover the box for any shift.
GridSpec make_grid_spec(const Polygon& boundary, double s, Point shift);

/// Overlap fraction with the boundary plus 1 when the center lies inside.
double cell_score(const GridSpec& spec, long row, long col, const Polygon& boundary);

/// Every lattice cell overlapping the boundary with positive area, scored.
std::vector<GridCell> lay_grid(const Polygon& boundary, double s, Point shift);
std::vector<GridCell> lay_grid(const GridSpec& spec, const Polygon& boundary);

/// Top m by score, ties by (row, col). Throws InfeasibleGridError when fewer than m.
std::vector<GridCell> select_cells(std::vector<GridCell> candidates, std::size_t m);

/// Optimal assignment under squared-distance cost for a square cost matrix in
/// row-major order. Returns the column of each row.
std::vector<std::size_t> hungarian(std::span<const double> cost, std::size_t n);

/// Minimum total squared distance bijection between centroids and cell centers.
Assignment assign_regions(std::span<const Point> centroids, std::span<const GridCell> cells);

/// Outer ring of the union of the cell squares (largest edge-connected component).
/// Collinear lattice vertices are kept. Counter-clockwise.
Polygon grid_outline(std::span<const GridCell> cells, const GridSpec& spec);

/// lay_grid + select_cells + assign_regions + grid_outline.
GridLayout fit_grid(const Polygon& boundary, std::span<const Point> centroids, double s,
                    Point shift);

/// {origin, s, shift, cells: [{row, col}], assignment: [{region_id, row, col}], total_cost}
void write_layout_json(const GridLayout& layout, const std::vector<std::string>& region_ids,
                       std::ostream& out);

/// Reads back the fields needed to draw a layout.
struct LayoutDocument {
  GridLayout layout;
  std::vector<std::string> region_ids;  // in assignment order
};
LayoutDocument read_layout_json(std::istream& in);

}  // namespace gridmap
