#include "gridmap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gridmap {
namespace {

constexpr double kCanvas = 800.0;
constexpr double kMargin = 20.0;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Canvas {
 public:
  explicit Canvas(const BoundingBox& box) : box_(box) {
    const double span = std::max({box.width(), box.height(), 1e-300});
    scale_ = (kCanvas - 2 * kMargin) / span;
    width_ = box.width() * scale_ + 2 * kMargin;
    height_ = box.height() * scale_ + 2 * kMargin;
    out_ += fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                width_, height_, width_, height_);
    out_ += fmt("<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n", width_,
                height_);
  }

  double sx(double x) const { return kMargin + (x - box_.x_min) * scale_; }
  double sy(double y) const { return kMargin + (box_.y_max - y) * scale_; }
  double scale() const { return scale_; }

  void polygon(const Polygon& p, const char* cls, const char* style) {
    out_ += std::string("<polygon class=\"") + cls + "\" points=\"";
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) out_ += ' ';
      out_ += fmt("%.3f,%.3f", sx(p[i].x), sy(p[i].y));
    }
    out_ += std::string("\" style=\"") + style + "\"/>\n";
  }
  void line(Point a, Point b, const char* cls, const char* style) {
    out_ += fmt("<line class=\"%s\" x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" style=\"%s\"/>\n",
                cls, sx(a.x), sy(a.y), sx(b.x), sy(b.y), style);
  }
  void dot(Point p, const char* cls, double r, const char* fill) {
    out_ += fmt("<circle class=\"%s\" cx=\"%.3f\" cy=\"%.3f\" r=\"%.1f\" fill=\"%s\"/>\n", cls,
                sx(p.x), sy(p.y), r, fill);
  }
  void label(Point p, const std::string& text, double size) {
    out_ += fmt("<text x=\"%.3f\" y=\"%.3f\" font-size=\"%.1f\" font-family=\"sans-serif\" "
                "text-anchor=\"middle\" dominant-baseline=\"central\">",
                sx(p.x), sy(p.y), size);
    out_ += escape(text) + "</text>\n";
  }
  void raw(const std::string& s) { out_ += s; }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

  template <typename... Args>
  static std::string fmt(const char* f, Args... args) {
    char buf[512];
    const int n = std::snprintf(buf, sizeof buf, f, args...);
    return std::string(buf, static_cast<std::size_t>(std::clamp(n, 0, int(sizeof buf) - 1)));
  }

 private:
  BoundingBox box_;
  double scale_ = 1.0;
  double width_ = 0.0, height_ = 0.0;
  std::string out_;
};

double font_for(double cell_px) { return std::clamp(cell_px * 0.3, 4.0, 16.0); }

}  // namespace

std::string render_regions_svg(const RegionSet& rs) {
  std::vector<Point> all;
  for (const auto& r : rs.regions) all.insert(all.end(), r.polygon.ring.begin(), r.polygon.ring.end());
  all.insert(all.end(), rs.boundary.ring.begin(), rs.boundary.ring.end());
  if (all.empty()) all.push_back({0, 0});
  Canvas c(bounding_box(all));
  for (const auto& r : rs.regions)
    c.polygon(r.polygon, "region", "fill:#dde8f0;stroke:#5a6b7a;stroke-width:0.8");
  if (rs.boundary.size() >= 3)
    c.polygon(rs.boundary, "boundary", "fill:none;stroke:#1b2a38;stroke-width:2");
  const double size = rs.size() ? font_for(c.scale() * std::sqrt(rs.total_area() / rs.size())) : 10;
  for (std::size_t i = 0; i < rs.size(); ++i) c.label(rs.centroids[i], rs.regions[i].id, size);
  return c.finish();
}

std::string render_network_svg(const LinearNetwork& net) {
  auto pts = net.positions();
  if (pts.empty()) pts.push_back({0, 0});
  Canvas c(bounding_box(pts));
  for (const auto& e : net.edges()) {
    const char* style = e.has(kConstrainedBoundary) ? "stroke:#1b2a38;stroke-width:1.5"
                                                    : "stroke:#8a9aa8;stroke-width:0.8";
    c.line(net.nodes()[e.a].pos, net.nodes()[e.b].pos, "edge", style);
  }
  const Polygon ring = net.boundary_polygon();
  if (ring.size() >= 3) c.polygon(ring, "boundary", "fill:none;stroke:#c0392b;stroke-width:2");
  for (std::size_t i = 0; i < net.centroid_count(); ++i)
    c.dot(net.nodes()[i].pos, "centroid", 2.5, "#c0392b");
  return c.finish();
}

std::string render_grid_svg(const GridLayout& layout, const std::vector<std::string>& region_ids) {
  std::vector<Point> pts;
  for (const auto& cell : layout.cells) {
    const BoundingBox b = layout.spec.cell_box(cell.row, cell.col);
    pts.push_back({b.x_min, b.y_min});
    pts.push_back({b.x_max, b.y_max});
  }
  if (pts.empty()) pts.push_back({0, 0});
  Canvas c(bounding_box(pts));
  const double px = layout.spec.s * c.scale();
  for (std::size_t i = 0; i < layout.assignment.cell_of.size(); ++i) {
    const GridCell& cell = layout.cell_for_region(i);
    const BoundingBox b = layout.spec.cell_box(cell.row, cell.col);
    c.raw(Canvas::fmt("<rect class=\"cell\" x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" "
                      "style=\"fill:#f3e3c3;stroke:#6b5a3a;stroke-width:1\"/>\n",
                      c.sx(b.x_min), c.sy(b.y_max), px, px));
    c.label(cell.center, i < region_ids.size() ? region_ids[i] : std::to_string(i), font_for(px));
  }
  if (layout.grid_outline.size() >= 3)
    c.polygon(layout.grid_outline, "outline", "fill:none;stroke:#1b2a38;stroke-width:2");
  return c.finish();
}

}  // namespace gridmap
