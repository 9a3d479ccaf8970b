#include <istream>
#include <iterator>
#include <sstream>

#include "gridmap/error.hpp"
#include "gridmap/geometry.hpp"
#include "gridmap/log.hpp"
#include "json.hpp"

namespace gridmap {
namespace {

using nlohmann::json;

std::vector<Point> read_ring(const json& coords) {
  if (!coords.is_array()) throw ParseError("ring coordinates must be an array");
  std::vector<Point> pts;
  pts.reserve(coords.size());
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
      throw ParseError("position must be an array of at least two numbers");
    pts.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  return pts;
}

Polygon read_polygon_rings(const json& rings, const std::string& what) {
  if (!rings.is_array() || rings.empty()) throw ParseError(what + ": polygon without rings");
  if (rings.size() > 1)
    throw TopologyError(what + ": polygons with interior rings (holes) are not supported");
  return clean_ring(read_ring(rings[0]));
}

Polygon read_geometry(const json& geom, const std::string& what) {
  if (!geom.is_object() || !geom.contains("type")) throw ParseError(what + ": missing geometry");
  const std::string type = geom.at("type").get<std::string>();
  const json& coords = geom.at("coordinates");
  if (type == "Polygon") return read_polygon_rings(coords, what);
  if (type == "MultiPolygon") {
    if (!coords.is_array() || coords.empty()) throw ParseError(what + ": empty MultiPolygon");
    Polygon best;
    double best_area = -1.0;
    for (const auto& part : coords) {
      if (!part.is_array() || part.empty()) throw ParseError(what + ": empty polygon part");
      Polygon p = clean_ring(read_ring(part[0]));
      const double a = area(p);
      if (a > best_area) {
        best_area = a;
        best = std::move(p);
      }
    }
    if (coords.size() > 1)
      warn(what + ": MultiPolygon with " + std::to_string(coords.size()) +
           " parts; keeping the largest ring");
    return best;
  }
  throw ParseError(what + ": unsupported geometry type '" + type + "'");
}

std::string feature_id(const json& feature, std::size_t index) {
  auto as_id = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
      std::ostringstream os;
      os << v.get<double>();
      return os.str();
    }
    return {};
  };
  if (feature.contains("properties") && feature["properties"].is_object()) {
    const json& props = feature["properties"];
    for (const char* key : {"id", "name"})
      if (props.contains(key)) {
        std::string s = as_id(props[key]);
        if (!s.empty()) return s;
      }
  }
  if (feature.contains("id")) {
    std::string s = as_id(feature["id"]);
    if (!s.empty()) return s;
  }
  throw ValidationError("feature " + std::to_string(index) + " has no string id or name", "load");
}

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed GeoJSON: ") + e.what());
  }
}

std::string slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<Region> parse_regions(std::string_view text) {
  const json doc = parse(text);
  try {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
      throw ParseError("expected a GeoJSON FeatureCollection");
    const json& features = doc.at("features");
    if (!features.is_array()) throw ParseError("'features' must be an array");
    std::vector<Region> regions;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const json& f = features[i];
      std::string id = feature_id(f, i);
      Polygon p = read_geometry(f.at("geometry"), "region '" + id + "'");
      regions.push_back({std::move(id), std::move(p)});
    }
    return regions;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed GeoJSON: ") + e.what());
  }
}

RegionSet load_regions(std::string_view text, std::optional<Polygon> boundary) {
  return make_region_set(parse_regions(text), std::move(boundary));
}

RegionSet load_regions(std::istream& source, std::optional<Polygon> boundary) {
  return load_regions(slurp(source), std::move(boundary));
}

Polygon load_boundary(std::string_view text) {
  const json doc = parse(text);
  try {
    const std::string type = doc.value("type", "");
    Polygon p;
    if (type == "FeatureCollection") {
      const json& features = doc.at("features");
      if (features.size() != 1) throw ParseError("boundary collection must hold exactly one feature");
      p = read_geometry(features[0].at("geometry"), "boundary");
    } else if (type == "Feature") {
      p = read_geometry(doc.at("geometry"), "boundary");
    } else {
      p = read_geometry(doc, "boundary");
    }
    validate_polygon(p, "boundary");
    return make_ccw(std::move(p));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed boundary GeoJSON: ") + e.what());
  }
}

Polygon load_boundary(std::istream& source) { return load_boundary(slurp(source)); }

}  // namespace gridmap
