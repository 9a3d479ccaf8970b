// gridmap: turn a polygon map into a square-cell grid map.
//
//   gridmap generate --input regions.geojson [--boundary b.geojson] [--config c.json] --out dir [--trace]
//   gridmap bench --input regions.geojson --tols 0,0.01,0.05 --out bench.csv
//   gridmap render --layout layout.json --out grid.svg

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gridmap/error.hpp"
#include "gridmap/pipeline.hpp"
#include "gridmap/svg.hpp"

namespace {

using namespace gridmap;

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(std::string("cannot open ") + what + " file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RegionSet read_regions(const std::string& input, const std::string& boundary) {
  std::optional<Polygon> ring;
  if (!boundary.empty()) ring = load_boundary(read_text(boundary, "boundary"));
  return load_regions(read_text(input, "input"), std::move(ring));
}

PipelineConfig read_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : parse_pipeline_config(read_text(path, "config"));
}

int report(const Error& e) {
  std::fprintf(stderr, "error [stage %s]: %s\n", e.stage().c_str(), e.what());
  return exit_code(e.kind());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid map generation from polygon maps"};
  app.require_subcommand(1);

  std::string input, boundary, config, out, layout_path;
  std::vector<double> tols;
  bool trace = false;

  auto* gen = app.add_subcommand("generate", "Build a grid map and write layout, metrics and renders");
  gen->add_option("--input", input, "GeoJSON FeatureCollection of region polygons")->required();
  gen->add_option("--boundary", boundary, "GeoJSON polygon used as the outer boundary");
  gen->add_option("--config", config, "JSON configuration overrides");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_flag("--trace", trace, "Also dump the linear networks as GeoJSON");

  auto* bench = app.add_subcommand("bench", "Time the pipeline across boundary simplification levels");
  bench->add_option("--input", input, "GeoJSON FeatureCollection of region polygons")->required();
  bench->add_option("--tols", tols, "Simplification tolerances")->required()->delimiter(',');
  bench->add_option("--config", config, "JSON configuration overrides");
  bench->add_option("--out", out, "CSV output path")->required();

  auto* render = app.add_subcommand("render", "Draw a layout JSON as SVG");
  render->add_option("--layout", layout_path, "layout.json from generate")->required();
  render->add_option("--out", out, "SVG output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const PipelineConfig cfg = read_config(config);
      const PipelineResult res = run_pipeline(read_regions(input, boundary), cfg);
      write_artifacts(res, cfg, out, trace);
      const Candidate& best = res.best();
      std::printf("chosen shift (%g, %g) md %g seed %llu: c_location %.6g c_adjacent %.6g "
                  "c_orientation %.6g c_shape %.6g (%zu candidates, %zu skipped)\n",
                  best.shift.x, best.shift.y, best.md, static_cast<unsigned long long>(best.seed),
                  best.report.c_location, best.report.c_adjacent, best.report.c_orientation,
                  best.report.c_shape, res.candidates.size(), res.skipped);
    } else if (*bench) {
      const PipelineConfig cfg = read_config(config);
      const auto rows = run_bench(read_regions(input, ""), tols, cfg);
      std::ostringstream os;
      write_bench_csv(rows, os);
      write_file_atomic(out, os.str());
      std::fputs(os.str().c_str(), stdout);
    } else if (*render) {
      std::ifstream in(layout_path);
      if (!in) throw ParseError("cannot open layout file '" + layout_path + "'");
      const LayoutDocument doc = read_layout_json(in);
      write_file_atomic(out, render_grid_svg(doc.layout, doc.region_ids));
    }
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [stage internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
