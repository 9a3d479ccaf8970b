#include "gridmap/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "gridmap/error.hpp"
#include "gridmap/log.hpp"
#include "gridmap/svg.hpp"
#include "json.hpp"

namespace gridmap {

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError(m, "config"); };
  snake_config(1.0).validate();
  if (!(t_f_factor > 0.0)) fail("t_f_factor must be positive (or \"inf\")");
  if (!(epsilon_factor > 0.0) || !std::isfinite(epsilon_factor)) fail("epsilon_factor must be positive");
  if (!(simplify_tol >= 0.0) || !std::isfinite(simplify_tol)) fail("simplify_tol must be >= 0");
  if (shifts.empty()) fail("shifts must not be empty");
  for (const Point& p : shifts)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) fail("shifts must be finite");
  if (md.empty()) fail("md must not be empty");
  for (double v : md)
    if (!(v >= 0.0) || !std::isfinite(v)) fail("md values must be >= 0");
  if (seeds.empty()) fail("seeds must not be empty");
  double wsum = 0.0;
  for (double w : topsis_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail("topsis_weights must be >= 0");
    wsum += w;
  }
  if (!(wsum > 0.0)) fail("topsis_weights must not all be zero");
  if (quality.shape.harmonics == 0 || quality.shape.samples < 2 * quality.shape.harmonics + 1)
    fail("shape_samples must exceed twice shape_harmonics");
}

SnakeConfig PipelineConfig::snake_config(double s) const {
  SnakeConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.t_f = t_f_factor * s;
  c.epsilon = epsilon_factor * s;
  c.t_s = t_s;
  c.lambda = lambda;
  c.schedule = schedule;
  c.relaxation = relaxation;
  c.rebuild_network = rebuild_network;
  return c;
}

namespace {

using nlohmann::json;

double number(const json& v, const char* key) {
  if (!v.is_number()) throw ValidationError(std::string(key) + " must be a number", "config");
  return v.get<double>();
}

template <typename Enum>
Enum choice(const json& v, const char* key, std::initializer_list<std::pair<const char*, Enum>> opts) {
  if (v.is_string())
    for (const auto& [name, e] : opts)
      if (v.get<std::string>() == name) return e;
  std::string names;
  for (const auto& [name, e] : opts) names += std::string(names.empty() ? "" : ", ") + name;
  throw ValidationError(std::string(key) + " must be one of: " + names, "config");
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config must be a JSON object", "config");
  PipelineConfig c;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "alpha") c.alpha = number(v, "alpha");
      else if (key == "beta") c.beta = number(v, "beta");
      else if (key == "t_f_factor") {
        if (v.is_string() && (v == "inf" || v == "infinity"))
          c.t_f_factor = std::numeric_limits<double>::infinity();
        else
          c.t_f_factor = number(v, "t_f_factor");
      } else if (key == "epsilon_factor") c.epsilon_factor = number(v, "epsilon_factor");
      else if (key == "t_s") {
        if (!v.is_number_integer()) throw ValidationError("t_s must be an integer", "config");
        c.t_s = v.get<int>();
      } else if (key == "lambda") c.lambda = number(v, "lambda");
      else if (key == "simplify_tol") c.simplify_tol = number(v, "simplify_tol");
      else if (key == "stiffness_schedule")
        c.schedule = choice<StiffnessSchedule>(v, "stiffness_schedule",
                                               {{"force_matched", StiffnessSchedule::force_matched},
                                                {"constant", StiffnessSchedule::constant}});
      else if (key == "relaxation") c.relaxation = number(v, "relaxation");
      else if (key == "rebuild_network") c.rebuild_network = v.get<bool>();
      else if (key == "shifts") {
        c.shifts.clear();
        for (const auto& p : v) {
          if (!p.is_array() || p.size() != 2) throw ValidationError("shifts are [dx, dy] pairs", "config");
          c.shifts.push_back({number(p[0], "shift"), number(p[1], "shift")});
        }
      } else if (key == "md") {
        c.md.clear();
        for (const auto& x : v) c.md.push_back(number(x, "md"));
      } else if (key == "seeds") {
        c.seeds.clear();
        for (const auto& x : v) {
          if (!x.is_number_unsigned()) throw ValidationError("seeds must be non-negative integers", "config");
          c.seeds.push_back(x.get<std::uint64_t>());
        }
      } else if (key == "topsis_weights") {
        if (!v.is_array() || v.size() != 4)
          throw ValidationError("topsis_weights needs 4 numbers", "config");
        for (std::size_t i = 0; i < 4; ++i) c.topsis_weights[i] = number(v[i], "topsis_weights");
      } else if (key == "adjacency_mode")
        c.quality.adjacency = choice<GridAdjacency>(
            v, "adjacency_mode", {{"rook", GridAdjacency::rook}, {"queen", GridAdjacency::queen}});
      else if (key == "location_reference")
        c.quality.location = choice<LocationReference>(
            v, "location_reference",
            {{"transformed", LocationReference::transformed}, {"original", LocationReference::original}});
      else if (key == "shape_samples") c.quality.shape.samples = v.get<std::size_t>();
      else if (key == "shape_harmonics") c.quality.shape.harmonics = v.get<std::size_t>();
      else if (key == "outputs") {
        if (!v.is_object()) throw ValidationError("outputs must be an object", "config");
        for (const auto& [k, flag] : v.items()) {
          if (k == "json") c.outputs.json = flag.get<bool>();
          else if (k == "csv") c.outputs.csv = flag.get<bool>();
          else if (k == "svg") c.outputs.svg = flag.get<bool>();
          else if (k == "trace") c.outputs.trace = flag.get<bool>();
          else throw ValidationError("unknown outputs key '" + k + "'", "config");
        }
      } else {
        throw ValidationError("unknown config key '" + key + "'", "config");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what(), "config");
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string(), "config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pipeline_config(ss.str());
}

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRIDMAP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<std::size_t>(v);
    else warn(std::string("ignoring GRIDMAP_THREADS='") + env + "'");
  }
  return n;
}

namespace {

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Results go into
// caller-owned slots; the lowest-index failure is rethrown after the join.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(worker_count(), n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

RegionSet prepare_regions(RegionSet rs, double simplify_tol) {
  if (simplify_tol > 0.0) {
    rs.boundary = simplify_boundary(rs.boundary, simplify_tol);
    if (!polygon_is_simple(rs.boundary))
      throw TopologyError("simplified boundary self-intersects; lower simplify_tol");
  }
  return rs;
}

std::vector<std::string> PipelineResult::region_ids() const {
  std::vector<std::string> ids;
  for (const auto& r : regions.regions) ids.push_back(r.id);
  return ids;
}

PipelineResult run_pipeline(RegionSet rs, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult out;
  out.regions = prepare_regions(std::move(rs), cfg.simplify_tol);
  const RegionSet& regions = out.regions;
  out.s = grid_size(regions.total_area(), regions.size());
  const double nudge = 1e-6 * out.s;
  out.network = build_network(regions, nudge);
  const SnakeConfig snake_cfg = cfg.snake_config(out.s);

  // One snake run per distinct start: md = 0 needs no seed.
  bool have_plain = false;
  for (double md : cfg.md) {
    if (md == 0.0) {
      if (have_plain) continue;
      have_plain = true;
      out.runs.push_back({0.0, 0, {}, {}});
    } else {
      for (std::uint64_t seed : cfg.seeds) out.runs.push_back({md, seed, {}, {}});
    }
  }

  const LinearNetwork& base = out.network;
  parallel_for(out.runs.size(), [&](std::size_t r) {
    SnakeRun& run = out.runs[r];
    const auto original = base.centroid_positions();
    run.start_centroids = gaussian_noise(original, run.md, base, run.seed);
    for (std::size_t i = 0; i < original.size(); ++i)
      if (!point_strictly_inside(run.start_centroids[i], regions.boundary, nudge))
        run.start_centroids[i] = original[i];
    const LinearNetwork start =
        run.md == 0.0 ? base
                      : build_network(run.start_centroids, regions.boundary, regions.adjacency, nudge);
    run.result = run_snake(start, regions, snake_cfg);
  });

  const std::size_t shifts = cfg.shifts.size();
  std::vector<std::optional<Candidate>> slots(out.runs.size() * shifts);
  parallel_for(slots.size(), [&](std::size_t k) {
    const std::size_t r = k / shifts;
    const SnakeRun& run = out.runs[r];
    const LinearNetwork& moved = run.result.network;
    const auto centroids = moved.centroid_positions();
    Candidate c;
    c.shift = cfg.shifts[k % shifts];
    c.md = run.md;
    c.seed = run.seed;
    c.run = r;
    try {
      c.layout = fit_grid(moved.boundary_polygon(), centroids, out.s, c.shift);
    } catch (const InfeasibleGridError& e) {
      warn(std::string("skipping candidate: ") + e.what());
      return;
    }
    c.report = evaluate_layout(regions, base, centroids, c.layout, cfg.quality);
    slots[k] = std::move(c);
  });
  for (auto& slot : slots) {
    if (slot) out.candidates.push_back(std::move(*slot));
    else ++out.skipped;
  }
  if (out.candidates.empty())
    throw InfeasibleGridError("no candidate layout could place all " +
                              std::to_string(regions.size()) + " regions");

  std::vector<QualityReport> reports;
  for (const auto& c : out.candidates) reports.push_back(c.report);
  const TopsisResult t = topsis_select(reports, cfg.topsis_weights);
  for (std::size_t i = 0; i < out.candidates.size(); ++i) out.candidates[i].closeness = t.closeness[i];
  out.chosen = t.chosen;
  return out;
}

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(const PipelineResult& result, std::ostream& out) {
  out << "shift_x,shift_y,md,seed,c_location,c_adjacent,c_orientation,c_shape,topsis_closeness,chosen\n";
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    const Candidate& c = result.candidates[i];
    out << fmt_num(c.shift.x) << ',' << fmt_num(c.shift.y) << ',' << fmt_num(c.md) << ',' << c.seed
        << ',' << fmt_num(c.report.c_location) << ',' << fmt_num(c.report.c_adjacent) << ','
        << fmt_num(c.report.c_orientation) << ',' << fmt_num(c.report.c_shape) << ','
        << fmt_num(c.closeness) << ',' << (i == result.chosen ? 1 : 0) << '\n';
  }
}

void write_run_trace_csv(const PipelineResult& result, std::ostream& out) {
  out << "run,md,seed,step,f_max,max_displacement,applied,stop_reason\n";
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const SnakeRun& run = result.runs[r];
    std::ostringstream body;
    write_trace_csv(run.result.state, body);
    std::istringstream lines(body.str());
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line))
      out << r << ',' << fmt_num(run.md) << ',' << run.seed << ',' << line << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write " + tmp.string(), "output");
    f << content;
    f.flush();
    if (!f) throw ValidationError("write failed for " + tmp.string(), "output");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot move " + tmp.string() + " into place: " + ec.message(), "output");
}

void write_artifacts(const PipelineResult& result, const PipelineConfig& cfg,
                     const std::filesystem::path& dir, bool debug) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string(), "output");
  const Candidate& best = result.best();
  const auto ids = result.region_ids();
  if (cfg.outputs.json) {
    std::ostringstream os;
    write_layout_json(best.layout, ids, os);
    write_file_atomic(dir / "layout.json", os.str());
  }
  if (cfg.outputs.csv) {
    std::ostringstream os;
    write_metrics_csv(result, os);
    write_file_atomic(dir / "metrics.csv", os.str());
  }
  if (cfg.outputs.trace || debug) {
    std::ostringstream os;
    write_run_trace_csv(result, os);
    write_file_atomic(dir / "trace.csv", os.str());
  }
  if (cfg.outputs.svg) {
    write_file_atomic(dir / "original.svg", render_regions_svg(result.regions));
    write_file_atomic(dir / "network.svg",
                      render_network_svg(result.runs.at(best.run).result.network));
    write_file_atomic(dir / "gridmap.svg", render_grid_svg(best.layout, ids));
  }
  if (debug) {
    std::ostringstream a, b;
    write_network_geojson(result.network, a);
    write_file_atomic(dir / "network_input.geojson", a.str());
    write_network_geojson(result.runs.at(best.run).result.network, b);
    write_file_atomic(dir / "network_transformed.geojson", b.str());
  }
}

std::vector<BenchRow> run_bench(const RegionSet& rs, const std::vector<double>& tols,
                                const PipelineConfig& cfg) {
  std::vector<BenchRow> rows;
  for (double tol : tols) {
    if (!(tol >= 0.0) || !std::isfinite(tol))
      throw ValidationError("tolerances must be >= 0", "config");
    PipelineConfig c = cfg;
    c.simplify_tol = tol;
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineResult res = run_pipeline(rs, c);
    const auto t1 = std::chrono::steady_clock::now();
    BenchRow row;
    row.simplify_tol = tol;
    row.n_region = res.network.centroid_count();
    row.n_boundary = res.network.boundary_count();
    row.wall_time = std::chrono::duration<double>(t1 - t0).count();
    rows.push_back(row);
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "simplify_tol,N_region,N_boundary,N_sum,N_ratio,wall_time\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%zu,%zu,%.17g,%.6f\n", r.simplify_tol, r.n_region,
                  r.n_boundary, r.n_sum(), r.n_ratio(), r.wall_time);
    out << buf;
  }
}

}  // namespace gridmap
