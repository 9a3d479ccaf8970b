// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "gridmap/error.hpp"
#include "gridmap/gridfit.hpp"
#include "gridmap/linalg.hpp"
#include "gridmap/log.hpp"
#include "gridmap/network.hpp"
#include "gridmap/pipeline.hpp"
#include "gridmap/quality.hpp"
#include "gridmap/snake.hpp"
#include "synthetic.hpp"

using namespace gridmap;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail = why;
  o.pass = false;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool state_is_valid(const LinearNetwork& net) {
  const Polygon b = net.boundary_polygon();
  if (!polygon_is_simple(b)) return false;
  for (const Point& c : net.centroid_positions())
    if (!point_strictly_inside(c, b)) return false;
  return true;
}

std::vector<double> centroid_link_lengths(const LinearNetwork& net) {
  std::vector<double> out;
  for (const auto& e : net.edges())
    if (e.a < net.centroid_count() && e.b < net.centroid_count()) out.push_back(e.length);
  return out;
}

double stddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// 1. Perfect tilings are fixed points of the whole pipeline.
Outcome fixed_point_identity() {
  Outcome o;
  double worst_time = 0.0;
  for (int k : {2, 3, 5}) {
    PipelineConfig cfg;
    cfg.shifts = {{0, 0}};
    cfg.md = {0.0};
    const auto t0 = Clock::now();
    const PipelineResult r = run_pipeline(testing::tiling(k, k), cfg);
    const double t = seconds_since(t0);
    worst_time = std::max(worst_time, t);
    const auto& st = r.runs.at(0).result.state;
    const auto& rep = r.best().report;
    const std::string tag = "k=" + std::to_string(k) + ": ";
    if (st.stop_reason != StopReason::converged) fail(o, tag + "did not stop on convergence");
    if (st.max_disp_curr != 0.0) fail(o, tag + "non-zero displacement");
    if (!(rep.c_location <= 1e-9)) fail(o, tag + "c_location " + fmt("%.3g", rep.c_location));
    if (rep.c_adjacent != 1.0) fail(o, tag + "c_adjacent " + fmt("%.6f", rep.c_adjacent));
    if (rep.c_orientation != 0.0) fail(o, tag + "c_orientation " + fmt("%.3g", rep.c_orientation));
    if (!(rep.c_shape >= 0.999)) fail(o, tag + "c_shape " + fmt("%.6f", rep.c_shape));
    if (!(t < 1.0)) fail(o, tag + "runtime " + fmt("%.3f s", t));
  }
  if (o.pass) o.detail = "k in {2,3,5}, slowest " + fmt("%.3f s", worst_time);
  return o;
}

// 2. Element stiffness matrix properties over random parameters.
Outcome stiffness_correctness() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> e(-3.0, 3.0);
  double worst_eig = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double h = std::pow(10.0, e(rng));
    const double alpha = std::pow(10.0, e(rng) + 3), beta = std::pow(10.0, e(rng) + 3);
    const Matrix4 k = element_stiffness(h, alpha, beta);
    Eigen::Matrix4d m;
    double scale = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        m(i, j) = k[i][j];
        scale = std::max(scale, std::abs(k[i][j]));
      }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (std::abs(k[i][j] - k[j][i]) > 1e-12 * scale) fail(o, "asymmetric");
    const Eigen::Vector4d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(m).eigenvalues();
    const double rel = ev.minCoeff() / ev.cwiseAbs().maxCoeff();
    worst_eig = std::min(worst_eig, rel);
    if (rel < -1e-9) fail(o, "negative eigenvalue " + fmt("%.3g", rel));
    const double h2 = h * h, h3 = h2 * h;
    if (k[0][0] != (6 * alpha * h2 + 60 * beta) / (5 * h3)) fail(o, "diagonal anchor mismatch");
    for (int i = 0; i < 4; ++i)
      if (std::abs(k[i][0] + k[i][2]) > 1e-9 * scale) fail(o, "rigid translation not annihilated");
  }
  if (o.pass) o.detail = "1000 matrices, min relative eigenvalue " + fmt("%.2e", worst_eig);
  return o;
}

// 3. Shifted Cholesky with refinement: residual, zero load, dense oracle.
Outcome solver_contract() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double worst_res = 0.0, worst_err = 0.0;
  std::size_t largest = 0;
  const std::pair<int, int> sizes[] = {{1, 2}, {2, 2}, {2, 3}, {3, 3}, {3, 4}, {4, 4},
                                       {4, 5}, {5, 5}, {5, 6}, {6, 6}, {6, 7}, {7, 7}, {7, 8}};
  for (int trial = 0; trial < 40; ++trial) {
    const auto [rows, cols] = sizes[trial % std::size(sizes)];
    auto pl = testing::perturbed_lattice(rows, cols, 0.3, rng);
    ForceField ff;
    ff.force.assign(pl.network.nodes().size(), Point{});
    for (std::size_t i = 0; i < pl.network.centroid_count(); ++i) ff.force[i] = {g(rng), g(rng)};
    SnakeConfig cfg;
    SnakeSystem sys = assemble(pl.network, ff, cfg);
    if (trial % 2 == 0) remove_rigid_translation(sys);
    const std::size_t n = sys.k.size();
    if (n > 200) continue;
    largest = std::max(largest, n);
    const SolveResult r = solve(sys, cfg.lambda);

    Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = sys.k(i, j) + (i == j ? r.shift : 0.0);
    const auto ldlt = a.ldlt();
    for (int axis = 0; axis < 2; ++axis) {
      const auto& f = axis ? sys.fy : sys.fx;
      const auto& d = axis ? r.dy : r.dx;
      const auto ad = sys.k.multiply(d, r.shift);
      long double res = 0, fn = 0;
      Eigen::Matrix<long double, Eigen::Dynamic, 1> b(n);
      for (std::size_t i = 0; i < n; ++i) {
        res += (ad[i] - f[i]) * (ad[i] - f[i]);
        fn += static_cast<long double>(f[i]) * f[i];
        b(i) = f[i];
      }
      const double rel_res = static_cast<double>(std::sqrt(res / fn));
      worst_res = std::max(worst_res, rel_res);
      if (rel_res > 1e-8) fail(o, "residual " + fmt("%.3g", rel_res));
      const auto ref = ldlt.solve(b);
      long double diff = 0, rn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        diff += (d[i] - ref(i)) * (d[i] - ref(i));
        rn += ref(i) * ref(i);
      }
      const double rel_err = static_cast<double>(std::sqrt(diff / rn));
      worst_err = std::max(worst_err, rel_err);
      if (rel_err > 1e-8) fail(o, "oracle mismatch " + fmt("%.3g", rel_err));
    }
    SnakeSystem zero = sys;
    std::fill(zero.fx.begin(), zero.fx.end(), 0.0);
    std::fill(zero.fy.begin(), zero.fy.end(), 0.0);
    const SolveResult z = solve(zero, cfg.lambda);
    for (std::size_t i = 0; i < n; ++i)
      if (z.dx[i] != 0.0 || z.dy[i] != 0.0) fail(o, "zero load gave non-zero displacement");
  }
  if (o.pass)
    o.detail = "up to " + std::to_string(largest) + " DOFs, residual " + fmt("%.2e", worst_res) +
               ", oracle " + fmt("%.2e", worst_err);
  return o;
}

// 4. Uniform force scaling under the ceiling.
Outcome clamp_invariant() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.01, 3.0);
  int clamped = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto pl = testing::perturbed_lattice(2 + trial % 4, 2 + trial % 3, 0.3, rng);
    const auto pos = pl.network.positions();
    std::vector<Point> target(pl.network.centroid_count());
    double raw_max = 0.0;
    std::size_t raw_arg = 0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      target[i] = pos[i] + Point{g(rng), g(rng)};
      const double m = distance(target[i], pos[i]);
      if (m > raw_max) {
        raw_max = m;
        raw_arg = i;
      }
    }
    const double t_f = u(rng);
    const ForceField ff = compute_forces(pl.network, target, t_f);
    if (raw_max > t_f) {
      ++clamped;
      double post = 0.0;
      for (const Point& f : ff.force) post = std::max(post, norm(f));
      if (post != t_f || ff.f_max != t_f) fail(o, "post-clamp max " + fmt("%.17g", post));
    }
    if (ff.argmax != raw_arg) fail(o, "argmax moved");
    for (std::size_t i = 0; i < target.size(); ++i) {
      const Point raw = target[i] - pos[i], f = ff.force[i];
      const double nr = norm(raw), nf = norm(f);
      if (nr == 0.0) continue;
      const double sin_angle = std::abs(cross(raw, f)) / (nr * nf);
      if (sin_angle > 1e-12 || raw.x * f.x + raw.y * f.y <= 0.0) fail(o, "direction changed");
    }
  }
  if (o.pass) o.detail = "200 fields, " + std::to_string(clamped) + " clamped";
  return o;
}

struct LatticeStats {
  int trials = 0;
  int terminated = 0;
  int monotone = 0;
  int spread_reduced = 0;
  int valid = 0;
};

LatticeStats perturbed_lattice_trials() {
  LatticeStats s;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> side(2, 5);
  std::uniform_real_distribution<double> amp(0.05, 0.4);
  for (int t = 0; t < 50; ++t) {
    ++s.trials;
    const auto pl = testing::perturbed_lattice(side(rng), side(rng), amp(rng), rng);
    const SnakeConfig cfg = SnakeConfig::for_grid_size(1.0);
    const SnakeResult r = run_snake(pl.network, pl.regions, cfg);
    s.terminated += r.state.step <= cfg.t_s && r.state.stop_reason != StopReason::none;
    bool mono = true;
    for (std::size_t i = 1; i < r.state.trace.size(); ++i)
      mono = mono && r.state.trace[i].max_displacement <= r.state.trace[i - 1].max_displacement;
    s.monotone += mono;
    s.spread_reduced += stddev(centroid_link_lengths(r.network)) <= stddev(centroid_link_lengths(pl.network));
    s.valid += state_is_valid(r.network);
  }
  return s;
}

// 5. Termination, monotone displacement trace, neighbour-distance spread.
Outcome termination_monotonicity(const LatticeStats& s) {
  Outcome o;
  if (s.terminated != s.trials) fail(o, std::to_string(s.trials - s.terminated) + " runs did not stop");
  if (s.monotone != s.trials) fail(o, std::to_string(s.trials - s.monotone) + " non-monotone traces");
  if (10 * s.spread_reduced < 9 * s.trials)
    fail(o, "spread reduced in only " + std::to_string(s.spread_reduced) + "/" + std::to_string(s.trials));
  if (o.pass)
    o.detail = std::to_string(s.trials) + " trials, spread reduced in " + std::to_string(s.spread_reduced);
  return o;
}

// 6. Transformed boundary stays simple and keeps every centroid inside.
Outcome boundary_integrity(const LatticeStats& s) {
  Outcome o;
  if (s.valid != s.trials) fail(o, std::to_string(s.trials - s.valid) + " invalid final states");
  if (o.pass) o.detail = std::to_string(s.valid) + "/" + std::to_string(s.trials) + " valid";
  return o;
}

// 7. Hungarian cost equals the exhaustive minimum.
Outcome assignment_optimality() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + t % 8;
    std::vector<Point> c(m);
    std::vector<GridCell> cells(m);
    for (std::size_t i = 0; i < m; ++i) {
      c[i] = {u(rng), u(rng)};
      cells[i].center = {u(rng), u(rng)};
    }
    const Assignment a = assign_regions(c, cells);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < m; ++i) cost += squared_distance(c[i], cells[perm[i]].center);
      best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (a.total_cost != best) fail(o, "trial " + std::to_string(t) + ": " + fmt("%.17g", a.total_cost) + " vs " + fmt("%.17g", best));
  }
  if (o.pass) o.detail = "100 instances, M <= 8";
  return o;
}

// 8. Relative-neighbour pruning against the definition.
Outcome rng_correctness() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t checked = 0;
  for (int t = 0; t < 100; ++t) {
    const int ring_n = 4 + t % 13;
    const int inner_n = 1 + t % 24;
    std::vector<double> angles;
    for (int i = 0; i < ring_n; ++i) angles.push_back(2 * std::numbers::pi * u(rng));
    std::sort(angles.begin(), angles.end());
    Polygon ring;
    for (double a : angles) ring.ring.push_back({10 * std::cos(a), 10 * std::sin(a)});
    std::vector<Point> inner;
    while (static_cast<int>(inner.size()) < inner_n) {
      const Point p{u(rng) * 20 - 10, u(rng) * 20 - 10};
      if (point_strictly_inside(p, ring, 0.05)) inner.push_back(p);
    }
    const Triangulation tri = build_cdt(inner, ring);
    std::vector<RegionPair> adjacency;
    if (inner.size() >= 2) adjacency.push_back({0, 1});
    const LinearNetwork net = extract_network(tri, adjacency);
    std::set<std::pair<std::size_t, std::size_t>> kept;
    for (const auto& e : net.edges()) kept.insert({e.a, e.b});
    for (const auto& e : tri.edges()) {
      const bool is_protected = e.constrained || (e.a == 0 && e.b == 1 && !adjacency.empty());
      if (is_protected) continue;
      const double ab = squared_distance(tri.vertices[e.a], tri.vertices[e.b]);
      bool keep = true;
      for (std::size_t w = 0; w < tri.vertices.size() && keep; ++w)
        if (w != e.a && w != e.b && squared_distance(tri.vertices[e.a], tri.vertices[w]) < ab &&
            squared_distance(tri.vertices[e.b], tri.vertices[w]) < ab)
          keep = false;
      ++checked;
      if (keep != (kept.count({e.a, e.b}) == 1)) fail(o, "edge disagreement in set " + std::to_string(t));
    }
  }
  if (o.pass) o.detail = "100 point sets, " + std::to_string(checked) + " unprotected edges";
  return o;
}

// 9. Without the force ceiling the non-uniform map breaks; with it, it does not.
Outcome force_threshold_ablation() {
  Outcome o;
  const RegionSet rs = testing::non_uniform_map();
  const LinearNetwork net = build_network(rs, 1e-6);
  const double s = grid_size(rs.total_area(), rs.size());
  auto first_bad_step = [&](double t_f_factor) -> int {
    // Replays the run with growing budgets to inspect every accepted state.
    for (int budget = 1; budget <= 30; ++budget) {
      SnakeConfig cfg = SnakeConfig::for_grid_size(s);
      cfg.t_f = t_f_factor * s;
      cfg.t_s = budget;
      try {
        const SnakeResult r = run_snake(net, rs, cfg);
        if (!state_is_valid(r.network)) return budget;
        if (r.state.step < budget) break;
      } catch (const Error&) {
        return budget;
      }
    }
    return 0;
  };
  const int with_ceiling = first_bad_step(0.5);
  const int without = first_bad_step(std::numeric_limits<double>::infinity());
  if (with_ceiling != 0) fail(o, "default ceiling broke at step " + std::to_string(with_ceiling));
  if (without == 0) fail(o, "no breakage without the ceiling");
  if (o.pass) o.detail = "no ceiling: invalid at step " + std::to_string(without) + "; default: valid throughout";
  return o;
}

// 10. Default sweep: layout diversity, TOPSIS non-domination, runtime near 200 nodes.
Outcome strategy_sweep() {
  Outcome o;
  const PipelineResult r = run_pipeline(testing::non_uniform_map(), PipelineConfig{});
  std::set<std::vector<std::pair<long long, long long>>> layouts;
  for (const auto& c : r.candidates) {
    std::vector<std::pair<long long, long long>> key;
    for (std::size_t i = 0; i < r.regions.size(); ++i) {
      const Point p = c.layout.cell_for_region(i).center;
      key.push_back({std::llround(p.x / r.s * 1e6), std::llround(p.y / r.s * 1e6)});
    }
    layouts.insert(key);
  }
  if (layouts.size() < 6) fail(o, std::to_string(layouts.size()) + " distinct layouts");
  const auto& best = r.best().report;
  for (const auto& c : r.candidates) {
    const auto& q = c.report;
    if (q.c_location < best.c_location && q.c_adjacent > best.c_adjacent &&
        q.c_orientation < best.c_orientation && q.c_shape > best.c_shape)
      fail(o, "chosen candidate is dominated");
  }

  const RegionSet big = testing::wiggly_disc(16, 184);
  const LinearNetwork net = build_network(big, 1e-6);
  const auto t0 = Clock::now();
  const PipelineResult rb = run_pipeline(big, PipelineConfig{});
  const double t = seconds_since(t0);
  if (!(t < 30.0)) fail(o, "sweep took " + fmt("%.2f s", t));
  if (o.pass)
    o.detail = std::to_string(layouts.size()) + " distinct of " + std::to_string(r.candidates.size()) +
               "; N_sum " + std::to_string(net.nodes().size()) + " sweep " + fmt("%.2f s", t) + " (" +
               std::to_string(rb.candidates.size()) + " candidates)";
  return o;
}

// 11. Bench wall time grows with node count; columns satisfy their identities.
Outcome efficiency_scaling() {
  Outcome o;
  const RegionSet rs = testing::wiggly_disc(8, 640);
  const std::vector<double> tols{0.3, 0.08, 0.02, 0.0};
  const auto rows = run_bench(rs, tols, PipelineConfig{});
  std::ostringstream csv;
  write_bench_csv(rows, csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  std::vector<std::tuple<std::size_t, double>> by_size;
  std::string summary;
  while (std::getline(in, line)) {
    double tol, ratio, wall;
    std::size_t nr, nb, ns;
    if (std::sscanf(line.c_str(), "%lf,%zu,%zu,%zu,%lf,%lf", &tol, &nr, &nb, &ns, &ratio, &wall) != 6) {
      fail(o, "malformed row: " + line);
      continue;
    }
    if (ns != nr + nb) fail(o, "N_sum identity broken");
    if (ratio != static_cast<double>(nr) / static_cast<double>(nb)) fail(o, "N_ratio identity broken");
    by_size.push_back({ns, wall});
    summary += (summary.empty() ? "" : ", ") + std::to_string(ns) + ":" + fmt("%.3fs", wall);
  }
  if (by_size.size() != tols.size()) fail(o, "row count");
  std::sort(by_size.begin(), by_size.end());
  for (std::size_t i = 1; i < by_size.size(); ++i) {
    if (std::get<0>(by_size[i]) == std::get<0>(by_size[i - 1])) fail(o, "repeated N_sum");
    if (!(std::get<1>(by_size[i]) > std::get<1>(by_size[i - 1]))) fail(o, "wall time not increasing (" + summary + ")");
  }
  if (o.pass) o.detail = summary;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 12. Two CLI runs with the same input and config give identical files.
Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "gridmap_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "map.geojson") << testing::to_geojson(testing::non_uniform_map());
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(GRIDMAP_CLI) + " generate --input " + (dir / "map.geojson").string() +
                            " --out " + (dir / run).string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) fail(o, std::string("run ") + run + " failed");
  }
  for (const char* f : {"layout.json", "metrics.csv"}) {
    const std::string a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
    if (a.empty() || a != b) fail(o, std::string(f) + " differs");
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = "layout.json and metrics.csv identical";
  return o;
}

}  // namespace

int main() {
  set_warning_sink([](const std::string&) {});
  const LatticeStats lattice = perturbed_lattice_trials();
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"fixed-point identity", fixed_point_identity},
      {"stiffness correctness", stiffness_correctness},
      {"solver contract", solver_contract},
      {"clamp invariant", clamp_invariant},
      {"termination and monotonicity", [&] { return termination_monotonicity(lattice); }},
      {"boundary integrity", [&] { return boundary_integrity(lattice); }},
      {"assignment optimality", assignment_optimality},
      {"relative-neighbour pruning", rng_correctness},
      {"force-threshold ablation", force_threshold_ablation},
      {"strategy sweep", strategy_sweep},
      {"efficiency scaling", efficiency_scaling},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
