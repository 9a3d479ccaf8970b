#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridmap/gridfit.hpp"
#include "gridmap/network.hpp"
#include "gridmap/quality.hpp"
#include "gridmap/snake.hpp"

namespace gridmap {

struct OutputToggles {
  bool json = true;
  bool csv = true;
  bool svg = true;
  bool trace = true;
};

struct PipelineConfig {
  double alpha = 100000.0;
  double beta = 100000.0;
  double t_f_factor = 0.5;      // T_f = t_f_factor * S; infinity disables the ceiling
  double epsilon_factor = 0.01; // epsilon = epsilon_factor * S
  int t_s = 30;
  double lambda = 1e-8;
  StiffnessSchedule schedule = StiffnessSchedule::force_matched;
  double relaxation = 0.25;
  bool rebuild_network = false;
  double simplify_tol = 0.0;    // Douglas-Peucker tolerance on the outer boundary
  std::vector<Point> shifts = candidate_origins();
  std::vector<double> md = {0.0, 0.02, 0.04};
  std::vector<std::uint64_t> seeds = {42};
  TopsisWeights topsis_weights = kEqualWeights;
  QualityOptions quality;
  OutputToggles outputs;

  /// Throws ValidationError (stage "config") on out-of-range values.
  void validate() const;
  SnakeConfig snake_config(double s) const;
};

/// Parses a JSON object of overrides; unknown keys are rejected.
PipelineConfig parse_pipeline_config(const std::string& text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Worker count: GRIDMAP_THREADS when set (>= 1), else hardware concurrency.
std::size_t worker_count();

struct SnakeRun {
  double md = 0.0;
  std::uint64_t seed = 0;
  std::vector<Point> start_centroids;  // after noise
  SnakeResult result;
};

struct Candidate {
  Point shift;
  double md = 0.0;
  std::uint64_t seed = 0;
  std::size_t run = 0;  // index into PipelineResult::runs
  GridLayout layout;
  QualityReport report;
  double closeness = 0.0;
};

struct PipelineResult {
  RegionSet regions;      // with the simplified boundary
  double s = 0.0;         // grid size
  LinearNetwork network;  // built on the input map
  std::vector<SnakeRun> runs;
  std::vector<Candidate> candidates;  // feasible ones only, in sweep order
  std::size_t skipped = 0;            // infeasible (run, shift) pairs
  std::size_t chosen = 0;             // index into candidates

  const Candidate& best() const { return candidates.at(chosen); }
  std::vector<std::string> region_ids() const;
};

/// Steps 1-4 for every (md, seed) snake run and every shift, then TOPSIS.
/// Throws InfeasibleGridError when no candidate yields M cells.
PipelineResult run_pipeline(RegionSet rs, const PipelineConfig& cfg);

/// Applies simplify_tol to the boundary.
RegionSet prepare_regions(RegionSet rs, double simplify_tol);

void write_metrics_csv(const PipelineResult& result, std::ostream& out);
void write_run_trace_csv(const PipelineResult& result, std::ostream& out);

/// Writes layout.json, metrics.csv, trace.csv and the SVG renders into `dir`,
/// each through a temporary file and a rename. `debug` adds network GeoJSON dumps.
void write_artifacts(const PipelineResult& result, const PipelineConfig& cfg,
                     const std::filesystem::path& dir, bool debug);

/// Writes `content` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct BenchRow {
  double simplify_tol = 0.0;
  std::size_t n_region = 0;
  std::size_t n_boundary = 0;
  double wall_time = 0.0;  // seconds
  std::size_t n_sum() const { return n_region + n_boundary; }
  double n_ratio() const { return static_cast<double>(n_region) / static_cast<double>(n_boundary); }
};

/// One full pipeline run per tolerance.
std::vector<BenchRow> run_bench(const RegionSet& rs, const std::vector<double>& tols,
                                const PipelineConfig& cfg);
/// simplify_tol,N_region,N_boundary,N_sum,N_ratio,wall_time
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace gridmap
