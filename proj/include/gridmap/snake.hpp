#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gridmap/geometry.hpp"
#include "gridmap/linalg.hpp"
#include "gridmap/network.hpp"

namespace gridmap {

/// How the snake stiffness evolves between iterations.
enum class StiffnessSchedule {
  /// alpha and beta are rescaled every iteration so that the largest nodal
  /// displacement equals relaxation times the largest (clamped) force.
  force_matched,
  /// alpha and beta stay fixed, optionally times SnakeConfig::stiffness_multiplier.
  constant,
};

struct SnakeConfig {
  double alpha = 100000.0;  // elasticity
  double beta = 100000.0;   // bending stiffness
  double t_f = 0.5;         // force ceiling, input units; +inf disables clamping
  double epsilon = 0.01;    // convergence threshold on max displacement, input units
  int t_s = 30;             // iteration budget
  double lambda = 1e-8;     // Tikhonov factor relative to max(diag K)
  StiffnessSchedule schedule = StiffnessSchedule::force_matched;
  /// Under-relaxation of the force-matched step. Full steps (1.0) make neighbouring
  /// centroids overshoot each other and oscillate while the force ceiling is active.
  double relaxation = 0.25;
  /// Per-iteration multiplier on alpha and beta (constant schedule only).
  std::function<double(int step, double f_max)> stiffness_multiplier;
  /// Rebuild the triangulation after every accepted step instead of only moving nodes.
  bool rebuild_network = false;

  /// Defaults with t_f = 0.5 s and epsilon = 0.01 s for grid size s.
  static SnakeConfig for_grid_size(double s);
  /// Throws ValidationError on out-of-range fields.
  void validate() const;
};

/// Grid cell size sqrt(total_area / m).
double grid_size(double total_area, std::size_t m);

/// Per-centroid target: mean over centroid neighbours j of rv_j + s * unit(rv_i - rv_j).
/// Centroids without centroid neighbours keep their position.
std::vector<Point> desired_positions(const LinearNetwork& net, double s);

struct ForceField {
  std::vector<Point> force;  // per node; boundary entries are zero
  double f_max = 0.0;        // largest magnitude after clamping
  double raw_max = 0.0;      // largest magnitude before clamping
  std::size_t argmax = 0;
  bool clamped = false;
};

/// f_i = target_i - rv_i on centroids, scaled uniformly by t_f / f_max when the
/// largest force exceeds t_f.
ForceField compute_forces(const LinearNetwork& net, std::span<const Point> targets, double t_f);

using Matrix4 = std::array<std::array<double, 4>, 4>;

/// Cubic-Hermite element matrix of the energy integral of alpha d'^2 + beta d''^2
/// over a segment of length h, DOF order (d0, d0', d1, d1').
Matrix4 element_stiffness(double h, double alpha, double beta);

/// Consistent load vector for end forces f0, f1.
std::array<double, 4> element_load(double h, double f0, double f1);

/// One value DOF and one derivative DOF per node, numbered in reverse Cuthill-McKee
/// order of the network.
struct DofMap {
  std::vector<std::size_t> value;  // value DOF of node i; derivative DOF is value[i] + 1
  std::size_t dof_count() const { return 2 * value.size(); }
  std::size_t derivative(std::size_t node) const { return value[node] + 1; }
};

struct SnakeSystem {
  DofMap dofs;
  SymmetricMatrix k;  // shared by both axes
  std::vector<double> fx;
  std::vector<double> fy;
};

SnakeSystem assemble(const LinearNetwork& net, const ForceField& forces, const SnakeConfig& cfg);

/// Removes the rigid-translation component (constant on value DOFs) from both load
/// vectors so the load lies in the range of K.
void remove_rigid_translation(SnakeSystem& system);

struct SolveResult {
  std::vector<Point> displacement;  // value-DOF components per node
  std::vector<double> dx;           // full DOF vectors
  std::vector<double> dy;
  double shift = 0.0;               // lambda * max(diag K)
};

/// Solves (K + shift I) d = f per axis. Throws NumericalError on non-finite output.
SolveResult solve(const SnakeSystem& system, double lambda);

enum class StopReason { none, converged, diverging, budget };
std::string_view stop_reason_name(StopReason r);

struct TraceRecord {
  int step = 0;
  double f_max = 0.0;
  double max_displacement = 0.0;
  bool applied = true;
};

struct IterationState {
  int step = 0;  // accepted iterations (IS)
  double max_disp_prev = 0.0;
  double max_disp_curr = 0.0;
  std::vector<TraceRecord> trace;       // accepted steps only; size() == step
  std::optional<TraceRecord> rejected;  // the discarded step when diverging
  StopReason stop_reason = StopReason::none;
};

struct SnakeResult {
  LinearNetwork network;
  IterationState state;
};

/// Relative growth of the max displacement tolerated before the loop counts it as
/// diverging (rounding slack when the force ceiling is active).
inline constexpr double kGrowthTolerance = 1e-9;

SnakeResult run_snake(const LinearNetwork& net, const RegionSet& rs, const SnakeConfig& cfg);

/// CSV: step,f_max,max_displacement,applied,stop_reason
void write_trace_csv(const IterationState& state, std::ostream& out);

}  // namespace gridmap
