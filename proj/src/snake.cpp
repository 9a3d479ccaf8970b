#include "gridmap/snake.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "gridmap/error.hpp"
#include "gridmap/log.hpp"

namespace gridmap {

SnakeConfig SnakeConfig::for_grid_size(double s) {
  SnakeConfig cfg;
  cfg.t_f = 0.5 * s;
  cfg.epsilon = 0.01 * s;
  return cfg;
}

void SnakeConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || (alpha == 0.0 && beta == 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta))
    throw ValidationError("alpha and beta must be >= 0, finite, and not both zero", "config");
  if (!(t_f > 0.0)) throw ValidationError("t_f must be positive", "config");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ValidationError("epsilon must be positive", "config");
  if (t_s < 0) throw ValidationError("t_s must be >= 0", "config");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be positive", "config");
  if (!(relaxation > 0.0) || relaxation > 1.0)
    throw ValidationError("relaxation must be in (0, 1]", "config");
}

double grid_size(double total_area, std::size_t m) {
  if (!(total_area > 0.0) || !std::isfinite(total_area))
    throw ValidationError("total area must be positive", "snake");
  if (m == 0) throw ValidationError("region count must be >= 1", "snake");
  return std::sqrt(total_area / static_cast<double>(m));
}

std::vector<Point> desired_positions(const LinearNetwork& net, double s) {
  if (!(s > 0.0)) throw ValidationError("grid size must be positive", "snake");
  const std::size_t m = net.centroid_count();
  const auto& nodes = net.nodes();
  std::vector<Point> targets(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Point rv_i = nodes[i].pos;
    Point sum{0.0, 0.0};
    std::size_t count = 0;
    for (std::size_t j : net.neighbors(i)) {
      if (j >= m) continue;
      const Point rv_j = nodes[j].pos;
      const double len = distance(rv_i, rv_j);
      if (!(len > 0.0))
        throw DegenerateGeometryError("coincident neighbouring centroids " + std::to_string(i) +
                                      " and " + std::to_string(j));
      sum += rv_j + (s / len) * (rv_i - rv_j);
      ++count;
    }
    targets[i] = count == 0 ? rv_i : (1.0 / static_cast<double>(count)) * sum;
  }
  return targets;
}

namespace {

double ulp_step(double v, int k) {
  const double dir = k > 0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
  for (int j = 0; j < std::abs(k); ++j) v = std::nextafter(v, dir);
  return v;
}

// Moves each component of f by at most a few ulps so that |f| == length exactly.
// Leaves f alone when no such neighbour exists.
void snap_to_length(Point& f, double length) {
  for (int ring = 0; ring <= 3; ++ring)
    for (int a = -ring; a <= ring; ++a)
      for (int b = -ring; b <= ring; ++b) {
        if (std::max(std::abs(a), std::abs(b)) != ring) continue;
        const Point g{ulp_step(f.x, a), ulp_step(f.y, b)};
        if (norm(g) == length) {
          f = g;
          return;
        }
      }
}

}  // namespace

ForceField compute_forces(const LinearNetwork& net, std::span<const Point> targets, double t_f) {
  const std::size_t m = net.centroid_count();
  if (targets.size() != m) throw std::invalid_argument("one target per centroid expected");
  ForceField ff;
  ff.force.assign(net.nodes().size(), Point{0.0, 0.0});
  for (std::size_t i = 0; i < m; ++i) {
    ff.force[i] = targets[i] - net.nodes()[i].pos;
    const double mag = norm(ff.force[i]);
    if (mag > ff.raw_max) {
      ff.raw_max = mag;
      ff.argmax = i;
    }
  }
  ff.f_max = ff.raw_max;
  if (ff.raw_max > t_f) {
    const double scale = t_f / ff.raw_max;
    for (std::size_t i = 0; i < m; ++i) {
      Point& f = ff.force[i];
      f = f * scale;
      // Rounding can leave |f| a few ulp above the ceiling; shave it off.
      while (norm(f) > t_f) f = f * (1.0 - std::numeric_limits<double>::epsilon());
    }
    snap_to_length(ff.force[ff.argmax], t_f);
    ff.f_max = 0.0;
    for (std::size_t i = 0; i < m; ++i) ff.f_max = std::max(ff.f_max, norm(ff.force[i]));
    ff.clamped = true;
  }
  return ff;
}

Matrix4 element_stiffness(double h, double alpha, double beta) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw ValidationError("segment length must be positive", "snake");
  const double h2 = h * h;
  const double h3 = h2 * h;
  const double k00 = (6.0 * alpha * h2 + 60.0 * beta) / (5.0 * h3);
  const double k01 = (alpha * h2 + 60.0 * beta) / (10.0 * h2);
  const double k11 = (2.0 * alpha * h2 + 60.0 * beta) / (15.0 * h);
  const double k13 = (-alpha * h2 + 60.0 * beta) / (30.0 * h);
  return {{{k00, k01, -k00, k01},
           {k01, k11, -k01, k13},
           {-k00, -k01, k00, -k01},
           {k01, k13, -k01, k11}}};
}

std::array<double, 4> element_load(double h, double f0, double f1) {
  if (!(h > 0.0)) throw ValidationError("segment length must be positive", "snake");
  return {h * f0 / 2.0, h * h * f0 / 12.0, h * f1 / 2.0, -h * h * f1 / 12.0};
}

SnakeSystem assemble(const LinearNetwork& net, const ForceField& forces, const SnakeConfig& cfg) {
  const std::size_t n = net.nodes().size();
  if (forces.force.size() != n) throw std::invalid_argument("force field does not match network");
  SnakeSystem sys;
  const auto order = rcm_order(net.adjacency());
  sys.dofs.value.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) sys.dofs.value[order[k]] = 2 * k;

  const std::size_t dofs = sys.dofs.dof_count();
  sys.k = SymmetricMatrix(dofs);
  sys.fx.assign(dofs, 0.0);
  sys.fy.assign(dofs, 0.0);
  for (const auto& e : net.edges()) {
    const Matrix4 ke = element_stiffness(e.length, cfg.alpha, cfg.beta);
    const std::array<std::size_t, 4> idx{sys.dofs.value[e.a], sys.dofs.derivative(e.a),
                                         sys.dofs.value[e.b], sys.dofs.derivative(e.b)};
    for (int r = 0; r < 4; ++r)
      for (int c = r; c < 4; ++c) sys.k.add(idx[r], idx[c], ke[r][c]);
    const Point fa = forces.force[e.a];
    const Point fb = forces.force[e.b];
    const auto lx = element_load(e.length, fa.x, fb.x);
    const auto ly = element_load(e.length, fa.y, fb.y);
    for (int r = 0; r < 4; ++r) {
      sys.fx[idx[r]] += lx[r];
      sys.fy[idx[r]] += ly[r];
    }
  }
  return sys;
}

void remove_rigid_translation(SnakeSystem& system) {
  const auto& value = system.dofs.value;
  if (value.empty()) return;
  for (auto* f : {&system.fx, &system.fy}) {
    double sum = 0.0;
    for (std::size_t v : value) sum += (*f)[v];
    const double mean = sum / static_cast<double>(value.size());
    for (std::size_t v : value) (*f)[v] -= mean;
  }
}

SolveResult solve(const SnakeSystem& system, double lambda) {
  SolveResult out;
  out.shift = lambda * system.k.max_diagonal();
  const CholeskyFactor factor(system.k, out.shift);
  out.dx = refine_solve(system.k, out.shift, factor, system.fx);
  out.dy = refine_solve(system.k, out.shift, factor, system.fy);
  const std::size_t n = system.dofs.value.size();
  out.displacement.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = system.dofs.value[i];
    out.displacement[i] = {out.dx[v], out.dy[v]};
    if (!std::isfinite(out.dx[v]) || !std::isfinite(out.dy[v]))
      throw NumericalError("non-finite displacement at node " + std::to_string(i) +
                           " (shift " + std::to_string(out.shift) + ")");
  }
  return out;
}

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::none: return "";
    case StopReason::converged: return "condition1_converged";
    case StopReason::diverging: return "condition2_diverging";
    case StopReason::budget: return "condition3_budget";
  }
  return "";
}

namespace {

// One snake step in grid-size units: lengths and forces are divided by s so the
// stiffness parameters act the same whatever the input units.
std::vector<Point> snake_step(const LinearNetwork& net, const ForceField& ff, double s,
                              const SnakeConfig& cfg, int step) {
  const std::size_t n = net.nodes().size();
  if (ff.f_max == 0.0) return std::vector<Point>(n, Point{0.0, 0.0});

  std::vector<Point> scaled = net.positions();
  for (Point& q : scaled) q = q * (1.0 / s);
  const LinearNetwork model = net.moved_to(scaled);
  ForceField model_forces = ff;
  for (Point& f : model_forces.force) f = f * (1.0 / s);

  SnakeConfig eff = cfg;
  if (cfg.schedule == StiffnessSchedule::constant && cfg.stiffness_multiplier) {
    const double mult = cfg.stiffness_multiplier(step, ff.f_max);
    if (!(mult > 0.0) || !std::isfinite(mult))
      throw ValidationError("stiffness multiplier must be positive", "snake");
    eff.alpha *= mult;
    eff.beta *= mult;
  }
  SnakeSystem sys = assemble(model, model_forces, eff);
  remove_rigid_translation(sys);
  const SolveResult sol = solve(sys, cfg.lambda);

  std::vector<Point> d(n);
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = sol.displacement[i] * s;
    dmax = std::max(dmax, norm(d[i]));
  }
  if (cfg.schedule == StiffnessSchedule::force_matched && dmax > 0.0) {
    const double scale = cfg.relaxation * ff.f_max / dmax;
    for (Point& v : d) v = v * scale;
  }
  return d;
}

double max_norm(const std::vector<Point>& d) {
  double m = 0.0;
  for (const Point& v : d) m = std::max(m, norm(v));
  return m;
}

}  // namespace

SnakeResult run_snake(const LinearNetwork& net, const RegionSet& rs, const SnakeConfig& cfg) {
  cfg.validate();
  const double s = grid_size(rs.total_area(), rs.size());
  if (net.centroid_count() != rs.size())
    throw std::invalid_argument("network and region set disagree on region count");

  SnakeResult result{net, {}};
  IterationState& st = result.state;
  LinearNetwork& cur = result.network;
  while (true) {
    if (st.step >= cfg.t_s) {
      st.stop_reason = StopReason::budget;
      break;
    }
    const auto targets = desired_positions(cur, s);
    const ForceField ff = compute_forces(cur, targets, cfg.t_f);
    const auto d = snake_step(cur, ff, s, cfg, st.step);
    const double dmax = max_norm(d);

    if (st.step > 0 && dmax > st.max_disp_curr * (1.0 + kGrowthTolerance)) {
      st.rejected = TraceRecord{st.step + 1, ff.f_max, dmax, false};
      st.stop_reason = StopReason::diverging;
      break;
    }

    std::vector<Point> moved = cur.positions();
    for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += d[i];
    if (cfg.rebuild_network) {
      try {
        std::vector<Point> cents(moved.begin(),
                                 moved.begin() + static_cast<std::ptrdiff_t>(cur.centroid_count()));
        Polygon ring{{moved.begin() + static_cast<std::ptrdiff_t>(cur.centroid_count()), moved.end()}};
        cur = build_network(cents, ring, rs.adjacency, 1e-6 * s);
      } catch (const Error& e) {
        warn(std::string("network rebuild failed, keeping topology: ") + e.what());
        cur = cur.moved_to(moved);
      }
    } else {
      cur = cur.moved_to(moved);
    }

    st.max_disp_prev = st.max_disp_curr;
    st.max_disp_curr = dmax;
    ++st.step;
    st.trace.push_back({st.step, ff.f_max, dmax, true});
    if (dmax <= cfg.epsilon) {
      st.stop_reason = StopReason::converged;
      break;
    }
  }
  return result;
}

void write_trace_csv(const IterationState& state, std::ostream& out) {
  out << "step,f_max,max_displacement,applied,stop_reason\n";
  char buf[160];
  auto row = [&](const TraceRecord& r, std::string_view reason) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%d,", r.step, r.f_max, r.max_displacement,
                  r.applied ? 1 : 0);
    out << buf << reason << '\n';
  };
  for (std::size_t i = 0; i < state.trace.size(); ++i) {
    const bool last = i + 1 == state.trace.size() && !state.rejected;
    row(state.trace[i], last ? stop_reason_name(state.stop_reason) : "");
  }
  if (state.rejected) row(*state.rejected, stop_reason_name(state.stop_reason));
  if (state.trace.empty() && !state.rejected)
    out << "0,0,0,0," << stop_reason_name(state.stop_reason) << '\n';
}

}  // namespace gridmap
