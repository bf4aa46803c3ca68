#pragma once

#include "envmpc/ocp/mpc.hpp"
#include "envmpc/planner/plan.hpp"
#include "envmpc/planner/road_io.hpp"
#include "envmpc/sim/scenario.hpp"
#include "envmpc/vehicle/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace envmpc {

/// One controller tick. Plant statistics cover the 1 ms samples in
/// (t, t + period]; tick 0 also covers the initial state.
struct TickRecord {
  double t = 0.0;
  VehicleState state;  ///< measured at t
  ControlInput control;
  double applied_at = 0.0;  ///< sim time the control took effect
  double station = 0.0;
  double long_accel = 0.0;  ///< [m/s^2] body frame, at t
  double lat_accel = 0.0;

  bool solved = false;  ///< a solve was attempted
  SolveStatus status = SolveStatus::infeasible;
  int iterations = 0;
  double kkt = 0.0;
  double objective = 0.0;
  CostBreakdown breakdown;
  bool warm = false;
  bool fallback = false;
  bool safe_stop = false;
  bool injected = false;  ///< timeout forced by fault injection
  double solve_ms = 0.0;  ///< wall clock, excluded from the record JSON

  int samples = 0;
  double max_membership = -std::numeric_limits<double>::infinity();
  int violations = 0;
  double max_total_accel = 0.0;
  double min_speed = std::numeric_limits<double>::infinity();
  double max_speed = 0.0;
  int obstacle_hits = 0;
};

struct RunMetrics {
  bool completed = false;
  std::optional<double> finish_time;  ///< lap or goal time [s]
  double min_speed = 0.0;
  double max_speed = 0.0;
  double max_total_accel = 0.0;
  double max_membership = 0.0;
  long violations = 0;
  long obstacle_hits = 0;
  long samples = 0;
  int ticks = 0;
  int solves = 0;
  int fallbacks = 0;
  int timeouts = 0;
  int injected = 0;
  bool safe_stop = false;
  double mean_iterations = 0.0;
};

struct RunRecord {
  std::string scenario;
  std::string status;  ///< completed | time_limit | safe_stop | error
  std::string message;
  Termination termination = Termination::time;
  double period = 0.1;
  double mu_f = 0.0;
  double mu_r = 0.0;
  double g = 9.81;
  std::optional<double> finish_time;
  std::vector<TickRecord> ticks;
  VehicleState final_state;
  double final_time = 0.0;
  RoadBoundary road;
  std::vector<EnvelopeBlock> blocks;
  double epsilon0 = 0.0;
  std::optional<Obstacle> obstacle;
  RunMetrics metrics;
};

inline RunMetrics compute_metrics(const RunRecord& rec) {
  RunMetrics m;
  m.completed = rec.status == "completed";
  m.finish_time = rec.finish_time;
  m.ticks = static_cast<int>(rec.ticks.size());
  if (rec.ticks.empty()) return m;
  m.min_speed = std::numeric_limits<double>::infinity();
  m.max_membership = -std::numeric_limits<double>::infinity();
  long iterations = 0;
  for (const TickRecord& t : rec.ticks) {
    m.min_speed = std::min(m.min_speed, t.min_speed);
    m.max_speed = std::max(m.max_speed, t.max_speed);
    m.max_total_accel = std::max(m.max_total_accel, t.max_total_accel);
    m.max_membership = std::max(m.max_membership, t.max_membership);
    m.violations += t.violations;
    m.obstacle_hits += t.obstacle_hits;
    m.samples += t.samples;
    if (t.solved) {
      ++m.solves;
      iterations += t.iterations;
    }
    m.fallbacks += t.fallback ? 1 : 0;
    m.timeouts += t.solved && t.status == SolveStatus::timeout ? 1 : 0;
    m.injected += t.injected ? 1 : 0;
    m.safe_stop = m.safe_stop || t.safe_stop;
  }
  m.mean_iterations = m.solves > 0 ? static_cast<double>(iterations) / m.solves : 0.0;
  return m;
}

struct RunOptions {
  bool realtime_strict = false;  ///< enforce the wall-clock budget and delay each new control by its solve time
  std::optional<std::uint64_t> seed;  ///< overrides the scenario seed
  double plant_dt = 1e-3;
  double stop_speed = 1.0;  ///< [m/s] a latched safe stop ends the run below this speed
  MpcOptions mpc;
  std::function<void(const TickRecord&)> on_tick;
};

inline RoadBoundary scenario_road(const Scenario& sc) {
  if (sc.generator) {
    const RoadGeneratorSpec& g = *sc.generator;
    return generate_road(g.seed, g.stations, {g.width_min, g.width_max}, g.curvature_scale);
  }
  return load_track(sc.track, sc.closed, sc.track_spacing);
}

/// The envelope the scenario drives in: planned, built around the CIS obstacle, or loaded.
inline SpatialEnvelope scenario_envelope(const Scenario& sc, const RoadBoundary& road) {
  if (sc.envelope == "plan") {
    PlannerOptions po;
    if (sc.planner_max_length) po.optimizer.max_length = *sc.planner_max_length;
    return plan_envelope(road, po).envelope;
  }
  if (sc.envelope == "cis") return SpatialEnvelope::finalize(cis_blocks(road, cis_obstacle(sc.init.station, *sc.cis), *sc.cis));
  return load_envelope(sc.envelope);
}

inline VehicleState initial_state(const geometry::ArcPath& path, const InitialPose& p) {
  const double th = path.heading_at(p.station);
  const geometry::Point c = path.point_at(p.station) + p.lateral * geometry::Point(-std::sin(th), std::cos(th));
  VehicleState s;
  s.x = c.x();
  s.y = c.y();
  s.psi = th + p.heading;
  s.ux = p.ux;
  return s;
}

inline RunRecord run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
  RunRecord rec;
  rec.scenario = sc.name;
  rec.termination = sc.termination;
  rec.period = sc.period;
  rec.mu_f = sc.params.mu_f;
  rec.mu_r = sc.params.mu_r;
  rec.g = sc.params.g;
  rec.road = scenario_road(sc);
  const geometry::ArcPath path = rec.road.centerline_path();
  const double track_len = rec.road.length();

  const SpatialEnvelope env = scenario_envelope(sc, rec.road);
  std::optional<SpatialEnvelope> before_obstacle;
  if (sc.cis && sc.envelope == "cis" && sc.cis->appear_time > 0.0) {
    before_obstacle = SpatialEnvelope::finalize(open_lane_blocks(rec.road, *sc.cis));
  }
  rec.blocks = env.blocks();
  rec.epsilon0 = env.epsilon0();
  if (sc.cis) rec.obstacle = cis_obstacle(sc.init.station, *sc.cis);

  OcpProblem base;
  base.params = sc.params;
  base.bounds = sc.bounds;
  base.weights = sc.weights;
  base.envelope_margin = sc.envelope_margin;

  MpcOptions mo = opt.mpc;
  mo.period = sc.period;
  if (sc.max_iter) mo.solve.ipm.max_iter = *sc.max_iter;
  if (sc.cold_max_iter) mo.cold_max_iter = *sc.cold_max_iter;
  if (opt.realtime_strict) mo.solve.enforce_budget = true;
  MpcOptions injected_mo = mo;
  injected_mo.solve.enforce_budget = true;
  injected_mo.solve.budget_ms = 0.0;

  std::mt19937_64 rng(opt.seed.value_or(sc.seed));
  const int per_tick = static_cast<int>(std::lround(sc.period / opt.plant_dt));
  const double dt = sc.period / per_tick;

  VehicleState x = initial_state(path, sc.init);
  MpcState mpc;
  double station = path.normalize(sc.init.station);
  double progress = 0.0;
  ControlInput previous;
  bool done = false;
  bool stopped = false;

  auto sample = [&](TickRecord& tr, const VehicleState& s, double time) {
    const SpatialEnvelope& active = before_obstacle && time < sc.cis->appear_time ? *before_obstacle : env;
    const double g = active.exact_membership(s.x, s.y);
    const double s_new = path.project({s.x, s.y}, station, 20.0, 40.0);
    double ds = s_new - station;
    if (rec.road.closed) {
      if (ds > 0.5 * track_len) ds -= track_len;
      if (ds < -0.5 * track_len) ds += track_len;
    }
    progress += ds;
    station = s_new;
    const Eigen::Vector2d a = body_acceleration(s, sc.params);
    const double speed = std::hypot(s.ux, s.v);
    ++tr.samples;
    tr.max_membership = std::max(tr.max_membership, g);
    tr.violations += g > 0.0 ? 1 : 0;
    tr.max_total_accel = std::max(tr.max_total_accel, a.norm());
    tr.min_speed = std::min(tr.min_speed, speed);
    tr.max_speed = std::max(tr.max_speed, speed);
    if (rec.obstacle && rec.obstacle->contains(station, path.lateral_offset({s.x, s.y}, station))) ++tr.obstacle_hits;
    if (sc.termination == Termination::lap && progress >= track_len) {
      rec.finish_time = time;
      done = true;
    }
    if (sc.termination == Termination::goal_x && s.x > sc.goal_x) {
      rec.finish_time = time;
      done = true;
    }
  };

  try {
    for (int k = 0;; ++k) {
      const double t = k * sc.period;
      if (t >= sc.max_time - 1e-9) {
        rec.status = sc.termination == Termination::time ? "completed" : "time_limit";
        break;
      }
      TickRecord tr;
      tr.t = t;
      tr.state = x;
      tr.station = station;
      const Eigen::Vector2d a0 = body_acceleration(x, sc.params);
      tr.long_accel = a0.x();
      tr.lat_accel = a0.y();
      if (k == 0) sample(tr, x, 0.0);

      const SpatialEnvelope& active = before_obstacle && t < sc.cis->appear_time ? *before_obstacle : env;
      OcpProblem p = base;
      p.x0 = x;
      p.envelope = active.local_view({x.x, x.y}, sc.envelope_radius);
      if (sc.weights.specific == SpecificCost::racing && !mpc.safe_stop) {
        p.cost_to_go = fit_cost_to_go(path, rec.road.half_widths, station, sc.cost_to_go_ux_max, p.grid.horizon());
      }
      const double draw = detail::uniform(rng, 0.0, 1.0);
      tr.injected = draw < sc.timeout_rate && !mpc.safe_stop;
      const MpcStepResult r = mpc_step(mpc, p, t, tr.injected ? injected_mo : mo);
      tr.control = r.control;
      tr.fallback = r.fallback;
      tr.safe_stop = r.safe_stop;
      if (r.solution) {
        tr.solved = true;
        tr.status = r.solution->status;
        tr.iterations = r.solution->iterations;
        tr.kkt = r.solution->kkt_residual;
        tr.objective = r.solution->objective;
        tr.breakdown = r.solution->breakdown;
        tr.warm = r.solution->warm_started;
        tr.solve_ms = r.solution->solve_time_ms;
      }
      rec.ticks.push_back(tr);
      if (k == 0) previous = r.control;

      int latency = 0;
      if (opt.realtime_strict && r.solution && !tr.injected) {
        latency = std::clamp(static_cast<int>(std::ceil(r.solution->solve_time_ms * 1e-3 / dt)), 0, per_tick);
      }
      rec.ticks.back().applied_at = t + latency * dt;
      for (int j = 0; j < per_tick && !done; ++j) {
        x = step_plant(x, j < latency ? previous : r.control, dt, sc.params);
        sample(rec.ticks.back(), x, t + (j + 1) * dt);
        rec.final_time = t + (j + 1) * dt;
        if (mpc.safe_stop && x.ux < opt.stop_speed) {
          stopped = true;
          break;
        }
      }
      previous = r.control;
      if (opt.on_tick) opt.on_tick(rec.ticks.back());
      if (done) {
        rec.status = "completed";
        break;
      }
      if (stopped) {
        rec.status = "safe_stop";
        rec.message = "solver failed repeatedly; vehicle brought to a stop";
        break;
      }
    }
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.message = e.what();
  }
  if (mpc.safe_stop && !stopped && rec.status != "error") {
    rec.status = "safe_stop";
    rec.message = "solver failed repeatedly; safe stop latched";
  }
  rec.final_state = x;
  rec.metrics = compute_metrics(rec);
  return rec;
}

}  // namespace envmpc
