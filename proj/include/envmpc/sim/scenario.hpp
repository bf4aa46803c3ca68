#pragma once

#include "envmpc/cost/weights.hpp"
#include "envmpc/envelope/bounds.hpp"
#include "envmpc/io/keyvalue.hpp"
#include "envmpc/sim/cis.hpp"
#include "envmpc/vehicle/params.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace envmpc {

enum class Termination { lap, goal_x, time };

inline Termination parse_termination(const std::string& s) {
  if (s == "lap") return Termination::lap;
  if (s == "goal_x") return Termination::goal_x;
  if (s == "time") return Termination::time;
  throw ConfigError("unknown termination `" + s + "` (expected lap | goal_x | time)");
}

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::lap: return "lap";
    case Termination::goal_x: return "goal_x";
    case Termination::time: return "time";
  }
  return "time";
}

struct RoadGeneratorSpec {
  std::uint64_t seed = 1;
  int stations = 120;
  double width_min = 3.0;
  double width_max = 6.0;
  double curvature_scale = 0.08;
};

/// Initial state relative to the track centerline.
struct InitialPose {
  double station = 0.0;  ///< [m]
  double lateral = 0.0;  ///< [m] left positive
  double heading = 0.0;  ///< [rad] relative to the centerline heading
  double ux = 10.0;      ///< [m/s]
};

struct Scenario {
  std::string name = "scenario";
  std::string track;  ///< boundary CSV path, or empty when generated
  std::optional<RoadGeneratorSpec> generator;
  bool closed = false;
  double track_spacing = 2.0;
  std::string envelope = "plan";  ///< plan | cis | path to a block file
  std::optional<double> planner_max_length;  ///< [m] cap on planned block half lengths

  VehicleParams params;
  LinearBounds bounds;
  CostWeights weights;
  double envelope_margin = 0.0;
  double cost_to_go_ux_max = 30.0;  ///< [m/s] sets the fitted window length

  InitialPose init;
  Termination termination = Termination::time;
  double goal_x = 100.0;
  double max_time = 60.0;

  double period = 0.1;
  double envelope_radius = 300.0;  ///< [m] blocks farther than this are left out of the OCP
  double timeout_rate = 0.0;       ///< fraction of ticks whose solve is forced to time out
  std::uint64_t seed = 1;
  std::optional<CisOptions> cis;
  std::optional<int> max_iter;       ///< warm-started solve iteration cap
  std::optional<int> cold_max_iter;

  void validate() const {
    if (track.empty() && !generator) throw ConfigError("scenario " + name + ": no track given");
    if (!track.empty() && !std::filesystem::exists(track)) {
      throw ConfigError("scenario " + name + ": track file not found: " + track);
    }
    if (envelope != "plan" && envelope != "cis" && !std::filesystem::exists(envelope)) {
      throw ConfigError("scenario " + name + ": envelope file not found: " + envelope);
    }
    if (envelope == "cis" && !cis) throw ConfigError("scenario " + name + ": cis envelope needs cis.* settings");
    if (termination == Termination::lap && !closed) {
      throw ConfigError("scenario " + name + ": lap termination needs a closed track");
    }
    if (!(max_time > 0.0) || !(period > 0.0)) throw ConfigError("scenario " + name + ": times must be positive");
    if (!(timeout_rate >= 0.0 && timeout_rate <= 1.0)) {
      throw ConfigError("scenario " + name + ": sim.timeout_rate must lie in [0, 1]");
    }
    if ((max_iter && *max_iter < 1) || (cold_max_iter && *cold_max_iter < 1)) {
      throw ConfigError("scenario " + name + ": solver iteration caps must be positive");
    }
    if (planner_max_length && !(*planner_max_length > 0.0)) {
      throw ConfigError("scenario " + name + ": planner.max_length must be positive");
    }
    if (!(init.ux > 0.5)) throw ConfigError("scenario " + name + ": init.ux must exceed 0.5 m/s");
    if (weights.specific == SpecificCost::racing && !(cost_to_go_ux_max > 0.0)) {
      throw ConfigError("scenario " + name + ": cost_to_go.ux_max must be positive");
    }
    if (cis) {
      try {
        cis->validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("scenario " + name + ": " + e.what());
      }
    }
  }

  /// Relative paths resolve against `base_dir`. Vehicle parameters use the
  /// `vehicle.` prefix, bounds `bound.`, weights `cost.`.
  static Scenario from_config(const KeyValueConfig& cfg, const std::filesystem::path& base_dir = ".") {
    Scenario s;
    auto resolve = [&](const std::string& p) { return (base_dir / p).lexically_normal().string(); };
    s.name = cfg.str_or("name", s.name);
    const std::string track = cfg.str_or("track", "");
    if (track == "generate") {
      RoadGeneratorSpec g;
      g.seed = static_cast<std::uint64_t>(cfg.number_or("generate.seed", 1.0));
      g.stations = static_cast<int>(cfg.number_or("generate.stations", g.stations));
      g.width_min = cfg.number_or("generate.width_min", g.width_min);
      g.width_max = cfg.number_or("generate.width_max", g.width_max);
      g.curvature_scale = cfg.number_or("generate.curvature_scale", g.curvature_scale);
      s.generator = g;
    } else if (!track.empty()) {
      s.track = resolve(track);
    }
    s.closed = cfg.flag_or("track.closed", s.closed);
    s.track_spacing = cfg.number_or("track.spacing", s.track_spacing);
    s.envelope = cfg.str_or("envelope", s.envelope);
    if (s.envelope != "plan" && s.envelope != "cis") s.envelope = resolve(s.envelope);
    if (cfg.has("planner.max_length")) s.planner_max_length = cfg.number("planner.max_length");

    KeyValueConfig vehicle;
    for (const auto& [k, v] : cfg.entries()) {
      if (k.rfind("vehicle.", 0) == 0) vehicle.set(k.substr(8), v);
    }
    s.params = VehicleParams::from_config(vehicle);
    s.bounds = LinearBounds::for_vehicle(s.params);
    s.bounds.apply_config(cfg);
    s.weights = CostWeights::from_config(cfg);
    s.envelope_margin = cfg.number_or("ocp.envelope_margin", s.envelope_margin);
    s.cost_to_go_ux_max = cfg.number_or("cost_to_go.ux_max", s.cost_to_go_ux_max);

    s.init.station = cfg.number_or("init.station", s.init.station);
    s.init.lateral = cfg.number_or("init.lateral", s.init.lateral);
    s.init.heading = cfg.number_or("init.heading", s.init.heading);
    s.init.ux = cfg.number_or("init.ux", s.init.ux);
    s.termination = parse_termination(cfg.str_or("termination", to_string(s.termination)));
    s.goal_x = cfg.number_or("termination.goal_x", s.weights.goal_x);
    s.max_time = cfg.number_or("sim.max_time", s.max_time);
    s.period = cfg.number_or("sim.period", s.period);
    s.envelope_radius = cfg.number_or("sim.envelope_radius", s.envelope_radius);
    s.timeout_rate = cfg.number_or("sim.timeout_rate", s.timeout_rate);
    s.seed = static_cast<std::uint64_t>(cfg.number_or("sim.seed", 1.0));
    if (cfg.has("solver.max_iter")) s.max_iter = static_cast<int>(cfg.number("solver.max_iter"));
    if (cfg.has("solver.cold_max_iter")) s.cold_max_iter = static_cast<int>(cfg.number("solver.cold_max_iter"));

    bool any_cis = false;
    for (const auto& kv : cfg.entries()) any_cis |= kv.first.rfind("cis.", 0) == 0;
    if (any_cis || s.envelope == "cis") {
      CisOptions c;
      c.lane_width = cfg.number_or("cis.lane_width", c.lane_width);
      c.obstacle_ahead = cfg.number_or("cis.obstacle_ahead", c.obstacle_ahead);
      c.obstacle_length = cfg.number_or("cis.obstacle_length", c.obstacle_length);
      c.block_half_length = cfg.number_or("cis.block_half_length", c.block_half_length);
      c.block_spacing = cfg.number_or("cis.block_spacing", c.block_spacing);
      c.edge_inset = cfg.number_or("cis.edge_inset", c.edge_inset);
      c.divider_gap = cfg.number_or("cis.divider_gap", c.divider_gap);
      c.lane_overlap = cfg.number_or("cis.lane_overlap", c.lane_overlap);
      c.adjacent_lead = cfg.number_or("cis.adjacent_lead", c.adjacent_lead);
      c.stop_margin = cfg.number_or("cis.stop_margin", c.stop_margin);
      c.appear_time = cfg.number_or("cis.appear_time", c.appear_time);
      s.cis = c;
    }
    s.validate();
    return s;
  }

  static Scenario load(const std::string& path) {
    return from_config(KeyValueConfig::load(path), std::filesystem::path(path).parent_path());
  }
};

}  // namespace envmpc
