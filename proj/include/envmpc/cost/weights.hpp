#pragma once

#include "envmpc/io/keyvalue.hpp"

#include <string>

namespace envmpc {

/// Which scenario-specific term J_specific is active.
enum class SpecificCost {
  none,
  racing,
  collision_avoidance,
  offroad,
};

inline SpecificCost parse_specific_cost(const std::string& name) {
  if (name == "none") return SpecificCost::none;
  if (name == "racing") return SpecificCost::racing;
  if (name == "collision_avoidance") return SpecificCost::collision_avoidance;
  if (name == "offroad") return SpecificCost::offroad;
  throw ConfigError("unknown specific cost `" + name + "` (expected racing | collision_avoidance | offroad | none)");
}

inline const char* to_string(SpecificCost c) {
  switch (c) {
    case SpecificCost::racing: return "racing";
    case SpecificCost::collision_avoidance: return "collision_avoidance";
    case SpecificCost::offroad: return "offroad";
    case SpecificCost::none: break;
  }
  return "none";
}

struct CostWeights {
  // state cost
  double w_delta_f = 1.0;
  double w_ax = 0.01;
  double w_v = 0.1;
  double w_kappa = 1.0;
  // control cost
  double w_delta_f_rate = 1.0;
  double w_jx = 1e-3;
  // envelope cost
  double w_envelope = 10.0;
  double theta_hp = 20.0;
  double g_sm = 0.0;
  // scenario-specific
  SpecificCost specific = SpecificCost::none;
  double w_go = 1.0;       ///< multiplier on the fitted cost-to-go polynomial
  double w_speed = 1.0;
  double u_des = 20.0;     ///< [m/s]
  double goal_x = 100.0;   ///< [m]
  double w_terminal = 100.0;

  void validate() const {
    const double all[] = {w_delta_f, w_ax, w_v, w_kappa, w_delta_f_rate, w_jx, w_envelope, w_go, w_speed, w_terminal};
    for (double w : all) {
      if (!(w >= 0.0)) {
        throw ConfigError("cost weights must be non-negative");
      }
    }
    if (!(theta_hp > 0.0)) {
      throw ConfigError("cost weight theta_hp must be positive");
    }
  }

  static CostWeights from_config(const KeyValueConfig& cfg) {
    CostWeights w;
    w.w_delta_f = cfg.number_or("cost.w_delta_f", w.w_delta_f);
    w.w_ax = cfg.number_or("cost.w_ax", w.w_ax);
    w.w_v = cfg.number_or("cost.w_v", w.w_v);
    w.w_kappa = cfg.number_or("cost.w_kappa", w.w_kappa);
    w.w_delta_f_rate = cfg.number_or("cost.w_delta_f_rate", w.w_delta_f_rate);
    w.w_jx = cfg.number_or("cost.w_jx", w.w_jx);
    w.w_envelope = cfg.number_or("cost.w_envelope", w.w_envelope);
    w.theta_hp = cfg.number_or("cost.theta_hp", w.theta_hp);
    w.g_sm = cfg.number_or("cost.g_sm", w.g_sm);
    w.specific = parse_specific_cost(cfg.str_or("cost.specific", to_string(w.specific)));
    w.w_go = cfg.number_or("cost.w_go", w.w_go);
    w.w_speed = cfg.number_or("cost.w_speed", w.w_speed);
    w.u_des = cfg.number_or("cost.u_des", w.u_des);
    w.goal_x = cfg.number_or("cost.goal_x", w.goal_x);
    w.w_terminal = cfg.number_or("cost.w_terminal", w.w_terminal);
    w.validate();
    return w;
  }
};

/// J = state + control + envelope + specific.
struct CostBreakdown {
  double state = 0.0;
  double control = 0.0;
  double envelope = 0.0;
  double specific = 0.0;

  double total() const { return state + control + envelope + specific; }

  CostBreakdown& operator+=(const CostBreakdown& o) {
    state += o.state;
    control += o.control;
    envelope += o.envelope;
    specific += o.specific;
    return *this;
  }
};

}  // namespace envmpc
