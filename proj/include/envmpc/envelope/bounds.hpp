#pragma once

// Linear state, control, friction and power-limit bounds of the OCP.

#include "envmpc/io/keyvalue.hpp"
#include "envmpc/vehicle/params.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <utility>

namespace envmpc {

struct AccelBounds {
  double ax_min;
  double ax_max;
};

/// Closed-form reduction of the per-axle friction limit |Fx| <= mu Fz to
/// bounds on ax, for a rear-drive vehicle braking with front share b_r.
inline AccelBounds friction_ax_bounds(const VehicleParams& p) {
  const double L = p.wheelbase();
  const double kz = p.Kz();
  const double mg = p.M * p.g;
  const double drive_den = p.M - p.mu_r * kz;
  const double front_brake_den = p.M * p.b_r - p.mu_f * kz;
  const double rear_brake_den = p.M * (1.0 - p.b_r) + p.mu_r * kz;
  if (!(drive_den > 0.0)) {
    throw ConfigError("friction bounds degenerate: M - mu_r Kz <= 0 (wheelie-limited drive)");
  }
  if (!(front_brake_den > 0.0)) {
    throw ConfigError("friction bounds degenerate: M b_r - mu_f Kz <= 0 (front brake share too small)");
  }
  // Front normal load stays non-negative up to ax = Lr M g / (L Kz).
  const double unload_limit = kz > 0.0 ? p.Lr * mg / (L * kz) : std::numeric_limits<double>::infinity();
  const double rear_drive = p.mu_r * mg * (p.Lf / L) / drive_den;
  const double rear_brake = -p.mu_r * mg * (p.Lf / L) / rear_brake_den;
  const double front_brake = -p.mu_f * mg * (p.Lr / L) / front_brake_den;
  return {std::max(rear_brake, front_brake), std::min(unload_limit, rear_drive)};
}

/// ax + p_a (ux - p_b); feasible iff <= 0.
inline double power_limit_residual(double ux, double ax, double p_a, double p_b) { return ax + p_a * (ux - p_b); }

/// Box bounds on states and controls plus the power-limit line.
struct LinearBounds {
  double v_min = -5.0, v_max = 5.0;
  double r_min = -1.5, r_max = 1.5;
  double delta_min = -0.5, delta_max = 0.5;
  double ux_min = 1.0, ux_max = 70.0;
  double delta_rate_min = -0.8, delta_rate_max = 0.8;
  double jx_min = -60.0, jx_max = 60.0;
  double ax_min = -8.0, ax_max = 5.0;
  double p_a = 0.08, p_b = 60.0;

  /// Bounds with ax limits taken from the friction reduction and the power
  /// line from the vehicle parameters.
  static LinearBounds for_vehicle(const VehicleParams& p) {
    LinearBounds b;
    const AccelBounds a = friction_ax_bounds(p);
    b.ax_min = a.ax_min;
    b.ax_max = a.ax_max;
    b.p_a = p.p_a;
    b.p_b = p.p_b;
    return b;
  }

  void validate() const {
    auto pair = [](double lo, double hi, const char* name) {
      if (!(lo < hi)) {
        throw ConfigError(std::string("bounds: ") + name + " lower bound must be below upper bound");
      }
    };
    pair(v_min, v_max, "v");
    pair(r_min, r_max, "r");
    pair(delta_min, delta_max, "delta_f");
    pair(ux_min, ux_max, "ux");
    pair(delta_rate_min, delta_rate_max, "delta_f_rate");
    pair(jx_min, jx_max, "jx");
    pair(ax_min, ax_max, "ax");
  }

  /// Overrides from config keys such as `bound.v_max`; ax bounds may only be
  /// tightened relative to the friction limits.
  void apply_config(const KeyValueConfig& cfg) {
    v_min = cfg.number_or("bound.v_min", v_min);
    v_max = cfg.number_or("bound.v_max", v_max);
    r_min = cfg.number_or("bound.r_min", r_min);
    r_max = cfg.number_or("bound.r_max", r_max);
    delta_min = cfg.number_or("bound.delta_min", delta_min);
    delta_max = cfg.number_or("bound.delta_max", delta_max);
    ux_min = cfg.number_or("bound.ux_min", ux_min);
    ux_max = cfg.number_or("bound.ux_max", ux_max);
    delta_rate_min = cfg.number_or("bound.delta_rate_min", delta_rate_min);
    delta_rate_max = cfg.number_or("bound.delta_rate_max", delta_rate_max);
    jx_min = cfg.number_or("bound.jx_min", jx_min);
    jx_max = cfg.number_or("bound.jx_max", jx_max);
    ax_min = std::max(ax_min, cfg.number_or("bound.ax_min", ax_min));
    ax_max = std::min(ax_max, cfg.number_or("bound.ax_max", ax_max));
    validate();
  }
};

}  // namespace envmpc
