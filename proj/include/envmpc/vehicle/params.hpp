#pragma once

#include "envmpc/io/keyvalue.hpp"

#include <string>

namespace envmpc {

/// Physical and smoothing parameters of the single-track model (SI units).
///
/// The drive/brake split sigmoid and the friction softplus share a sharpness
/// symbol in the literature but act on quantities of different dimension
/// (newtons vs. a normalized utilization), so they are configured separately.
struct VehicleParams {
  double M = 2000.0;      ///< mass [kg]
  double Izz = 3500.0;    ///< yaw inertia [kg m^2]
  double Lf = 1.5;        ///< CG to front axle [m]
  double Lr = 1.5;        ///< CG to rear axle [m]
  double h = 0.5;         ///< CG height [m]
  double Caf = 1.6e5;     ///< front cornering stiffness [N/rad]
  double Car = 1.6e5;     ///< rear cornering stiffness [N/rad]
  double mu_f = 0.9;
  double mu_r = 0.95;
  double b_r = 0.6;       ///< front share of braking force
  double p_split = 0.01;  ///< drive/brake sigmoid sharpness [1/N]
  double p_friction = 10.0;  ///< friction-circle softplus sharpness [-]
  double g = 9.81;
  double p_a = 0.08;      ///< power-limit slope [1/s]
  double p_b = 60.0;      ///< power-limit speed asymptote [m/s]

  double wheelbase() const { return Lf + Lr; }

  /// Load-transfer gain such that Kz * ax is a force for ax in m/s^2.
  double Kz() const { return M * h / wheelbase(); }

  /// Throws ConfigError describing the first violated invariant.
  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) {
        throw ConfigError(std::string("vehicle parameter ") + name + " must be > 0");
      }
    };
    positive(M, "M");
    positive(Izz, "Izz");
    positive(Lf, "Lf");
    positive(Lr, "Lr");
    positive(h, "h");
    positive(Caf, "Caf");
    positive(Car, "Car");
    positive(mu_f, "mu_f");
    positive(mu_r, "mu_r");
    positive(p_split, "p_split");
    positive(p_friction, "p_friction");
    positive(g, "g");
    positive(p_a, "p_a");
    positive(p_b, "p_b");
    if (!(b_r > 0.0 && b_r < 1.0)) {
      throw ConfigError("vehicle parameter b_r must lie in (0, 1)");
    }
  }

  /// Reads any subset of the fields from a key = value file; missing keys
  /// keep their defaults.
  static VehicleParams from_config(const KeyValueConfig& cfg) {
    VehicleParams p;
    p.M = cfg.number_or("M", p.M);
    p.Izz = cfg.number_or("Izz", p.Izz);
    p.Lf = cfg.number_or("Lf", p.Lf);
    p.Lr = cfg.number_or("Lr", p.Lr);
    p.h = cfg.number_or("h", p.h);
    p.Caf = cfg.number_or("Caf", p.Caf);
    p.Car = cfg.number_or("Car", p.Car);
    p.mu_f = cfg.number_or("mu_f", p.mu_f);
    p.mu_r = cfg.number_or("mu_r", p.mu_r);
    p.b_r = cfg.number_or("b_r", p.b_r);
    p.p_split = cfg.number_or("p_split", p.p_split);
    p.p_friction = cfg.number_or("p_friction", p.p_friction);
    p.g = cfg.number_or("g", p.g);
    p.p_a = cfg.number_or("p_a", p.p_a);
    p.p_b = cfg.number_or("p_b", p.p_b);
    p.validate();
    return p;
  }

  static VehicleParams load(const std::string& path) { return from_config(KeyValueConfig::load(path)); }
};

}  // namespace envmpc
