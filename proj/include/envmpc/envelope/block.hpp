#pragma once

#include "envmpc/autodiff/smooth.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>

namespace envmpc {

/// A p-norm superellipse block: center (xb, yb), yaw psib, half length Lb,
/// half width Wb. For p = 4 the block is a rounded rectangle fully contained
/// in its bounding rectangle.
struct EnvelopeBlock {
  double xb = 0.0;
  double yb = 0.0;
  double psib = 0.0;
  double Lb = 1.0;
  double Wb = 1.0;
  int p = 4;

  void validate() const {
    if (!(Lb > 0.0) || !(Wb > 0.0)) {
      throw std::invalid_argument("envelope block needs positive half length and half width");
    }
    if (p < 2 || p % 2 != 0) {
      throw std::invalid_argument("envelope block norm order must be an even integer >= 2");
    }
  }

  /// Bounding rectangle corners, counterclockwise starting rear-right.
  std::array<Eigen::Vector2d, 4> corners() const {
    const Eigen::Vector2d c(xb, yb);
    const Eigen::Vector2d ex(std::cos(psib), std::sin(psib));
    const Eigen::Vector2d ey(-ex.y(), ex.x());
    return {c - Lb * ex - Wb * ey, c + Lb * ex - Wb * ey, c + Lb * ex + Wb * ey, c - Lb * ex + Wb * ey};
  }

  /// Point on the superellipse boundary at parameter t in [0, 2 pi).
  Eigen::Vector2d boundary_point(double t) const {
    const double c = std::cos(t);
    const double s = std::sin(t);
    const double e = 2.0 / p;
    const double lx = Lb * std::copysign(std::pow(std::abs(c), e), c);
    const double ly = Wb * std::copysign(std::pow(std::abs(s), e), s);
    const double cp = std::cos(psib);
    const double sp = std::sin(psib);
    return {xb + cp * lx - sp * ly, yb + sp * lx + cp * ly};
  }
};

/// g = d_b - 1 with d_b the p-norm of the block-frame offset scaled by
/// (Lb, Wb); g <= 0 inside the block. At the exact center d_b has a norm
/// kink; there the value is returned with zero derivatives.
template <typename T>
T block_distance(const T& x, const T& y, const EnvelopeBlock& b) {
  const double c = std::cos(b.psib);
  const double s = std::sin(b.psib);
  const T dx = x - b.xb;
  const T dy = y - b.yb;
  const T lon = (c * dx + s * dy) / b.Lb;
  const T lat = (c * dy - s * dx) / b.Wb;
  const T q = ipow(lon, b.p) + ipow(lat, b.p);
  if (!(value_of(q) > 1e-300)) {
    return T(-1.0);
  }
  return exp(log(q) / static_cast<double>(b.p)) - 1.0;
}

}  // namespace envmpc
