#pragma once

#include "envmpc/geometry/path.hpp"
#include "envmpc/geometry/polygon.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace envmpc {

/// Left/right boundary polylines with the derived centerline (midpoints),
/// cumulative centerline arc length and half widths. On a closed road the
/// last station repeats the first.
struct RoadBoundary {
  std::vector<geometry::Point> left;
  std::vector<geometry::Point> right;
  std::vector<geometry::Point> centerline;
  std::vector<double> s;
  std::vector<double> half_widths;
  bool closed = false;

  static RoadBoundary from_sides(std::vector<geometry::Point> l, std::vector<geometry::Point> r,
                                 bool closed = false) {
    if (l.size() != r.size() || l.size() < 2) {
      throw std::invalid_argument("road needs matching left/right polylines with at least two stations");
    }
    RoadBoundary road;
    road.left = std::move(l);
    road.right = std::move(r);
    road.closed = closed;
    const std::size_t n = road.left.size();
    road.centerline.resize(n);
    road.half_widths.resize(n);
    road.s.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      road.centerline[i] = 0.5 * (road.left[i] + road.right[i]);
      road.half_widths[i] = 0.5 * (road.left[i] - road.right[i]).norm();
      if (i > 0) road.s[i] = road.s[i - 1] + (road.centerline[i] - road.centerline[i - 1]).norm();
    }
    road.validate();
    return road;
  }

  std::size_t size() const { return centerline.size(); }
  double length() const { return s.back(); }
  std::size_t quad_count() const { return size() - 1; }

  geometry::ArcPath centerline_path() const { return geometry::ArcPath(centerline, closed); }

  /// Quadrilateral between stations i and i+1, counterclockwise.
  geometry::Polygon quad(std::size_t i) const { return {right[i], right[i + 1], left[i + 1], left[i]}; }

  /// Closed boundary polygon: left forward, right backward.
  geometry::Polygon polygon() const {
    geometry::Polygon poly(left.begin(), left.end());
    poly.insert(poly.end(), right.rbegin(), right.rend());
    return poly;
  }

  double half_width_at(double station) const {
    const auto [i, t] = locate(station);
    return (1.0 - t) * half_widths[i] + t * half_widths[i + 1];
  }

  /// Left and right boundary points of the cross-section at `station`.
  std::pair<geometry::Point, geometry::Point> cross_section(double station) const {
    const auto [i, t] = locate(station);
    return {(1.0 - t) * left[i] + t * left[i + 1], (1.0 - t) * right[i] + t * right[i + 1]};
  }

  /// Unit vector from the right to the left boundary at `station`.
  geometry::Point cross_normal(double station) const {
    const auto [l, r] = cross_section(station);
    return (l - r).normalized();
  }

  /// Heading perpendicular to the cross-section at `station`.
  double cross_heading(double station) const {
    const geometry::Point n = cross_normal(station);
    return std::atan2(-n.x(), n.y());
  }

  /// Segment index and fraction of a station; wraps on closed roads.
  std::pair<std::size_t, double> locate(double station) const {
    if (closed) {
      station = std::fmod(station, length());
      if (station < 0.0) station += length();
    }
    station = std::clamp(station, 0.0, length());
    auto it = std::upper_bound(s.begin(), s.end(), station);
    std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
    i = std::min(i, size() - 2);
    return {i, (station - s[i]) / (s[i + 1] - s[i])};
  }

  void validate() const {
    const std::size_t n = centerline.size();
    if (left.size() != n || right.size() != n || s.size() != n || half_widths.size() != n || n < 2) {
      throw std::invalid_argument("road arrays must have equal length >= 2");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(half_widths[i] > 0.0)) throw std::invalid_argument("road half widths must be positive");
      if (i > 0 && !(s[i] > s[i - 1])) throw std::invalid_argument("road centerline stations must increase");
    }
    if (closed && (centerline.front() - centerline.back()).norm() > 1e-6) {
      throw std::invalid_argument("closed road does not close: first and last stations differ");
    }
  }
};

/// Savitzky-Golay smoothing. Interior samples use the centered window; near
/// the ends the window is shifted inside the data and the fitted polynomial is
/// evaluated at the sample's own position.
inline std::vector<double> savitzky_golay(const std::vector<double>& y, int window, int order) {
  if (window < 1 || window % 2 == 0 || order < 0 || order >= window) {
    throw std::invalid_argument("savitzky_golay: window must be odd and larger than the order");
  }
  const int n = static_cast<int>(y.size());
  if (n < window) return y;
  std::vector<double> out(y.size());
  const int h = window / 2;
  for (int i = 0; i < n; ++i) {
    const int start = std::clamp(i - h, 0, n - window);
    Eigen::MatrixXd A(window, order + 1);
    Eigen::VectorXd b(window);
    for (int r = 0; r < window; ++r) {
      const double x = static_cast<double>(start + r - i);
      double p = 1.0;
      for (int c = 0; c <= order; ++c) {
        A(r, c) = p;
        p *= x;
      }
      b(r) = y[static_cast<std::size_t>(start + r)];
    }
    out[static_cast<std::size_t>(i)] = A.colPivHouseholderQr().solve(b)(0);
  }
  return out;
}

struct RoadGeneratorOptions {
  double step = 5.0;   ///< [m] per centerline station
  int sg_window = 11;
  int sg_order = 3;
  int width_knots = 5;
};

namespace detail {

// Portable uniform draw in [lo, hi) from the raw engine output.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

// Random values at random distinct interior indices, end values pinned,
// linear interpolation in between.
inline std::vector<double> knot_profile(std::mt19937_64& rng, int n, int knots, double lo, double hi,
                                        double end_value) {
  std::vector<int> idx{0, n - 1};
  std::vector<double> val{end_value, end_value};
  const int want = std::min(knots, std::max(0, n - 2));
  while (static_cast<int>(idx.size()) < want + 2) {
    const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 2));
    if (std::find(idx.begin(), idx.end(), k) != idx.end()) continue;
    idx.push_back(k);
    val.push_back(uniform(rng, lo, hi));
  }
  std::vector<int> order(idx.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return idx[a] < idx[b]; });
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::size_t q = 0; q + 1 < order.size(); ++q) {
    const int a = idx[order[q]];
    const int b = idx[order[q + 1]];
    for (int i = a; i <= b; ++i) {
      const double t = b == a ? 0.0 : static_cast<double>(i - a) / (b - a);
      out[static_cast<std::size_t>(i)] = (1.0 - t) * val[order[q]] + t * val[order[q + 1]];
    }
  }
  return out;
}

}  // namespace detail

/// Road from per-station turn angles kappa (rad per station) and half widths.
/// The heading is the running sum of kappa, so constant kappa bends the
/// centerline into unit-chord arcs.
inline RoadBoundary road_from_profile(const std::vector<double>& kappa, const std::vector<double>& half_width,
                                      double step = 5.0) {
  if (kappa.size() != half_width.size() || kappa.size() < 2) {
    throw std::invalid_argument("road_from_profile: need matching curvature and width arrays");
  }
  std::vector<geometry::Point> l(kappa.size());
  std::vector<geometry::Point> r(kappa.size());
  geometry::Point c(0.0, 0.0);
  double heading = 0.0;
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (i > 0) {
      heading += kappa[i];
      c += step * geometry::Point(std::cos(heading), std::sin(heading));
    }
    const geometry::Point n(-std::sin(heading), std::cos(heading));
    l[i] = c + half_width[i] * n;
    r[i] = c - half_width[i] * n;
  }
  return RoadBoundary::from_sides(std::move(l), std::move(r));
}

/// Random road: curvature knots plus per-station noise, both uniform in
/// +-curvature_scale; five random half widths in `width_range`, linearly
/// interpolated and Savitzky-Golay smoothed. Deterministic per seed.
inline RoadBoundary generate_road(std::uint64_t seed, int n_stations, std::pair<double, double> width_range,
                                  double curvature_scale, const RoadGeneratorOptions& opt = {}) {
  const auto [wmin, wmax] = width_range;
  if (!(wmin > 0.0) || !(wmax >= wmin)) throw std::invalid_argument("generate_road: degenerate width range");
  if (n_stations < 2) throw std::invalid_argument("generate_road: need at least two stations");
  if (!(curvature_scale >= 0.0) || 2.0 * curvature_scale * wmax >= opt.step) {
    throw std::invalid_argument("generate_road: curvature scale too large for the road width");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> kappa =
      detail::knot_profile(rng, n_stations, opt.width_knots, -curvature_scale, curvature_scale, 0.0);
  for (double& k : kappa) k += detail::uniform(rng, -curvature_scale, curvature_scale);
  kappa.front() = 0.0;
  std::vector<double> w =
      detail::knot_profile(rng, n_stations, opt.width_knots, wmin, wmax, 0.5 * (wmin + wmax));
  w = savitzky_golay(w, opt.sg_window, opt.sg_order);
  for (double& x : w) x = std::clamp(x, wmin, wmax);
  return road_from_profile(kappa, w, opt.step);
}

}  // namespace envmpc
