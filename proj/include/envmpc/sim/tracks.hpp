#pragma once

// Shipped track geometries. Each is built from a dense centerline with unit
// normals, offset by the half width and resampled to uniform arc length.

#include "envmpc/planner/road_io.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace envmpc::tracks {

using geometry::Point;

namespace detail {

inline RoadBoundary offset_road(const std::vector<Point>& c, const std::vector<Point>& n, double half_width,
                                bool closed, double spacing) {
  std::vector<Point> l(c.size());
  std::vector<Point> r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    l[i] = c[i] + half_width * n[i];
    r[i] = c[i] - half_width * n[i];
  }
  if (closed) {
    l.back() = l.front();
    r.back() = r.front();
  }
  return resample_road(RoadBoundary::from_sides(std::move(l), std::move(r), closed), spacing);
}

// Samples a parametric curve p(t), t in [0, 1], with normals from the
// analytic tangent.
inline RoadBoundary parametric_road(const std::function<Point(double)>& p, const std::function<Point(double)>& dp,
                                    int samples, double half_width, bool closed, double spacing) {
  std::vector<Point> c;
  std::vector<Point> n;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(closed && i == samples ? 0 : i) / samples;
    const Point d = dp(t).normalized();
    c.push_back(p(t));
    n.emplace_back(-d.y(), d.x());
  }
  return offset_road(c, n, half_width, closed, spacing);
}

}  // namespace detail

/// Two straights joined by semicircles, counterclockwise, starting at the
/// beginning of the lower straight heading +x.
inline RoadBoundary oval(double straight = 150.0, double radius = 50.0, double half_width = 5.0,
                         double spacing = 2.0) {
  const double arc = std::numbers::pi * radius;
  const double total = 2.0 * straight + 2.0 * arc;
  auto at = [=](double s, Point& pos, Point& tan) {
    s = std::fmod(s, total);
    if (s < straight) {
      pos = {s, 0.0};
      tan = {1.0, 0.0};
    } else if (s < straight + arc) {
      const double a = (s - straight) / radius;
      pos = {straight + radius * std::sin(a), radius - radius * std::cos(a)};
      tan = {std::cos(a), std::sin(a)};
    } else if (s < 2.0 * straight + arc) {
      pos = {straight - (s - straight - arc), 2.0 * radius};
      tan = {-1.0, 0.0};
    } else {
      const double a = (s - 2.0 * straight - arc) / radius;
      pos = {-radius * std::sin(a), radius + radius * std::cos(a)};
      tan = {-std::cos(a), -std::sin(a)};
    }
  };
  const int samples = static_cast<int>(std::ceil(total / 0.25));
  std::vector<Point> c;
  std::vector<Point> n;
  for (int i = 0; i <= samples; ++i) {
    Point pos;
    Point tan;
    at(i == samples ? 0.0 : total * i / samples, pos, tan);
    c.push_back(pos);
    n.emplace_back(-tan.y(), tan.x());
  }
  return detail::offset_road(c, n, half_width, true, spacing);
}

struct TrackPiece {
  double length = 0.0;  ///< [m] straight length, or 0 for an arc
  double turn = 0.0;    ///< [rad] arc turn angle, positive to the left
  double radius = 0.0;  ///< [m]
  double arc_length() const { return length > 0.0 ? length : std::abs(turn) * radius; }
};

/// Closed circuit about 2.45 km long mixing hairpins, sweepers and long
/// straights, counterclockwise; direction changes are separated by short
/// straights. The straights absorb the minimum-norm length change that
/// closes the loop; the layout is then scaled to `length`.
inline RoadBoundary circuit(double length = 2450.0, double half_width = 6.0, double spacing = 2.0) {
  constexpr double deg = std::numbers::pi / 180.0;
  std::vector<TrackPiece> P{
      {291, 0, 0}, {0, 90 * deg, 45},   {244, 0, 0},       {0, 60 * deg, 80},  {149, 0, 0},
      {0, -45 * deg, 60}, {40, 0, 0},  {0, 90 * deg, 45},  {126, 0, 0},       {0, 45 * deg, 100},
      {60, 0, 0},        {0, -60 * deg, 55}, {40, 0, 0},  {0, 75 * deg, 45},  {83, 0, 0},
      {0, 60 * deg, 120}, {56, 0, 0},  {0, -30 * deg, 80}, {40, 0, 0},        {0, 75 * deg, 50},
      {141, 0, 0},
  };
  auto trace = [&](double ds, std::vector<Point>* c, std::vector<Point>* n) {
    Point pos(0.0, 0.0);
    double h = 0.0;
    for (const TrackPiece& p : P) {
      const double len = p.arc_length();
      const int steps = std::max(1, static_cast<int>(std::ceil(len / ds)));
      const double k = p.length > 0.0 ? 0.0 : (p.turn > 0.0 ? 1.0 : -1.0) / p.radius;
      for (int i = 0; i < steps; ++i) {
        if (c) {
          c->push_back(pos);
          n->emplace_back(-std::sin(h), std::cos(h));
        }
        const double l = len / steps;
        if (k == 0.0) {
          pos += l * Point(std::cos(h), std::sin(h));
        } else {
          const double h1 = h + k * l;
          pos += Point(std::sin(h1) - std::sin(h), std::cos(h) - std::cos(h1)) / k;
          h = h1;
        }
      }
    }
    return pos;
  };
  Eigen::Matrix<double, 2, Eigen::Dynamic> A(2, 0);
  std::vector<std::size_t> straights;
  double h = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (P[i].length > 0.0) {
      straights.push_back(i);
      A.conservativeResize(2, A.cols() + 1);
      A.col(A.cols() - 1) = Point(std::cos(h), std::sin(h));
    }
    h += P[i].turn;
  }
  const Point gap = trace(1.0, nullptr, nullptr);
  const Eigen::VectorXd d = A.transpose() * (A * A.transpose()).ldlt().solve(-gap);
  for (std::size_t j = 0; j < straights.size(); ++j) P[straights[j]].length += d[static_cast<Eigen::Index>(j)];
  double total = 0.0;
  for (const TrackPiece& p : P) total += p.arc_length();
  for (TrackPiece& p : P) {
    p.length *= length / total;
    p.radius *= length / total;
  }
  std::vector<Point> c;
  std::vector<Point> n;
  trace(0.25, &c, &n);
  c.push_back(c.front());
  n.push_back(n.front());
  return detail::offset_road(c, n, half_width, true, spacing);
}

struct HighwayGeometry {
  double lane_width = 3.7;  ///< [m]
  double radius = -400.0;   ///< [m] signed, negative curves right
  double length = 450.0;    ///< [m]
};

/// Two-lane highway of constant curvature; the centerline is the lane
/// divider and the original (right) lane is centered at -lane_width/2.
inline RoadBoundary cis_highway(const HighwayGeometry& g = {}, double spacing = 2.0) {
  const int samples = static_cast<int>(std::ceil(g.length / 0.25));
  std::vector<Point> c;
  std::vector<Point> n;
  for (int i = 0; i <= samples; ++i) {
    const double a = g.length * i / samples / g.radius;
    c.emplace_back(g.radius * std::sin(a), g.radius * (1.0 - std::cos(a)));
    n.emplace_back(-std::sin(a), std::cos(a));
  }
  return detail::offset_road(c, n, g.lane_width, false, spacing);
}

/// Sinusoidal trail y = A sin(2 pi x / lambda) for x in [x0, x1].
inline RoadBoundary trail(double amplitude = 6.0, double wavelength = 60.0, double x0 = -10.0, double x1 = 170.0,
                          double half_width = 3.0, double spacing = 2.0) {
  const double k = 2.0 * std::numbers::pi / wavelength;
  auto p = [=](double t) {
    const double x = x0 + (x1 - x0) * t;
    return Point(x, amplitude * std::sin(k * x));
  };
  auto dp = [=](double t) {
    const double x = x0 + (x1 - x0) * t;
    return Point(1.0, amplitude * k * std::cos(k * x));
  };
  return detail::parametric_road(p, dp, 8000, half_width, false, spacing);
}

}  // namespace envmpc::tracks
