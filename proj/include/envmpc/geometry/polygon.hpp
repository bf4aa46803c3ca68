#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace envmpc::geometry {

using Point = Eigen::Vector2d;
using Polygon = std::vector<Point>;

inline double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Signed shoelace area; positive for counterclockwise vertex order.
inline double signed_area(const Polygon& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    a += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * a;
}

inline double area(const Polygon& poly) { return std::abs(signed_area(poly)); }

inline Polygon counterclockwise(Polygon poly) {
  if (signed_area(poly) < 0.0) {
    std::reverse(poly.begin(), poly.end());
  }
  return poly;
}

/// Sutherland-Hodgman clip of `subject` by the convex counterclockwise
/// polygon `clip`. The subject may be non-convex; the area of the result is
/// the intersection area.
inline Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
  Polygon out = subject;
  const std::size_t nc = clip.size();
  for (std::size_t e = 0; e < nc && !out.empty(); ++e) {
    const Point& a = clip[e];
    const Point& b = clip[(e + 1) % nc];
    const Point edge = b - a;
    auto side = [&](const Point& p) { return cross(edge, p - a); };
    Polygon in = std::move(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& cur = in[i];
      const Point& prev = in[(i + n - 1) % n];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) {
          out.push_back(prev + (cur - prev) * (sp / (sp - sc)));
        }
        out.push_back(cur);
      } else if (sp >= 0.0) {
        out.push_back(prev + (cur - prev) * (sp / (sp - sc)));
      }
    }
  }
  return out;
}

inline double intersection_area(const Polygon& subject, const Polygon& convex_clip) {
  return area(clip_convex(subject, counterclockwise(convex_clip)));
}

/// Even-odd point-in-polygon test.
inline bool contains(const Polygon& poly, const Point& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xint = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xint) {
        inside = !inside;
      }
    }
  }
  return inside;
}

/// Distance from p to segment [a, b] and the segment parameter of the foot.
inline double segment_distance(const Point& p, const Point& a, const Point& b, double* t_out = nullptr) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  if (t_out != nullptr) {
    *t_out = t;
  }
  return (p - (a + t * ab)).norm();
}

struct Box {
  Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  void extend(const Point& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void pad(double m) {
    lo.array() -= m;
    hi.array() += m;
  }
};

}  // namespace envmpc::geometry
