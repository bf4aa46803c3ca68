#pragma once

#include "envmpc/geometry/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace envmpc::geometry {

/// Piecewise-linear polyline parameterized by cumulative arc length. A closed
/// path's last point coincides with its first; arc lengths then wrap.
class ArcPath {
 public:
  ArcPath() = default;

  explicit ArcPath(std::vector<Point> pts, bool closed = false) : pts_(std::move(pts)), closed_(closed) {
    if (pts_.size() < 2) {
      throw std::invalid_argument("ArcPath needs at least two points");
    }
    s_.resize(pts_.size());
    s_[0] = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      const double ds = (pts_[i] - pts_[i - 1]).norm();
      if (!(ds > 0.0)) {
        throw std::invalid_argument("ArcPath: consecutive points must be distinct");
      }
      s_[i] = s_[i - 1] + ds;
    }
  }

  const std::vector<Point>& points() const { return pts_; }
  const std::vector<double>& stations() const { return s_; }
  double length() const { return s_.back(); }
  bool closed() const { return closed_; }
  std::size_t size() const { return pts_.size(); }

  /// Wraps s into [0, length) for closed paths; clamps for open ones.
  double normalize(double s) const {
    if (closed_) {
      const double L = length();
      s = std::fmod(s, L);
      return s < 0.0 ? s + L : s;
    }
    return std::clamp(s, 0.0, length());
  }

  /// Segment index i with s_[i] <= s <= s_[i+1] (after normalization).
  std::size_t segment(double s) const {
    s = normalize(s);
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
    return std::min(i, pts_.size() - 2);
  }

  Point point_at(double s) const {
    s = normalize(s);
    const std::size_t i = segment(s);
    const double t = (s - s_[i]) / (s_[i + 1] - s_[i]);
    return pts_[i] + t * (pts_[i + 1] - pts_[i]);
  }

  double heading_at(double s) const {
    const std::size_t i = segment(s);
    const Point d = pts_[i + 1] - pts_[i];
    return std::atan2(d.y(), d.x());
  }

  /// Arc length of the closest point. With a hint, only the window
  /// [hint - back, hint + ahead] is searched, which keeps projections
  /// continuous on tracks that pass near themselves.
  double project(const Point& p, double hint = std::numeric_limits<double>::quiet_NaN(), double back = 50.0,
                 double ahead = 150.0, double* distance = nullptr) const {
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    auto visit = [&](std::size_t i) {
      double t = 0.0;
      const double d = segment_distance(p, pts_[i], pts_[i + 1], &t);
      if (d < best_d) {
        best_d = d;
        best_s = s_[i] + t * (s_[i + 1] - s_[i]);
      }
    };
    if (std::isnan(hint)) {
      for (std::size_t i = 0; i + 1 < pts_.size(); ++i) visit(i);
    } else {
      const std::size_t nseg = pts_.size() - 1;
      std::size_t i = segment(hint - back);
      double covered = 0.0;
      const double span = back + ahead;
      for (std::size_t k = 0; k <= nseg && covered <= span; ++k) {
        visit(i);
        covered += s_[i + 1] - s_[i];
        if (i + 1 < nseg) {
          ++i;
        } else if (closed_) {
          i = 0;
        } else {
          break;
        }
      }
    }
    if (distance != nullptr) {
      *distance = best_d;
    }
    return best_s;
  }

  /// Signed lateral offset of p from the path at arc length s (left positive).
  double lateral_offset(const Point& p, double s) const {
    const double th = heading_at(s);
    const Point n(-std::sin(th), std::cos(th));
    return (p - point_at(s)).dot(n);
  }

 private:
  std::vector<Point> pts_;
  std::vector<double> s_;
  bool closed_ = false;
};

}  // namespace envmpc::geometry
