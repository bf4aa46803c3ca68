#pragma once

#include "envmpc/envelope/block.hpp"
#include "envmpc/planner/road.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace envmpc {

/// Rectangle parameterized by half length L, half width W, left-center
/// point C (midpoint of the rear edge) and yaw theta. The block center is
/// C + L (cos theta, sin theta).
struct BlockDesign {
  double L = 1.0;
  double W = 1.0;
  geometry::Point C{0.0, 0.0};
  double theta = 0.0;

  geometry::Point axis() const { return {std::cos(theta), std::sin(theta)}; }
  geometry::Point center() const { return C + L * axis(); }
  double area() const { return 4.0 * L * W; }

  /// Counterclockwise from rear-right.
  geometry::Polygon corners() const {
    const geometry::Point ex = axis();
    const geometry::Point ey(-ex.y(), ex.x());
    return {C - W * ey, C + 2.0 * L * ex - W * ey, C + 2.0 * L * ex + W * ey, C + W * ey};
  }

  EnvelopeBlock to_block(int p = 4) const {
    const geometry::Point c = center();
    return EnvelopeBlock{c.x(), c.y(), theta, L, W, p};
  }

  void validate() const {
    if (!(L > 0.0) || !(W > 0.0)) throw std::invalid_argument("block design needs positive L and W");
  }
};

/// Road quadrilaterals with bounding boxes for fast rectangle queries.
class QuadIndex {
 public:
  explicit QuadIndex(const RoadBoundary& road) {
    quads_.reserve(road.quad_count());
    boxes_.reserve(road.quad_count());
    for (std::size_t i = 0; i < road.quad_count(); ++i) {
      quads_.push_back(road.quad(i));
      geometry::Box b;
      for (const auto& p : quads_.back()) b.extend(p);
      boxes_.push_back(b);
    }
  }

  /// Area of the rectangle covered by the road quads.
  double covered_area(const geometry::Polygon& rect) const {
    geometry::Box rb;
    for (const auto& p : rect) rb.extend(p);
    const geometry::Polygon clip = geometry::counterclockwise(rect);
    double a = 0.0;
    for (std::size_t i = 0; i < quads_.size(); ++i) {
      const geometry::Box& b = boxes_[i];
      if (b.hi.x() < rb.lo.x() || b.lo.x() > rb.hi.x() || b.hi.y() < rb.lo.y() || b.lo.y() > rb.hi.y()) continue;
      a += clipped_area(quads_[i], clip);
    }
    return a;
  }

  /// Area of quad q clipped by the convex counterclockwise polygon `clip`,
  /// using fixed-size buffers.
  static double clipped_area(const geometry::Polygon& q, const geometry::Polygon& clip) {
    std::array<geometry::Point, 16> buf_a;
    std::array<geometry::Point, 16> buf_b;
    std::size_t n = q.size();
    std::copy(q.begin(), q.end(), buf_a.begin());
    geometry::Point* in = buf_a.data();
    geometry::Point* out = buf_b.data();
    const std::size_t nc = clip.size();
    for (std::size_t e = 0; e < nc && n > 0; ++e) {
      const geometry::Point& a = clip[e];
      const geometry::Point edge = clip[(e + 1) % nc] - a;
      std::size_t m = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const geometry::Point& cur = in[i];
        const geometry::Point& prev = in[(i + n - 1) % n];
        const double sc = geometry::cross(edge, cur - a);
        const double sp = geometry::cross(edge, prev - a);
        if (sc >= 0.0) {
          if (sp < 0.0) out[m++] = prev + (cur - prev) * (sp / (sp - sc));
          out[m++] = cur;
        } else if (sp >= 0.0) {
          out[m++] = prev + (cur - prev) * (sp / (sp - sc));
        }
      }
      n = m;
      std::swap(in, out);
    }
    double area = 0.0;
    for (std::size_t i = 0; i < n; ++i) area += geometry::cross(in[i], in[(i + 1) % n]);
    return 0.5 * std::abs(area);
  }

 private:
  std::vector<geometry::Polygon> quads_;
  std::vector<geometry::Box> boxes_;
};

struct AreaSplit {
  double in = 0.0;
  double out = 0.0;
};

inline AreaSplit block_area_split(const BlockDesign& b, const QuadIndex& idx) {
  const double total = b.area();
  const double in = std::min(idx.covered_area(b.corners()), total);
  return {in, total - in};
}

inline AreaSplit block_area_split(const BlockDesign& b, const RoadBoundary& road) {
  return block_area_split(b, QuadIndex(road));
}

/// chi = (A_in - A_out) 2L.
inline double reward(double L, double a_in, double a_out) { return (a_in - a_out) * 2.0 * L; }

inline double reward(const BlockDesign& b, const QuadIndex& idx) {
  const AreaSplit a = block_area_split(b, idx);
  return reward(b.L, a.in, a.out);
}

inline constexpr double kBlockFeasibleTol = 1e-9;  ///< relative out-area accepted as contained

inline bool block_feasible(const BlockDesign& b, const QuadIndex& idx, double rel_tol = kBlockFeasibleTol) {
  if (!(b.L > 0.0) || !(b.W > 0.0)) return false;
  return block_area_split(b, idx).out <= rel_tol * b.area();
}

struct HeuristicOptions {
  double scale = 0.8;          ///< applied to the local half width and the scanned length
  double max_length = 200.0;   ///< [m] cap on the scanned full length
  double resolution = 0.01;    ///< bisection tolerance of the scan, relative to the length found
};

/// Station of the road centerline closest to `p`, searched near `hint`.
inline double road_station(const RoadBoundary& road, const geometry::Point& p, double hint) {
  const geometry::ArcPath path = road.centerline_path();
  return path.project(p, hint, 60.0, 240.0);
}

/// Feasible seed at centerline station s0: yaw along the local centerline,
/// W = scale * half width, and 2L = scale * the longest contained length
/// found by a doubling-then-bisection scan.
inline BlockDesign init_block_heuristic(const RoadBoundary& road, const QuadIndex& idx, double s0,
                                        const HeuristicOptions& opt = {}) {
  if (!road.closed && (s0 < 0.0 || s0 >= road.length())) {
    throw std::invalid_argument("init_block_heuristic: start station beyond the road");
  }
  BlockDesign b;
  const auto [l, r] = road.cross_section(s0);
  b.C = 0.5 * (l + r);
  b.theta = road.cross_heading(s0);
  b.W = opt.scale * road.half_width_at(s0);
  double cap = opt.max_length;
  if (!road.closed) cap = std::min(cap, road.length() - s0);
  auto ok = [&](double len) {
    BlockDesign t = b;
    t.L = 0.5 * len;
    return block_feasible(t, idx, 1e-12);
  };
  double lo = 0.0;
  double hi = std::min(4.0 * road.half_width_at(s0), cap);
  while (ok(hi)) {
    lo = hi;
    if (hi >= cap) break;
    hi = std::min(2.0 * hi, cap);
  }
  if (lo < hi) {
    while (hi - lo > opt.resolution * std::max(lo, 1.0)) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
  }
  if (!(lo > 0.0)) lo = hi;
  b.L = opt.scale * 0.5 * lo;
  return b;
}

/// Small block centered on the cross-section, for optimizer-only planning.
inline BlockDesign init_block_naive(const RoadBoundary& road, const QuadIndex&, double s0) {
  BlockDesign b;
  const auto [l, r] = road.cross_section(s0);
  b.C = 0.5 * (l + r);
  b.theta = road.cross_heading(s0);
  b.L = 1.0;
  b.W = std::min(0.5, 0.5 * road.half_width_at(s0));
  return b;
}

enum class BlockStatus { improved, unchanged, restored, failed };

inline const char* to_string(BlockStatus s) {
  switch (s) {
    case BlockStatus::improved: return "improved";
    case BlockStatus::unchanged: return "unchanged";
    case BlockStatus::restored: return "restored";
    case BlockStatus::failed: return "failed";
  }
  return "?";
}

struct BlockOptimizeOptions {
  double length_step = 0.25;   ///< [m] initial step of L
  double width_step = 0.25;    ///< [m] initial step of W and of the lateral offset
  double angle_step = 0.05;    ///< [rad]
  double expansion = 2.0;      ///< step growth after a successful move
  double length_tol = 1e-3;    ///< [m]
  double angle_tol = 1e-5;     ///< [rad]
  double max_length = std::numeric_limits<double>::infinity();  ///< [m] cap on the half length L
  int max_evaluations = 4000;
  int max_restore = 60;
};

struct BlockOptimizeResult {
  BlockDesign design;
  BlockStatus status = BlockStatus::unchanged;
  int evaluations = 0;
};

/// Compass search maximizing L*W over (L, W, lateral offset of C along the
/// start cross-section, theta) with exact containment. Never returns a
/// design smaller than a feasible init.
inline BlockOptimizeResult optimize_block(const BlockDesign& init, const QuadIndex& idx,
                                          const geometry::Point& cross_normal,
                                          const BlockOptimizeOptions& opt = {}) {
  BlockOptimizeResult res;
  res.design = init;
  auto design_of = [&](const std::array<double, 4>& v) {
    BlockDesign d;
    d.L = v[0];
    d.W = v[1];
    d.C = init.C + v[2] * cross_normal;
    d.theta = v[3];
    return d;
  };
  auto feasible = [&](const std::array<double, 4>& v) {
    ++res.evaluations;
    return block_feasible(design_of(v), idx);
  };

  std::array<double, 4> x{std::min(init.L, opt.max_length), init.W, 0.0, init.theta};
  if (!feasible(x)) {
    bool found = false;
    for (int k = 0; k < opt.max_restore && !found; ++k) {
      x[0] *= 0.9;
      x[1] *= 0.9;
      found = feasible(x);
    }
    if (!found) {
      res.status = BlockStatus::failed;
      return res;
    }
    res.status = BlockStatus::restored;
  }

  std::array<double, 4> step{opt.length_step, opt.width_step, opt.width_step, opt.angle_step};
  const std::array<double, 4> tol{opt.length_tol, opt.length_tol, opt.length_tol, opt.angle_tol};
  // Coordinate moves plus trades between length and width and between
  // width and lateral placement.
  static constexpr std::array<std::array<int, 4>, 14> kDirs{{
      {1, 0, 0, 0}, {0, 1, 0, 0}, {-1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, 1, 0}, {0, 0, -1, 0}, {0, 0, 0, 1},
      {0, 0, 0, -1}, {1, -1, 0, 0}, {-1, 1, 0, 0}, {0, 1, 1, 0}, {0, 1, -1, 0}, {1, 0, 0, 1}, {1, 0, 0, -1},
  }};
  double best = x[0] * x[1];
  const double init_area = best;
  auto converged = [&] {
    for (int i = 0; i < 4; ++i) {
      if (step[i] > tol[i]) return false;
    }
    return true;
  };
  while (!converged() && res.evaluations < opt.max_evaluations) {
    bool moved = false;
    for (const auto& d : kDirs) {
      std::array<double, 4> t = x;
      for (int i = 0; i < 4; ++i) t[i] += d[i] * step[i];
      if (!(t[0] > 0.0) || !(t[1] > 0.0) || t[0] > opt.max_length) continue;
      const double a = t[0] * t[1];
      if (!(a > best * (1.0 + 1e-12))) continue;
      if (!feasible(t)) continue;
      x = t;
      best = a;
      moved = true;
      for (int i = 0; i < 4; ++i) {
        if (d[i] != 0) step[i] *= opt.expansion;
      }
      break;
    }
    if (!moved) {
      for (double& s : step) s *= 0.5;
    }
  }
  res.design = design_of(x);
  if (res.status != BlockStatus::restored) {
    res.status = best > init_area ? BlockStatus::improved : BlockStatus::unchanged;
  }
  return res;
}

inline BlockOptimizeResult optimize_block(const BlockDesign& init, const RoadBoundary& road,
                                          const BlockOptimizeOptions& opt = {}) {
  const double s0 = road_station(road, init.C, std::numeric_limits<double>::quiet_NaN());
  return optimize_block(init, QuadIndex(road), road.cross_normal(s0), opt);
}

}  // namespace envmpc
