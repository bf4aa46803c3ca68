#pragma once

// Emergency lane change on a two-lane road. The centerline of the road is the
// lane divider; the original lane lies to its right (negative lateral offset).

#include "envmpc/envelope/spatial_envelope.hpp"
#include "envmpc/planner/road.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace envmpc {

struct CisOptions {
  double lane_width = 3.7;         ///< [m]
  double obstacle_ahead = 35.0;    ///< [m] from the initial CG station to the obstacle's rear
  double obstacle_length = 5.0;    ///< [m]
  double block_half_length = 10.0;  ///< [m]
  double block_spacing = 10.0;     ///< [m] between consecutive centers in a lane
  double edge_inset = 0.2;         ///< [m] blocks stay this far inside the outer road edges
  double divider_gap = 0.05;       ///< [m] adjacent-lane blocks start this far left of the lane divider
  double lane_overlap = 0.6;       ///< [m] original-lane blocks reach this far into the adjacent lane
  double adjacent_lead = 30.0;     ///< [m] adjacent-lane blocks start this far before the obstacle
  double stop_margin = 0.5;        ///< [m] original-lane blocks end this far before the obstacle
  double appear_time = 0.0;        ///< [s] the obstacle's envelope replaces the open-lane one from here on

  void validate() const {
    if (!(lane_width > 0.0 && obstacle_length > 0.0 && block_half_length > 0.0 && block_spacing > 0.0)) {
      throw std::invalid_argument("cis: lane width, obstacle length and block sizes must be positive");
    }
    if (!(block_spacing <= 2.0 * block_half_length)) throw std::invalid_argument("cis: lane blocks would not overlap");
    if (!(edge_inset >= 0.0 && divider_gap >= 0.0 && lane_overlap > divider_gap &&
          lane_overlap < lane_width - edge_inset)) {
      throw std::invalid_argument("cis: need divider_gap < lane_overlap < lane_width - edge_inset");
    }
    if (!(obstacle_ahead > 0.0 && adjacent_lead > 0.0 && stop_margin >= 0.0)) {
      throw std::invalid_argument("cis: obstacle distances must be positive");
    }
  }
};

/// Blocking interval of the original lane.
struct Obstacle {
  double s_begin = 0.0;
  double s_end = 0.0;
  double lateral_min = 0.0;
  double lateral_max = 0.0;

  bool contains(double s, double lateral) const {
    return s >= s_begin && s <= s_end && lateral >= lateral_min && lateral <= lateral_max;
  }
};

inline Obstacle cis_obstacle(double start_station, const CisOptions& o) {
  return {start_station + o.obstacle_ahead, start_station + o.obstacle_ahead + o.obstacle_length, -o.lane_width, 0.0};
}

namespace detail {

// Blocks along the centerline whose lateral extent is [lo, hi], centered at
// evenly spaced stations from s0 to s1 inclusive, at most block_spacing apart.
inline void lane_blocks(const geometry::ArcPath& c, double s0, double s1, double lo, double hi, const CisOptions& o,
                        std::vector<EnvelopeBlock>& out) {
  const int count = static_cast<int>(std::ceil((s1 - s0) / o.block_spacing - 1e-9));
  for (int k = 0; k <= count; ++k) {
    const double s = count == 0 ? s0 : s0 + (s1 - s0) * k / count;
    const double th = c.heading_at(s);
    const geometry::Point n(-std::sin(th), std::cos(th));
    const geometry::Point p = c.point_at(s) + 0.5 * (lo + hi) * n;
    EnvelopeBlock b;
    b.xb = p.x();
    b.yb = p.y();
    b.psib = th;
    b.Lb = o.block_half_length;
    b.Wb = 0.5 * (hi - lo);
    out.push_back(b);
  }
}

}  // namespace detail

/// Original lane up to the obstacle plus the adjacent lane from before the
/// obstacle to the end of the road. The original-lane blocks reach
/// `lane_overlap` into the adjacent lane so the two chains intersect; the
/// adjacent-lane blocks never reach into the original lane.
inline std::vector<EnvelopeBlock> cis_blocks(const RoadBoundary& road, const Obstacle& obs, const CisOptions& o) {
  o.validate();
  const geometry::ArcPath c = road.centerline_path();
  const double Lb = o.block_half_length;
  const double last_orig = obs.s_begin - o.stop_margin - Lb;
  const double first_adj = obs.s_begin - o.adjacent_lead;
  if (last_orig < Lb || first_adj < Lb || obs.s_end + Lb > road.length()) {
    throw std::invalid_argument("cis: road too short for the obstacle placement");
  }
  std::vector<EnvelopeBlock> out;
  const double w = o.lane_width;
  detail::lane_blocks(c, Lb, last_orig, -w + o.edge_inset, o.lane_overlap, o, out);
  detail::lane_blocks(c, first_adj, road.length() - Lb, o.divider_gap, w - o.edge_inset, o, out);
  return out;
}

/// Original lane only, along the whole road.
inline std::vector<EnvelopeBlock> open_lane_blocks(const RoadBoundary& road, const CisOptions& o) {
  o.validate();
  std::vector<EnvelopeBlock> out;
  const geometry::ArcPath c = road.centerline_path();
  detail::lane_blocks(c, o.block_half_length, road.length() - o.block_half_length, -o.lane_width + o.edge_inset,
                      o.lane_overlap, o, out);
  return out;
}

}  // namespace envmpc
