#pragma once

#include "envmpc/envelope/envelope_io.hpp"
#include "envmpc/planner/road.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace envmpc {

class TrackFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV with header `left_x,left_y,right_x,right_y`, one row per station.
inline std::string road_to_csv(const RoadBoundary& road) {
  std::ostringstream out;
  out << "left_x,left_y,right_x,right_y\n";
  for (std::size_t i = 0; i < road.size(); ++i) {
    out << detail::format_double(road.left[i].x()) << ',' << detail::format_double(road.left[i].y()) << ','
        << detail::format_double(road.right[i].x()) << ',' << detail::format_double(road.right[i].y()) << '\n';
  }
  return out.str();
}

inline void save_road(const RoadBoundary& road, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write road file: " + path);
  f << road_to_csv(road);
}

/// Parses the boundary rows as given, without resampling.
inline RoadBoundary road_from_csv(const std::string& text, bool closed = false,
                                  const std::string& origin = "<road>") {
  std::istringstream in(text);
  std::string line;
  std::vector<geometry::Point> l;
  std::vector<geometry::Point> r;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("left_x", 0) == 0) continue;
    std::vector<double> v;
    std::stringstream row(line);
    std::string tok;
    const std::string where = origin + ":" + std::to_string(lineno);
    while (std::getline(row, tok, ',')) {
      try {
        v.push_back(detail::parse_double(tok, where));
      } catch (const std::exception& e) {
        throw TrackFormatError(e.what());
      }
    }
    if (v.size() != 4) throw TrackFormatError(where + ": expected 4 columns");
    l.emplace_back(v[0], v[1]);
    r.emplace_back(v[2], v[3]);
  }
  try {
    if (closed && l.size() >= 2) {
      // Snap the closing row so stations wrap exactly.
      if ((l.front() - l.back()).norm() > 1e-6 || (r.front() - r.back()).norm() > 1e-6) {
        throw std::invalid_argument("closed track does not close: first and last rows differ");
      }
      l.back() = l.front();
      r.back() = r.front();
    }
    return RoadBoundary::from_sides(std::move(l), std::move(r), closed);
  } catch (const std::invalid_argument& e) {
    throw TrackFormatError(origin + ": " + e.what());
  }
}

/// Resamples both boundaries at uniform centerline arc length. Closed roads
/// get a spacing that divides the length exactly.
inline RoadBoundary resample_road(const RoadBoundary& road, double spacing = 2.0) {
  if (!(spacing > 0.0)) throw std::invalid_argument("resample_road: spacing must be positive");
  const double L = road.length();
  int n = static_cast<int>(std::floor(L / spacing + 1e-9));
  double h = spacing;
  if (road.closed) {
    n = std::max(3, static_cast<int>(std::lround(L / spacing)));
    h = L / n;
  }
  std::vector<geometry::Point> l;
  std::vector<geometry::Point> r;
  for (int k = 0; k <= n; ++k) {
    const auto [a, b] = road.cross_section(road.closed && k == n ? 0.0 : k * h);
    l.push_back(a);
    r.push_back(b);
  }
  if (!road.closed && L - n * h > 1e-9) {
    l.push_back(road.left.back());
    r.push_back(road.right.back());
  }
  return RoadBoundary::from_sides(std::move(l), std::move(r), road.closed);
}

inline RoadBoundary load_track(const std::string& path, bool closed = false, double spacing = 2.0) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw TrackFormatError("cannot open track file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  RoadBoundary raw = road_from_csv(ss.str(), closed, path);
  return spacing > 0.0 ? resample_road(raw, spacing) : raw;
}

}  // namespace envmpc
