#pragma once

// SVG plots of a run: track boundaries, the speed-colored plant path, the
// envelope block outlines and a g-g diagram with both axle friction circles.

#include "envmpc/sim/run.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace envmpc {

struct SvgOptions {
  double map_width = 800.0;  ///< [px]
  double margin = 20.0;      ///< [px]
  bool show_blocks = true;
  bool show_obstacle = true;
  bool show_gg = true;
  double gg_size = 320.0;  ///< [px] side of the g-g panel
};

namespace detail {

inline std::string fmt_num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

// Blue through green to red for t in [0, 1].
inline std::string speed_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const std::array<std::array<double, 3>, 3> stops{{{40, 70, 220}, {40, 190, 80}, {220, 40, 40}}};
  const double u = t * 2.0;
  const int i = std::min(1, static_cast<int>(u));
  const double f = u - i;
  char b[16];
  std::snprintf(b, sizeof b, "#%02x%02x%02x", static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return b;
}

inline std::vector<geometry::Point> superellipse_outline(const EnvelopeBlock& b, int n = 72) {
  std::vector<geometry::Point> out;
  const double c = std::cos(b.psib);
  const double s = std::sin(b.psib);
  const double e = 2.0 / b.p;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    const double u = b.Lb * std::copysign(std::pow(std::abs(ca), e), ca);
    const double v = b.Wb * std::copysign(std::pow(std::abs(sa), e), sa);
    out.emplace_back(b.xb + c * u - s * v, b.yb + s * u + c * v);
  }
  return out;
}

class MapFrame {
 public:
  MapFrame(double xmin, double xmax, double ymin, double ymax, double width, double margin)
      : xmin_(xmin), ymax_(ymax), margin_(margin) {
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-6});
    scale_ = (width - 2.0 * margin) / std::max(xmax - xmin, 1e-6);
    if (!(scale_ * (ymax - ymin) <= 4.0 * width)) scale_ = (width - 2.0 * margin) / span;
    height_ = (ymax - ymin) * scale_ + 2.0 * margin;
  }
  double x(double wx) const { return margin_ + (wx - xmin_) * scale_; }
  double y(double wy) const { return margin_ + (ymax_ - wy) * scale_; }
  double height() const { return height_; }

  std::string points(const std::vector<geometry::Point>& pts, bool close) const {
    std::string s;
    for (const geometry::Point& p : pts) s += fmt_num(x(p.x())) + "," + fmt_num(y(p.y())) + " ";
    if (close && !pts.empty()) s += fmt_num(x(pts.front().x())) + "," + fmt_num(y(pts.front().y()));
    return s;
  }

 private:
  double xmin_;
  double ymax_;
  double margin_;
  double scale_ = 1.0;
  double height_ = 0.0;
};

inline std::string polyline(const MapFrame& f, const std::vector<geometry::Point>& pts, bool close,
                            const std::string& cls, const std::string& style) {
  return "<polyline class=\"" + cls + "\" points=\"" + f.points(pts, close) + "\" " + style + "/>\n";
}

inline std::vector<geometry::Point> obstacle_outline(const geometry::ArcPath& c, const Obstacle& o) {
  std::vector<geometry::Point> out;
  auto side = [&](double lateral, bool forward) {
    const int n = 8;
    for (int i = 0; i <= n; ++i) {
      const double s = forward ? o.s_begin + (o.s_end - o.s_begin) * i / n : o.s_end - (o.s_end - o.s_begin) * i / n;
      const double th = c.heading_at(s);
      out.push_back(c.point_at(s) + lateral * geometry::Point(-std::sin(th), std::cos(th)));
    }
  };
  side(o.lateral_min, true);
  side(o.lateral_max, false);
  return out;
}

}  // namespace detail

/// Track, path and envelope. A record without ticks renders the track
/// boundaries (and blocks when enabled) only.
inline std::string render_svg(const RunRecord& rec, const SvgOptions& opt = {}) {
  using detail::fmt_num;
  const RoadBoundary& road = rec.road;
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  auto grow = [&](const geometry::Point& p) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  };
  for (const auto& p : road.left) grow(p);
  for (const auto& p : road.right) grow(p);
  for (const TickRecord& t : rec.ticks) grow({t.state.x, t.state.y});
  grow({rec.final_state.x, rec.final_state.y});
  if (!std::isfinite(xmin)) xmin = xmax = ymin = ymax = 0.0;
  const detail::MapFrame f(xmin, xmax, ymin, ymax, opt.map_width, opt.margin);

  const bool gg = opt.show_gg;
  const double legend_h = 50.0;
  const double width = opt.map_width + (gg ? opt.gg_size + opt.margin : 0.0);
  const double height = std::max(f.height(), gg ? opt.gg_size + 2.0 * opt.margin : 0.0) + legend_h;

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_num(width) + "\" height=\"" + fmt_num(height) +
       "\" viewBox=\"0 0 " + fmt_num(width) + " " + fmt_num(height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  s += "<g id=\"track\">\n";
  s += detail::polyline(f, road.left, road.closed, "boundary", "fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"");
  s += detail::polyline(f, road.right, road.closed, "boundary", "fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"");
  s += "</g>\n";

  if (opt.show_blocks && !rec.blocks.empty()) {
    s += "<g id=\"blocks\">\n";
    for (const EnvelopeBlock& b : rec.blocks) {
      s += "<polygon class=\"block\" points=\"" + f.points(detail::superellipse_outline(b), false) +
           "\" fill=\"#4060c0\" fill-opacity=\"0.06\" stroke=\"#4060c0\" stroke-width=\"0.6\"/>\n";
    }
    s += "</g>\n";
  }

  if (opt.show_obstacle && rec.obstacle) {
    const geometry::ArcPath c = road.centerline_path();
    s += "<polygon id=\"obstacle\" points=\"" + f.points(detail::obstacle_outline(c, *rec.obstacle), false) +
         "\" fill=\"#d03030\" fill-opacity=\"0.5\" stroke=\"#d03030\"/>\n";
  }

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  std::vector<geometry::Point> pts;
  std::vector<double> speeds;
  for (const TickRecord& t : rec.ticks) {
    pts.emplace_back(t.state.x, t.state.y);
    speeds.push_back(std::hypot(t.state.ux, t.state.v));
  }
  if (!rec.ticks.empty()) {
    pts.emplace_back(rec.final_state.x, rec.final_state.y);
    speeds.push_back(std::hypot(rec.final_state.ux, rec.final_state.v));
  }
  for (double v : speeds) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const bool constant = !(vmax - vmin > 1e-9);
  auto color_of = [&](double v) { return detail::speed_color(constant ? 0.5 : (v - vmin) / (vmax - vmin)); };
  if (pts.size() >= 2) {
    s += "<g id=\"path\" fill=\"none\" stroke-width=\"2.5\" stroke-linecap=\"round\">\n";
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      s += "<line class=\"path\" x1=\"" + fmt_num(f.x(pts[i].x())) + "\" y1=\"" + fmt_num(f.y(pts[i].y())) +
           "\" x2=\"" + fmt_num(f.x(pts[i + 1].x())) + "\" y2=\"" + fmt_num(f.y(pts[i + 1].y())) + "\" stroke=\"" +
           color_of(0.5 * (speeds[i] + speeds[i + 1])) + "\"/>\n";
    }
    s += "</g>\n";

    const double ly = height - legend_h + 15.0;
    s += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    const int n = constant ? 1 : 20;
    const double w = 200.0 / n;
    for (int i = 0; i < n; ++i) {
      s += "<rect x=\"" + fmt_num(opt.margin + i * w) + "\" y=\"" + fmt_num(ly) + "\" width=\"" + fmt_num(w + 0.5) +
           "\" height=\"10\" fill=\"" + detail::speed_color(constant ? 0.5 : (i + 0.5) / n) + "\"/>\n";
    }
    s += "<text x=\"" + fmt_num(opt.margin) + "\" y=\"" + fmt_num(ly + 24) + "\">" + fmt_num(vmin) + " m/s</text>\n";
    s += "<text x=\"" + fmt_num(opt.margin + 200.0) + "\" y=\"" + fmt_num(ly + 24) + "\" text-anchor=\"end\">" +
         fmt_num(vmax) + " m/s</text>\n";
    s += "</g>\n";
  }

  if (gg) {
    const double x0 = opt.map_width + opt.margin;
    const double cx = x0 + 0.5 * opt.gg_size;
    const double cy = opt.margin + 0.5 * opt.gg_size;
    const double rf = rec.mu_f * rec.g;
    const double rr = rec.mu_r * rec.g;
    double amax = std::max(rf, rr);
    for (const TickRecord& t : rec.ticks) amax = std::max(amax, std::hypot(t.long_accel, t.lat_accel));
    const double k = 0.45 * opt.gg_size / std::max(amax, 1e-6);
    s += "<g id=\"gg\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect x=\"" + fmt_num(x0) + "\" y=\"" + fmt_num(opt.margin) + "\" width=\"" + fmt_num(opt.gg_size) +
         "\" height=\"" + fmt_num(opt.gg_size) + "\" fill=\"none\" stroke=\"#999\"/>\n";
    s += "<line x1=\"" + fmt_num(x0) + "\" y1=\"" + fmt_num(cy) + "\" x2=\"" + fmt_num(x0 + opt.gg_size) + "\" y2=\"" +
         fmt_num(cy) + "\" stroke=\"#ccc\"/>\n";
    s += "<line x1=\"" + fmt_num(cx) + "\" y1=\"" + fmt_num(opt.margin) + "\" x2=\"" + fmt_num(cx) + "\" y2=\"" +
         fmt_num(opt.margin + opt.gg_size) + "\" stroke=\"#ccc\"/>\n";
    s += "<circle class=\"friction-front\" cx=\"" + fmt_num(cx) + "\" cy=\"" + fmt_num(cy) + "\" r=\"" +
         fmt_num(rf * k) + "\" data-radius=\"" + fmt_num(rf) +
         "\" fill=\"none\" stroke=\"#d03030\" stroke-dasharray=\"6 4\"/>\n";
    s += "<circle class=\"friction-rear\" cx=\"" + fmt_num(cx) + "\" cy=\"" + fmt_num(cy) + "\" r=\"" +
         fmt_num(rr * k) + "\" data-radius=\"" + fmt_num(rr) +
         "\" fill=\"none\" stroke=\"#3050d0\" stroke-dasharray=\"6 4\"/>\n";
    for (const TickRecord& t : rec.ticks) {
      s += "<circle class=\"gg\" cx=\"" + fmt_num(cx + t.lat_accel * k) + "\" cy=\"" + fmt_num(cy - t.long_accel * k) +
           "\" r=\"1.5\" fill=\"#333\"/>\n";
    }
    s += "<text x=\"" + fmt_num(x0 + 4) + "\" y=\"" + fmt_num(opt.margin + 14) + "\">g-g [m/s^2]: lateral / longitudinal</text>\n";
    s += "<text x=\"" + fmt_num(x0 + 4) + "\" y=\"" + fmt_num(opt.margin + opt.gg_size - 20) +
         "\" fill=\"#d03030\">mu_f g = " + fmt_num(rf) + "</text>\n";
    s += "<text x=\"" + fmt_num(x0 + 4) + "\" y=\"" + fmt_num(opt.margin + opt.gg_size - 6) +
         "\" fill=\"#3050d0\">mu_r g = " + fmt_num(rr) + "</text>\n";
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

/// Boundaries of a road on their own.
inline std::string render_track_svg(const RoadBoundary& road, const SvgOptions& opt = {}) {
  RunRecord rec;
  rec.road = road;
  SvgOptions o = opt;
  o.show_gg = false;
  return render_svg(rec, o);
}

}  // namespace envmpc
