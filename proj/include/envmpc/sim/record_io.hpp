#pragma once

// Run outputs: record.json (deterministic, no wall-clock fields),
// series.csv, telemetry.jsonl (one line per tick, with solve times) and
// timing.json (solve-time statistics).

#include "envmpc/envelope/envelope_io.hpp"
#include "envmpc/sim/run.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace envmpc {

using Json = nlohmann::ordered_json;

class RecordFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json state_json(const VehicleState& s) {
  return {{"x", s.x}, {"y", s.y}, {"v", s.v}, {"r", s.r}, {"psi", s.psi}, {"ux", s.ux}, {"delta_f", s.delta_f},
          {"ax", s.ax}};
}

inline VehicleState state_from_json(const Json& j) {
  VehicleState s;
  s.x = j.at("x");
  s.y = j.at("y");
  s.v = j.at("v");
  s.r = j.at("r");
  s.psi = j.at("psi");
  s.ux = j.at("ux");
  s.delta_f = j.at("delta_f");
  s.ax = j.at("ax");
  return s;
}

inline SolveStatus parse_status(const std::string& s) {
  for (SolveStatus v : {SolveStatus::converged, SolveStatus::max_iter, SolveStatus::timeout, SolveStatus::infeasible}) {
    if (s == to_string(v)) return v;
  }
  throw RecordFormatError("unknown solve status `" + s + "`");
}

}  // namespace detail

inline Json metrics_json(const RunMetrics& m) {
  return {
      {"completed", m.completed},
      {"finish_time", m.finish_time ? Json(*m.finish_time) : Json(nullptr)},
      {"min_speed", detail::finite_or_null(m.min_speed)},
      {"max_speed", m.max_speed},
      {"max_total_accel", m.max_total_accel},
      {"max_membership", detail::finite_or_null(m.max_membership)},
      {"violations", m.violations},
      {"obstacle_hits", m.obstacle_hits},
      {"samples", m.samples},
      {"ticks", m.ticks},
      {"solves", m.solves},
      {"fallbacks", m.fallbacks},
      {"timeouts", m.timeouts},
      {"injected_timeouts", m.injected},
      {"safe_stop", m.safe_stop},
      {"mean_iterations", m.mean_iterations},
  };
}

inline Json record_to_json(const RunRecord& rec) {
  Json j;
  j["scenario"] = rec.scenario;
  j["status"] = rec.status;
  j["message"] = rec.message;
  j["termination"] = to_string(rec.termination);
  j["period"] = rec.period;
  j["mu_f"] = rec.mu_f;
  j["mu_r"] = rec.mu_r;
  j["g"] = rec.g;
  j["finish_time"] = rec.finish_time ? Json(*rec.finish_time) : Json(nullptr);
  j["final_time"] = rec.final_time;
  j["final_state"] = detail::state_json(rec.final_state);
  j["metrics"] = metrics_json(rec.metrics);
  j["epsilon0"] = rec.epsilon0;
  if (rec.obstacle) {
    const Obstacle& o = *rec.obstacle;
    j["obstacle"] = {{"s_begin", o.s_begin}, {"s_end", o.s_end}, {"lateral_min", o.lateral_min},
                     {"lateral_max", o.lateral_max}};
  } else {
    j["obstacle"] = nullptr;
  }
  Json blocks = Json::array();
  for (const EnvelopeBlock& b : rec.blocks) blocks.push_back({b.xb, b.yb, b.psib, b.Lb, b.Wb, b.p});
  j["blocks"] = blocks;
  Json left = Json::array();
  Json right = Json::array();
  for (std::size_t i = 0; i < rec.road.size(); ++i) {
    left.push_back({rec.road.left[i].x(), rec.road.left[i].y()});
    right.push_back({rec.road.right[i].x(), rec.road.right[i].y()});
  }
  j["road"] = {{"closed", rec.road.closed}, {"left", left}, {"right", right}};

  Json s;
  auto col = [&](const char* name, auto get) {
    Json a = Json::array();
    for (const TickRecord& t : rec.ticks) a.push_back(get(t));
    s[name] = std::move(a);
  };
  col("t", [](const TickRecord& t) { return t.t; });
  col("x", [](const TickRecord& t) { return t.state.x; });
  col("y", [](const TickRecord& t) { return t.state.y; });
  col("v", [](const TickRecord& t) { return t.state.v; });
  col("r", [](const TickRecord& t) { return t.state.r; });
  col("psi", [](const TickRecord& t) { return t.state.psi; });
  col("ux", [](const TickRecord& t) { return t.state.ux; });
  col("delta_f", [](const TickRecord& t) { return t.state.delta_f; });
  col("ax", [](const TickRecord& t) { return t.state.ax; });
  col("delta_f_rate", [](const TickRecord& t) { return t.control.delta_f_rate; });
  col("jx", [](const TickRecord& t) { return t.control.jx; });
  col("applied_at", [](const TickRecord& t) { return t.applied_at; });
  col("station", [](const TickRecord& t) { return t.station; });
  col("long_accel", [](const TickRecord& t) { return t.long_accel; });
  col("lat_accel", [](const TickRecord& t) { return t.lat_accel; });
  col("solved", [](const TickRecord& t) { return t.solved; });
  col("status", [](const TickRecord& t) { return std::string(t.solved ? to_string(t.status) : "none"); });
  col("iterations", [](const TickRecord& t) { return t.iterations; });
  col("kkt", [](const TickRecord& t) { return t.kkt; });
  col("objective", [](const TickRecord& t) { return t.objective; });
  col("cost_state", [](const TickRecord& t) { return t.breakdown.state; });
  col("cost_control", [](const TickRecord& t) { return t.breakdown.control; });
  col("cost_envelope", [](const TickRecord& t) { return t.breakdown.envelope; });
  col("cost_specific", [](const TickRecord& t) { return t.breakdown.specific; });
  col("warm", [](const TickRecord& t) { return t.warm; });
  col("fallback", [](const TickRecord& t) { return t.fallback; });
  col("safe_stop", [](const TickRecord& t) { return t.safe_stop; });
  col("injected", [](const TickRecord& t) { return t.injected; });
  col("samples", [](const TickRecord& t) { return t.samples; });
  col("max_membership", [](const TickRecord& t) { return detail::finite_or_null(t.max_membership); });
  col("violations", [](const TickRecord& t) { return t.violations; });
  col("max_total_accel", [](const TickRecord& t) { return t.max_total_accel; });
  col("min_speed", [](const TickRecord& t) { return detail::finite_or_null(t.min_speed); });
  col("max_speed", [](const TickRecord& t) { return t.max_speed; });
  col("obstacle_hits", [](const TickRecord& t) { return t.obstacle_hits; });
  j["series"] = std::move(s);
  return j;
}

inline RunRecord record_from_json(const Json& j) {
  try {
    RunRecord rec;
    rec.scenario = j.at("scenario");
    rec.status = j.at("status");
    rec.message = j.value("message", "");
    rec.termination = parse_termination(j.at("termination"));
    rec.period = j.at("period");
    rec.mu_f = j.at("mu_f");
    rec.mu_r = j.at("mu_r");
    rec.g = j.at("g");
    if (!j.at("finish_time").is_null()) rec.finish_time = j["finish_time"].get<double>();
    rec.final_time = j.at("final_time");
    rec.final_state = detail::state_from_json(j.at("final_state"));
    rec.epsilon0 = j.at("epsilon0");
    if (!j.at("obstacle").is_null()) {
      const Json& o = j["obstacle"];
      rec.obstacle = Obstacle{o.at("s_begin"), o.at("s_end"), o.at("lateral_min"), o.at("lateral_max")};
    }
    for (const Json& b : j.at("blocks")) {
      EnvelopeBlock e;
      e.xb = b.at(0);
      e.yb = b.at(1);
      e.psib = b.at(2);
      e.Lb = b.at(3);
      e.Wb = b.at(4);
      e.p = b.at(5);
      rec.blocks.push_back(e);
    }
    const Json& road = j.at("road");
    std::vector<geometry::Point> left;
    std::vector<geometry::Point> right;
    for (const Json& p : road.at("left")) left.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    for (const Json& p : road.at("right")) right.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    if (left.size() >= 2) rec.road = RoadBoundary::from_sides(std::move(left), std::move(right), road.at("closed"));

    const Json& s = j.at("series");
    const std::size_t n = s.at("t").size();
    for (const auto& [name, column] : s.items()) {
      if (column.size() != n) throw RecordFormatError("series column `" + name + "` has inconsistent length");
    }
    rec.ticks.resize(n);
    const double inf = std::numeric_limits<double>::infinity();
    auto num = [&](const char* name, std::size_t i, double fallback) {
      const Json& v = s.at(name).at(i);
      return v.is_null() ? fallback : v.get<double>();
    };
    for (std::size_t i = 0; i < n; ++i) {
      TickRecord& t = rec.ticks[i];
      t.t = s["t"][i];
      t.state.x = s["x"][i];
      t.state.y = s["y"][i];
      t.state.v = s["v"][i];
      t.state.r = s["r"][i];
      t.state.psi = s["psi"][i];
      t.state.ux = s["ux"][i];
      t.state.delta_f = s["delta_f"][i];
      t.state.ax = s["ax"][i];
      t.control.delta_f_rate = s["delta_f_rate"][i];
      t.control.jx = s["jx"][i];
      t.applied_at = s["applied_at"][i];
      t.station = s["station"][i];
      t.long_accel = s["long_accel"][i];
      t.lat_accel = s["lat_accel"][i];
      t.solved = s["solved"][i];
      if (t.solved) t.status = detail::parse_status(s["status"][i]);
      t.iterations = s["iterations"][i];
      t.kkt = s["kkt"][i];
      t.objective = s["objective"][i];
      t.breakdown = {s["cost_state"][i], s["cost_control"][i], s["cost_envelope"][i], s["cost_specific"][i]};
      t.warm = s["warm"][i];
      t.fallback = s["fallback"][i];
      t.safe_stop = s["safe_stop"][i];
      t.injected = s["injected"][i];
      t.samples = s["samples"][i];
      t.max_membership = num("max_membership", i, -inf);
      t.violations = s["violations"][i];
      t.max_total_accel = s["max_total_accel"][i];
      t.min_speed = num("min_speed", i, inf);
      t.max_speed = s["max_speed"][i];
      t.obstacle_hits = s["obstacle_hits"][i];
    }
    rec.metrics = compute_metrics(rec);
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw RecordFormatError(std::string("malformed run record: ") + e.what());
  }
}

inline RunRecord load_record(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw RecordFormatError("cannot open run record: " + path);
  try {
    return record_from_json(Json::parse(f));
  } catch (const nlohmann::json::parse_error& e) {
    throw RecordFormatError(path + ": " + e.what());
  }
}

/// The tick series as CSV; columns are listed in the README.
inline std::string series_csv(const RunRecord& rec) {
  std::ostringstream out;
  out << "t,x,y,psi,ux,v,r,delta_f,ax,delta_f_rate,jx,applied_at,station,long_accel,lat_accel,status,iterations,"
         "fallback,safe_stop,injected,max_membership,violations,max_total_accel,min_speed,max_speed,obstacle_hits\n";
  auto f = detail::format_double;
  for (const TickRecord& t : rec.ticks) {
    const VehicleState& s = t.state;
    out << f(t.t) << ',' << f(s.x) << ',' << f(s.y) << ',' << f(s.psi) << ',' << f(s.ux) << ',' << f(s.v) << ','
        << f(s.r) << ',' << f(s.delta_f) << ',' << f(s.ax) << ',' << f(t.control.delta_f_rate) << ','
        << f(t.control.jx) << ',' << f(t.applied_at) << ',' << f(t.station) << ',' << f(t.long_accel) << ','
        << f(t.lat_accel) << ',' << (t.solved ? to_string(t.status) : "none") << ',' << t.iterations << ','
        << t.fallback << ',' << t.safe_stop << ',' << t.injected << ',' << f(t.max_membership) << ','
        << t.violations << ',' << f(t.max_total_accel) << ',' << f(t.min_speed) << ',' << f(t.max_speed) << ','
        << t.obstacle_hits << '\n';
  }
  return out.str();
}

inline Json telemetry_line(std::size_t k, const TickRecord& t) {
  return {{"k", k},
          {"t", t.t},
          {"solved", t.solved},
          {"status", t.solved ? to_string(t.status) : "none"},
          {"iterations", t.iterations},
          {"solve_ms", t.solve_ms},
          {"kkt", t.kkt},
          {"objective", t.objective},
          {"warm", t.warm},
          {"fallback", t.fallback},
          {"safe_stop", t.safe_stop},
          {"injected", t.injected}};
}

inline std::string telemetry_jsonl(const RunRecord& rec) {
  std::string out;
  for (std::size_t k = 0; k < rec.ticks.size(); ++k) out += telemetry_line(k, rec.ticks[k]).dump() + "\n";
  return out;
}

struct SolveTimeStats {
  int solves = 0;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;  ///< sample standard deviation
  double median_ms = 0.0;
  double max_ms = 0.0;
  int over_budget = 0;  ///< solves slower than the budget or stopped by it
  double timeout_fraction = 0.0;
};

/// Statistics over ticks that ran a real solve; injected timeouts are left out.
inline SolveTimeStats solve_time_stats(const std::vector<double>& ms, const std::vector<bool>& timed_out,
                                       double budget_ms = 100.0) {
  SolveTimeStats st;
  st.solves = static_cast<int>(ms.size());
  if (ms.empty()) return st;
  double sum = 0.0;
  for (double v : ms) sum += v;
  st.mean_ms = sum / st.solves;
  double ss = 0.0;
  for (double v : ms) ss += (v - st.mean_ms) * (v - st.mean_ms);
  st.stddev_ms = st.solves > 1 ? std::sqrt(ss / (st.solves - 1)) : 0.0;
  std::vector<double> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = sorted.size() / 2;
  st.median_ms = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  st.max_ms = sorted.back();
  for (std::size_t i = 0; i < ms.size(); ++i) st.over_budget += (ms[i] > budget_ms || timed_out[i]) ? 1 : 0;
  st.timeout_fraction = static_cast<double>(st.over_budget) / st.solves;
  return st;
}

inline SolveTimeStats solve_time_stats(const RunRecord& rec, double budget_ms = 100.0) {
  std::vector<double> ms;
  std::vector<bool> to;
  for (const TickRecord& t : rec.ticks) {
    if (!t.solved || t.injected) continue;
    ms.push_back(t.solve_ms);
    to.push_back(t.status == SolveStatus::timeout);
  }
  return solve_time_stats(ms, to, budget_ms);
}

/// Same statistics re-aggregated from a telemetry stream.
inline SolveTimeStats solve_time_stats_from_telemetry(const std::string& jsonl, double budget_ms = 100.0) {
  std::vector<double> ms;
  std::vector<bool> to;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    if (!j.at("solved").get<bool>() || j.at("injected").get<bool>()) continue;
    ms.push_back(j.at("solve_ms"));
    to.push_back(j.at("status") == "timeout");
  }
  return solve_time_stats(ms, to, budget_ms);
}

inline Json timing_json(const SolveTimeStats& s) {
  return {{"solves", s.solves},           {"mean_ms", s.mean_ms},         {"stddev_ms", s.stddev_ms},
          {"median_ms", s.median_ms},     {"max_ms", s.max_ms},           {"over_budget", s.over_budget},
          {"timeout_fraction", s.timeout_fraction}};
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace detail

/// Writes record.json, series.csv, telemetry.jsonl and timing.json.
inline void write_run_outputs(const RunRecord& rec, const std::filesystem::path& dir, double budget_ms = 100.0) {
  std::filesystem::create_directories(dir);
  detail::write_text(dir / "record.json", record_to_json(rec).dump(1) + "\n");
  detail::write_text(dir / "series.csv", series_csv(rec));
  detail::write_text(dir / "telemetry.jsonl", telemetry_jsonl(rec));
  detail::write_text(dir / "timing.json", timing_json(solve_time_stats(rec, budget_ms)).dump(1) + "\n");
}

}  // namespace envmpc
