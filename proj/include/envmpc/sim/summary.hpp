#pragma once

#include "envmpc/sim/record_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace envmpc {

struct SummaryRow {
  std::string scenario;
  std::string status;
  std::optional<double> finish_time;
  double final_time = 0.0;
  std::optional<SolveTimeStats> timing;  ///< absent when no telemetry was found
  double max_total_accel = 0.0;
  double accel_budget = 0.0;  ///< mu_r * g
  double front_budget = 0.0;  ///< mu_f * g
  double min_speed = 0.0;
  double max_speed = 0.0;
  long violations = 0;
  long obstacle_hits = 0;
  int fallbacks = 0;
  std::string source;  ///< directory the record came from
};

inline SummaryRow summary_row(const RunRecord& rec, const std::optional<SolveTimeStats>& timing = std::nullopt) {
  SummaryRow r;
  const RunMetrics& m = rec.metrics;
  r.scenario = rec.scenario;
  r.status = rec.status;
  r.finish_time = rec.finish_time;
  r.final_time = rec.final_time;
  r.timing = timing;
  r.max_total_accel = m.max_total_accel;
  r.accel_budget = rec.mu_r * rec.g;
  r.front_budget = rec.mu_f * rec.g;
  r.min_speed = m.min_speed;
  r.max_speed = m.max_speed;
  r.violations = m.violations;
  r.obstacle_hits = m.obstacle_hits;
  r.fallbacks = m.fallbacks;
  return r;
}

/// Run directories under `root` (itself included) holding a record.json,
/// sorted by path. Telemetry next to a record supplies its solve times.
inline std::vector<SummaryRow> summarize_directory(const std::filesystem::path& root, double budget_ms = 100.0) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
  std::vector<fs::path> records;
  if (fs::exists(root / "record.json")) records.push_back(root / "record.json");
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == "record.json" && e.path().parent_path() != root) {
      records.push_back(e.path());
    }
  }
  std::sort(records.begin(), records.end());
  std::vector<SummaryRow> rows;
  for (const fs::path& p : records) {
    const RunRecord rec = load_record(p.string());
    std::optional<SolveTimeStats> timing;
    const fs::path tel = p.parent_path() / "telemetry.jsonl";
    if (fs::exists(tel)) {
      std::ifstream in(tel);
      std::stringstream ss;
      ss << in.rdbuf();
      timing = solve_time_stats_from_telemetry(ss.str(), budget_ms);
    }
    SummaryRow row = summary_row(rec, timing);
    row.source = fs::relative(p.parent_path(), root).lexically_normal().string();
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json summary_json(const std::vector<SummaryRow>& rows) {
  Json out = Json::array();
  for (const SummaryRow& r : rows) {
    Json j;
    j["scenario"] = r.scenario;
    j["source"] = r.source;
    j["status"] = r.status;
    j["finish_time"] = r.finish_time ? Json(*r.finish_time) : Json(nullptr);
    j["final_time"] = r.final_time;
    if (r.timing) {
      j["solves"] = r.timing->solves;
      j["solve_mean_ms"] = r.timing->mean_ms;
      j["solve_stddev_ms"] = r.timing->stddev_ms;
      j["solve_median_ms"] = r.timing->median_ms;
      j["timeout_fraction"] = r.timing->timeout_fraction;
    } else {
      j["solves"] = nullptr;
      j["solve_mean_ms"] = nullptr;
      j["solve_stddev_ms"] = nullptr;
      j["solve_median_ms"] = nullptr;
      j["timeout_fraction"] = nullptr;
    }
    j["max_total_accel"] = r.max_total_accel;
    j["accel_budget"] = r.accel_budget;
    j["accel_ratio"] = r.accel_budget > 0.0 ? Json(r.max_total_accel / r.accel_budget) : Json(nullptr);
    j["min_speed"] = r.min_speed;
    j["max_speed"] = r.max_speed;
    j["violations"] = r.violations;
    j["obstacle_hits"] = r.obstacle_hits;
    j["fallbacks"] = r.fallbacks;
    out.push_back(std::move(j));
  }
  return out;
}

inline std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-18s %-10s %9s %17s %8s %15s %11s %5s %5s\n", "scenario", "status", "time [s]",
                "solve [ms]", "median", "amax / mu_r g", "speed [m/s]", "viol", "fallb");
  out += line;
  for (const SummaryRow& r : rows) {
    char t[32];
    if (r.finish_time) {
      std::snprintf(t, sizeof t, "%.2f", *r.finish_time);
    } else {
      std::snprintf(t, sizeof t, "(%.1f)", r.final_time);
    }
    char solve[48] = "-";
    char median[24] = "-";
    if (r.timing && r.timing->solves > 0) {
      std::snprintf(solve, sizeof solve, "%.1f +- %.1f", r.timing->mean_ms, r.timing->stddev_ms);
      std::snprintf(median, sizeof median, "%.1f", r.timing->median_ms);
    }
    char accel[48];
    std::snprintf(accel, sizeof accel, "%.2f / %.2f", r.max_total_accel, r.accel_budget);
    char speed[48];
    std::snprintf(speed, sizeof speed, "%.1f-%.1f", r.min_speed, r.max_speed);
    std::snprintf(line, sizeof line, "%-18s %-10s %9s %17s %8s %15s %11s %5ld %5d\n", r.scenario.c_str(),
                  r.status.c_str(), t, solve, median, accel, speed, r.violations, r.fallbacks);
    out += line;
  }
  return out;
}

}  // namespace envmpc
