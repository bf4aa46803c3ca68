#include "envmpc/sim/summary.hpp"
#include "envmpc/sim/svg.hpp"
#include "envmpc/sim/tracks.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace envmpc;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("envmpc");
  logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* lvl = std::getenv("ENVMPC_LOG_LEVEL")) {
    const auto level = spdlog::level::from_str(lvl);
    if (level == spdlog::level::off && std::string(lvl) != "off") {
      spdlog::warn("unknown ENVMPC_LOG_LEVEL `{}`, keeping info", lvl);
    } else {
      spdlog::set_level(level);
    }
  }
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  detail::write_text(p, text);
}

int cmd_simulate(const std::string& scenario_path, const std::string& out, std::optional<std::uint64_t> seed,
                 bool strict, bool svg) {
  const Scenario sc = Scenario::load(scenario_path);
  spdlog::info("scenario {} ({}), termination {}, max {:.1f} s", sc.name, scenario_path, to_string(sc.termination),
               sc.max_time);
  RunOptions opt;
  opt.realtime_strict = strict;
  opt.seed = seed;
  opt.on_tick = [](const TickRecord& t) {
    if (t.fallback) {
      spdlog::warn("t={:.1f} s solve {} after {} iterations, fallback{}", t.t, to_string(t.status), t.iterations,
                   t.safe_stop ? " (safe stop)" : "");
    }
    spdlog::debug("t={:.1f} s station {:.1f} m ux {:.2f} m/s status {} it {} {:.1f} ms g_max {:.3f}", t.t,
                  t.station, t.state.ux, t.solved ? to_string(t.status) : "-", t.iterations, t.solve_ms,
                  t.max_membership);
  };
  const RunRecord rec = run_scenario(sc, opt);
  write_run_outputs(rec, out);
  if (svg) write_file(fs::path(out) / "path.svg", render_svg(rec));
  const SolveTimeStats st = solve_time_stats(rec);
  const RunMetrics& m = rec.metrics;
  spdlog::info("status {}{}{}", rec.status, rec.message.empty() ? "" : ": ", rec.message);
  if (rec.finish_time) spdlog::info("finish time {:.2f} s", *rec.finish_time);
  spdlog::info("speed {:.2f}-{:.2f} m/s, max accel {:.2f} m/s^2 (mu_r g {:.2f}), violations {}, obstacle hits {}",
               m.min_speed, m.max_speed, m.max_total_accel, rec.mu_r * rec.g, m.violations, m.obstacle_hits);
  spdlog::info("{} solves: {:.1f} +- {:.1f} ms, median {:.1f} ms, timeout fraction {:.3f}, fallbacks {}", st.solves,
               st.mean_ms, st.stddev_ms, st.median_ms, st.timeout_fraction, m.fallbacks);
  spdlog::info("outputs in {}", out);
  return rec.status == "completed" ? 0 : 3;
}

int cmd_plan(const std::string& road_path, bool closed, std::optional<std::uint64_t> gen_seed,
             const RoadGeneratorSpec& g, double max_length, const std::string& out, const std::string& road_out,
             const std::string& svg_out) {
  RoadBoundary road;
  if (gen_seed) {
    road = generate_road(*gen_seed, g.stations, {g.width_min, g.width_max}, g.curvature_scale);
    spdlog::info("generated road seed {} with {} stations, length {:.1f} m", *gen_seed, road.size(), road.length());
  } else {
    road = load_track(road_path, closed);
    spdlog::info("loaded road {} with {} stations, length {:.1f} m", road_path, road.size(), road.length());
  }
  PlannerOptions po;
  if (max_length > 0.0) po.optimizer.max_length = max_length;
  const PlannedEnvelope pe = plan_envelope(road, po);
  int improved = 0;
  for (const PlannedBlock& b : pe.blocks) improved += b.status == BlockStatus::improved ? 1 : 0;
  spdlog::info("{} blocks ({} improved), epsilon0 {:.6f}, {} evaluations, {:.1f} ms", pe.blocks.size(), improved,
               pe.envelope.epsilon0(), pe.evaluations, pe.design_ms);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  save_envelope(pe.envelope, out);
  if (!road_out.empty()) {
    if (fs::path(road_out).has_parent_path()) fs::create_directories(fs::path(road_out).parent_path());
    save_road(road, road_out);
  }
  if (!svg_out.empty()) {
    RunRecord rec;
    rec.road = road;
    rec.blocks = pe.envelope.blocks();
    SvgOptions so;
    so.show_gg = false;
    write_file(svg_out, render_svg(rec, so));
  }
  spdlog::info("envelope written to {}", out);
  return 0;
}

int cmd_summarize(const std::string& dir, const std::string& json_out, double budget) {
  const std::vector<SummaryRow> rows = summarize_directory(dir, budget);
  if (rows.empty()) {
    spdlog::error("no record.json found under {}", dir);
    return 1;
  }
  std::cout << summary_table(rows);
  const fs::path out = json_out.empty() ? fs::path(dir) / "summary.json" : fs::path(json_out);
  write_file(out, summary_json(rows).dump(1) + "\n");
  spdlog::info("{} runs summarized, JSON in {}", rows.size(), out.string());
  return 0;
}

int cmd_render(const std::string& record, const std::string& out, bool blocks, bool gg) {
  fs::path p = record;
  if (fs::is_directory(p)) p /= "record.json";
  const RunRecord rec = load_record(p.string());
  SvgOptions so;
  so.show_blocks = blocks;
  so.show_gg = gg;
  write_file(out, render_svg(rec, so));
  spdlog::info("rendered {} ({} ticks) to {}", p.string(), rec.ticks.size(), out);
  return 0;
}

int cmd_make_tracks(const std::string& dir) {
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, RoadBoundary>> tracks{
      {"oval.csv", tracks::oval()},
      {"circuit.csv", tracks::circuit()},
      {"cis_highway.csv", tracks::cis_highway()},
      {"trail.csv", tracks::trail()},
  };
  for (const auto& [name, road] : tracks) {
    save_road(road, (fs::path(dir) / name).string());
    spdlog::info("{}: {} stations, {:.2f} m", name, road.size(), road.length());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Envelope-constrained MPC: simulation, envelope planning and reporting"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run a scenario in closed loop");
  std::string scenario;
  std::string out;
  std::uint64_t seed = 0;
  bool strict = false;
  bool no_svg = false;
  sim->add_option("--scenario", scenario, "scenario config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "output directory")->required();
  auto* seed_opt = sim->add_option("--seed", seed, "overrides sim.seed");
  sim->add_flag("--realtime-strict", strict, "enforce the solve budget and delay controls by the solve time");
  sim->add_flag("--no-svg", no_svg, "skip path.svg");

  auto* plan = app.add_subcommand("plan-envelope", "plan a block envelope along a road");
  std::string road;
  bool closed = false;
  std::uint64_t gen_seed = 0;
  RoadGeneratorSpec g;
  double max_length = 0.0;
  std::string env_out;
  std::string road_out;
  std::string plan_svg;
  auto* road_opt = plan->add_option("--road", road, "boundary CSV")->check(CLI::ExistingFile);
  plan->add_flag("--closed", closed, "the road is a closed loop");
  auto* gen_opt = plan->add_option("--generate", gen_seed, "generate a road from this seed");
  road_opt->excludes(gen_opt);
  plan->add_option("--stations", g.stations, "generated road stations")->capture_default_str();
  plan->add_option("--width-min", g.width_min, "generated road minimum half width [m]")->capture_default_str();
  plan->add_option("--width-max", g.width_max, "generated road maximum half width [m]")->capture_default_str();
  plan->add_option("--curvature", g.curvature_scale, "generated road curvature scale")->capture_default_str();
  plan->add_option("--max-length", max_length, "cap on block half length [m]");
  plan->add_option("--out", env_out, "envelope file")->required();
  plan->add_option("--road-out", road_out, "also write the road CSV");
  plan->add_option("--svg", plan_svg, "also render road and blocks");

  auto* sum = app.add_subcommand("summarize", "tabulate all runs under a directory");
  std::string sum_dir;
  std::string sum_json;
  double budget = 100.0;
  sum->add_option("dir", sum_dir, "directory with run outputs")->required()->check(CLI::ExistingDirectory);
  sum->add_option("--json", sum_json, "JSON output (default <dir>/summary.json)");
  sum->add_option("--budget-ms", budget, "solve budget for the timeout fraction")->capture_default_str();

  auto* ren = app.add_subcommand("render", "render a run record as SVG");
  std::string record;
  std::string svg_out;
  bool no_blocks = false;
  bool no_gg = false;
  ren->add_option("record", record, "record.json or its run directory")->required()->check(CLI::ExistingPath);
  ren->add_option("--out", svg_out, "SVG file")->required();
  ren->add_flag("--no-blocks", no_blocks, "hide envelope blocks");
  ren->add_flag("--no-gg", no_gg, "hide the g-g diagram");

  auto* mk = app.add_subcommand("make-tracks", "write the shipped track CSVs");
  std::string track_dir = "data/tracks";
  mk->add_option("--out", track_dir, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) {
      return cmd_simulate(scenario, out, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt, strict,
                          !no_svg);
    }
    if (*plan) {
      if (road.empty() && !*gen_opt) throw CLI::RequiredError("--road or --generate");
      return cmd_plan(road, closed, *gen_opt ? std::optional<std::uint64_t>(gen_seed) : std::nullopt, g, max_length,
                      env_out, road_out, plan_svg);
    }
    if (*sum) return cmd_summarize(sum_dir, sum_json, budget);
    if (*ren) return cmd_render(record, svg_out, !no_blocks, !no_gg);
    if (*mk) return cmd_make_tracks(track_dir);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
