#include "core/orchestrator.hpp"

#include "core/errors.hpp"
#include "core/trajectory_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace trajedit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Vec2 point_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Polyline polyline_of(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of points");
  Polyline out;
  for (const auto& p : j) out.push_back(point_of(p, where));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json point_json(const Vec2& p) { return json::array({p.x(), p.y()}); }

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("config root must be an object");

  RunConfig cfg;
  try {
    if (root.contains("scenario")) {
      fs::path sp = root.at("scenario").get<std::string>();
      if (sp.is_relative()) sp = fs::path(base_dir) / sp;
      cfg.scenario = sp.lexically_normal().string();
    }
    cfg.duration = root.value("duration", cfg.duration);
    cfg.dt = root.value("dt", cfg.dt);
    cfg.lattice_dt = root.value("dtt", cfg.lattice_dt);
    cfg.v_max = root.value("v_max", cfg.v_max);
    if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
    cfg.tolerance = root.value("tolerance", cfg.tolerance);
    cfg.output = root.value("output", cfg.output);

    if (root.contains("vehicles")) {
      std::vector<VehicleConfig> vs;
      for (const auto& v : root.at("vehicles")) {
        VehicleConfig vc;
        vc.id = v.at("id").get<VehicleId>();
        vc.lanes = v.at("path").get<std::vector<std::string>>();
        vc.s = v.value("s", 0.0);
        vc.d = v.value("d", 0.0);
        vc.speed = v.value("speed", 0.0);
        vc.desired_speed = v.value("desired_speed", 10.0);
        vs.push_back(vc);
      }
      cfg.vehicles = vs;
    }
    if (root.contains("paths")) {
      for (const auto& p : root.at("paths")) {
        PathPlanConfig pc;
        if (p.contains("vehicle")) pc.vehicle = p.at("vehicle").get<VehicleId>();
        pc.waypoints = polyline_of(p.at("waypoints"), "paths.waypoints");
        cfg.paths.push_back(pc);
      }
    }
    if (root.contains("edits")) {
      for (const auto& e : root.at("edits")) {
        Keyframe k;
        k.vehicle = e.at("vehicle").get<VehicleId>();
        k.time = e.at("time").get<double>();
        if (e.contains("point")) k.point = point_of(e.at("point"), "edits.point");
        if (e.contains("s")) k.s = e.at("s").get<double>();
        if (e.contains("speed")) k.speed = e.at("speed").get<double>();
        if (!k.point && !k.s) throw ParseError("edit for vehicle " + std::to_string(k.vehicle) + " needs point or s");
        cfg.edits.push_back(k);
      }
    }
    if (root.contains("optimizer")) {
      const auto& o = root.at("optimizer");
      cfg.iterations = o.value("iterations", cfg.iterations);
      cfg.patience = o.value("patience", cfg.patience);
      cfg.learning_rate = o.value("learning_rate", cfg.learning_rate);
      const std::string reg = o.value("regularizer", std::string("per_second"));
      if (reg == "per_second") {
        cfg.regularizer = RegularizerScale::kPerSecond;
      } else if (reg == "per_frame") {
        cfg.regularizer = RegularizerScale::kPerFrame;
      } else {
        throw ParseError("optimizer.regularizer must be per_second or per_frame");
      }
      const std::string init = o.value("init", std::string("coarse"));
      if (init == "coarse") {
        cfg.init = InitMode::kCoarseSearch;
      } else if (init == "average") {
        cfg.init = InitMode::kAverageSpeed;
      } else {
        throw ParseError("optimizer.init must be coarse or average");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }

  if (!(cfg.dt > 0.0) || !(cfg.lattice_dt > 0.0)) throw ValidationError("dt and dtt must be positive");
  if (cfg.dt > cfg.lattice_dt + 1e-12) throw ValidationError("dt must not exceed dtt");
  for (const auto& k : cfg.edits) {
    if (k.time > cfg.duration + 1e-9) {
      throw ValidationError("duration " + std::to_string(cfg.duration) + " s does not cover the keyframe at " +
                            std::to_string(k.time) + " s");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path), fs::path(path).parent_path().string());
}

World build_world(const RunConfig& cfg, bool with_paths) {
  Scenario sc = with_context("scenario", [&] { return load_scenario(cfg.scenario); });
  if (cfg.vehicles) {
    sc.vehicles.clear();
    for (const auto& v : *cfg.vehicles) sc.vehicles.push_back({v.id, v.lanes, v.s, v.d, v.speed, v.desired_speed});
  }
  World world = with_context("world", [&] { return make_world(sc, WorldOptions{cfg.dt, cfg.seed}); });
  if (with_paths) {
    with_context("path planning", [&] {
      for (const auto& p : cfg.paths) {
        PlanRequest req;
        req.waypoints = p.waypoints;
        const RefPath path = plan_user_path(world.grid, req);
        const PathId id = world.paths.register_user_path(path);
        if (p.vehicle) world.reroute(*p.vehicle, id);
      }
    });
  }
  return world;
}

EditOptions edit_options(const RunConfig& cfg) {
  EditOptions opts;
  opts.lattice.time_step = cfg.lattice_dt;
  opts.lattice.v_max = cfg.v_max;
  opts.optimizer.max_iterations = cfg.iterations;
  opts.optimizer.patience = cfg.patience;
  opts.optimizer.adam.learning_rate = cfg.learning_rate;
  opts.optimizer.weights.scale = cfg.regularizer;
  opts.optimizer.v_max = cfg.v_max;
  opts.init = cfg.init;
  opts.tolerance = cfg.tolerance;
  return opts;
}

RunSummary run(const RunConfig& cfg, bool apply_edits) {
  RunSummary summary;
  const fs::path out_dir(cfg.output);
  with_context("output", [&] { fs::create_directories(out_dir); });
  const long frames = std::lround(cfg.duration / cfg.dt);

  World original = build_world(cfg, false);
  auto t0 = Clock::now();
  World sim = original;
  const TrajectoryLog original_log = with_context("simulate", [&] { return simulate(sim, frames); });
  const double simulate_seconds = seconds_since(t0);
  write_trajectory_csv((out_dir / "original.csv").string(), original_log.rows);
  summary.files.push_back((out_dir / "original.csv").string());

  if (!apply_edits || (cfg.edits.empty() && cfg.paths.empty())) return summary;
  summary.edited = true;

  World world = build_world(cfg, true);
  // Group keyframes per vehicle in order of first appearance.
  std::vector<std::pair<VehicleId, std::vector<Keyframe>>> groups;
  for (const auto& k : cfg.edits) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == k.vehicle; });
    if (it == groups.end()) {
      groups.push_back({k.vehicle, {k}});
    } else {
      it->second.push_back(k);
    }
  }

  json metrics;
  metrics["scenario"] = cfg.scenario;
  metrics["dt"] = cfg.dt;
  metrics["dtt"] = cfg.lattice_dt;
  metrics["duration"] = cfg.duration;
  metrics["simulate_seconds"] = simulate_seconds;
  metrics["edits"] = json::array();

  const EditOptions opts = edit_options(cfg);
  for (const auto& [vid, keyframes] : groups) {
    const EditResult edit = with_context("edit vehicle " + std::to_string(vid),
                                         [&] { return edit_vehicle(world, keyframes, opts); });
    world = edit.world;
    summary.all_met = summary.all_met && edit.met;

    const std::string suffix = std::to_string(vid) + ".csv";
    {
      std::ofstream loss_out(out_dir / ("loss_" + suffix));
      write_loss_history(loss_out, edit.optimization.losses);
      std::ofstream coarse_out(out_dir / ("coarse_" + suffix));
      write_coarse_dump(coarse_out, edit.coarse_rows);
    }
    summary.files.push_back((out_dir / ("loss_" + suffix)).string());
    if (!edit.coarse_rows.empty()) summary.files.push_back((out_dir / ("coarse_" + suffix)).string());

    json e;
    e["vehicle"] = vid;
    e["met"] = edit.met;
    e["replanned"] = edit.new_path.has_value();
    e["iterations"] = edit.optimization.iterations;
    e["best_iteration"] = edit.optimization.best_iteration;
    e["best_loss"] = edit.optimization.best_loss;
    e["expansions"] = edit.expansions;
    e["search_seconds"] = edit.search_seconds;
    e["optimize_seconds"] = edit.optimize_seconds;
    e["segments_reached"] = json::array();
    for (const auto& seg : edit.segments) e["segments_reached"].push_back(seg.reached_goal);
    e["keyframes"] = json::array();
    for (const auto& r : edit.reports) {
      e["keyframes"].push_back({{"time", r.keyframe.time},
                                {"frame", r.frame},
                                {"target", point_json(r.target)},
                                {"reached", point_json(r.reached)},
                                {"error", r.error},
                                {"met", r.met},
                                {"closest_distance", r.closest_distance},
                                {"closest_time", r.closest_time}});
    }
    metrics["edits"].push_back(e);
  }

  World edited = world;
  const TrajectoryLog edited_log = with_context("simulate edited", [&] { return simulate(edited, frames); });
  write_trajectory_csv((out_dir / "edited.csv").string(), edited_log.rows);
  summary.files.push_back((out_dir / "edited.csv").string());

  metrics["all_met"] = summary.all_met;
  write_text_file((out_dir / "metrics.json").string(), metrics.dump(2) + "\n");
  summary.files.push_back((out_dir / "metrics.json").string());
  summary.metrics = metrics;
  return summary;
}

Scenario straight_road_scenario(double length) {
  Scenario sc;
  sc.name = "straight_road";
  Lane lane;
  lane.id = "L0";
  lane.centerline = {{0.0, 0.0}, {length, 0.0}};
  sc.network.lanes.emplace(lane.id, lane);
  validate_network(sc.network, sc.grid_resolution);
  return sc;
}

World benchmark_world(double dt, double road_length) {
  Scenario sc = straight_road_scenario(road_length);
  sc.vehicles.push_back({0, {"L0"}, 0.0, 0.0, 0.0, 10.0});
  return make_world(sc, WorldOptions{dt, std::nullopt});
}

Keyframe benchmark_keyframe() {
  Keyframe k;
  k.vehicle = 0;
  k.s = 100.0;
  k.time = 10.0;
  k.speed = 0.0;
  return k;
}

json BenchReport::to_json() const {
  json j;
  j["search"] = json::array();
  for (const auto& r : search) {
    j["search"].push_back(
        {{"dtt", r.step}, {"seconds", r.seconds}, {"expansions", r.expansions}, {"reached_goal", r.reached_goal}});
  }
  j["adjoint"] = json::array();
  for (const auto& r : adjoint) {
    j["adjoint"].push_back(
        {{"dt", r.step}, {"seconds", r.seconds}, {"frames", r.frames}, {"keyframe_error", r.keyframe_error}});
  }
  return j;
}

std::string BenchReport::table() const {
  std::ostringstream out;
  out << std::fixed;
  out << "state-time search\n  dtt [s]   time [s]   expansions  reached\n";
  for (const auto& r : search) {
    out << "  " << std::setw(7) << std::setprecision(3) << r.step << "  " << std::setw(9) << std::setprecision(4)
        << r.seconds << "  " << std::setw(11) << r.expansions << "  " << (r.reached_goal ? "yes" : "no") << "\n";
  }
  out << "adjoint optimization (fixed iteration count)\n  dt [s]    time [s]   frames  error [m]\n";
  for (const auto& r : adjoint) {
    out << "  " << std::setw(7) << std::setprecision(3) << r.step << "  " << std::setw(9) << std::setprecision(4)
        << r.seconds << "  " << std::setw(7) << r.frames << "  " << std::setw(9) << std::setprecision(4)
        << r.keyframe_error << "\n";
  }
  return out.str();
}

BenchReport bench(const BenchConfig& cfg) {
  for (double step : cfg.lattice_steps) {
    if (step <= 0.1 + 1e-12 && !cfg.allow_fine_lattice) {
      throw RefusedError("lattice step " + std::to_string(step) +
                         " s is refused: the state-time graph grows too large at dtt <= 0.1 s; "
                         "pass --allow-fine-lattice to run it anyway");
    }
  }
  BenchReport report;
  const Keyframe kf = benchmark_keyframe();

  for (double step : cfg.lattice_steps) {
    LatticeSpec spec;
    spec.time_step = step;
    spec.v_max = cfg.v_max;
    spec.s_max = 200.0;
    spec.t_max = kf.time;
    const StateTimeNode start{0, 0, 0};
    const StateTimeNode goal = nearest_node(*kf.s, *kf.speed, kf.time, spec);
    const ObstacleMap none(spec);
    BenchRow row;
    row.step = step;
    row.seconds = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.repeats; ++r) {
      SearchStats stats;
      const auto t0 = Clock::now();
      const CoarseTrajectory traj = search(start, goal, spec, none, &stats);
      row.seconds = std::min(row.seconds, seconds_since(t0));
      row.expansions = stats.expansions;
      row.reached_goal = traj.reached_goal;
    }
    report.search.push_back(row);
  }

  for (double dt : cfg.sim_steps) {
    const World world = benchmark_world(dt);
    EditOptions opts;
    opts.lattice.v_max = cfg.v_max;
    opts.optimizer.max_iterations = cfg.iterations;
    opts.optimizer.patience = cfg.iterations + 1;
    BenchRow row;
    row.step = dt;
    row.seconds = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.repeats; ++r) {
      const EditResult edit = edit_vehicle(world, {kf}, opts);
      row.seconds = std::min(row.seconds, edit.optimize_seconds);
      row.frames = edit.optimization.trajectory.frames();
      row.keyframe_error = edit.reports.front().error;
    }
    report.adjoint.push_back(row);
  }
  return report;
}

RefPath plan_on_scenario(const Scenario& scenario, const Polyline& waypoints) {
  const GridMap grid = build_grid(scenario.network, scenario.grid_resolution);
  PlanRequest req;
  req.waypoints = waypoints;
  return plan_user_path(grid, req);
}

}  // namespace trajedit
