#pragma once

#include "core/keyframe_edit.hpp"
#include "core/scene.hpp"
#include "core/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace trajedit {

struct VehicleConfig {
  VehicleId id = 0;
  std::vector<std::string> lanes;
  double s = 0.0;
  double d = 0.0;
  double speed = 0.0;
  double desired_speed = 10.0;
};

// A way-point path planned before editing; assigned to `vehicle` if set.
struct PathPlanConfig {
  std::optional<VehicleId> vehicle;
  Polyline waypoints;
};

struct RunConfig {
  std::string scenario;
  double duration = 20.0;
  double dt = 0.01;
  double lattice_dt = 0.5;
  double v_max = 20.0;
  // Per-vehicle s0 and T0 are sampled when a seed is given.
  std::optional<std::uint64_t> seed;
  // Replaces the scenario's bundled vehicles when present.
  std::optional<std::vector<VehicleConfig>> vehicles;
  std::vector<PathPlanConfig> paths;
  std::vector<Keyframe> edits;
  int iterations = 100;
  int patience = 10;
  double learning_rate = 0.01;
  RegularizerScale regularizer = RegularizerScale::kPerSecond;
  InitMode init = InitMode::kCoarseSearch;
  double tolerance = 0.5;
  std::string output = "out";
};

// Relative scenario paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// Initial world for a config: scenario, vehicles and way-point paths.
World build_world(const RunConfig& cfg, bool with_paths);

EditOptions edit_options(const RunConfig& cfg);

struct RunSummary {
  bool edited = false;
  bool all_met = true;
  std::vector<std::string> files;
  nlohmann::json metrics;
};

// Writes original.csv and, when the config has edits, edited.csv,
// loss_<id>.csv, coarse_<id>.csv and metrics.json into cfg.output.
// Errors are rethrown prefixed with the failing stage.
RunSummary run(const RunConfig& cfg, bool apply_edits = true);

// The "100 m in 10 s" instance: one vehicle at rest at the start of a
// straight single-lane road, keyframe at s = 100 m, t = 10 s, speed 0.
Scenario straight_road_scenario(double length = 200.0);
World benchmark_world(double dt, double road_length = 200.0);
Keyframe benchmark_keyframe();

struct BenchConfig {
  std::vector<double> lattice_steps{0.5, 0.25};
  std::vector<double> sim_steps{0.5, 0.1, 0.05, 0.01, 0.005};
  int iterations = 100;
  int repeats = 3;
  bool allow_fine_lattice = false;
  double v_max = 20.0;
};

struct BenchRow {
  double step = 0.0;
  double seconds = 0.0;  // best of the repeats
  std::size_t expansions = 0;
  long frames = 0;
  double keyframe_error = 0.0;
  bool reached_goal = false;
};

struct BenchReport {
  std::vector<BenchRow> search;
  std::vector<BenchRow> adjoint;
  nlohmann::json to_json() const;
  std::string table() const;
};

// Throws RefusedError for lattice steps <= 0.1 s without allow_fine_lattice.
BenchReport bench(const BenchConfig& cfg);

// Plans a way-point path on the scenario's grid.
RefPath plan_on_scenario(const Scenario& scenario, const Polyline& waypoints);

}  // namespace trajedit
