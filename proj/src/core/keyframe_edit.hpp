#pragma once

#include "core/adjoint.hpp"
#include "core/grid_planner.hpp"
#include "core/lattice.hpp"
#include "core/world.hpp"

#include <optional>
#include <vector>

namespace trajedit {

// Reach `point` (or arc length `s` on the vehicle's current path) at
// absolute simulation time `time`, optionally with longitudinal speed `speed`.
struct Keyframe {
  VehicleId vehicle = 0;
  std::optional<Vec2> point;
  std::optional<double> s;
  double time = 0.0;
  std::optional<double> speed;
};

enum class InitMode { kCoarseSearch, kAverageSpeed };

struct EditOptions {
  LatticeSpec lattice;  // s_max and t_max are filled per edit
  OptimizeConfig optimizer;
  InitMode init = InitMode::kCoarseSearch;
  // Constant speed for kAverageSpeed; negative means distance / time.
  double average_speed = -1.0;
  double tolerance = 0.5;          // met if the keyframe error is below this, m
  // Replanning guide points: along the current path from `lookahead` ahead
  // of the vehicle until `lane_change_length` before the first keyframe, and
  // along the keyframe's lane from `lane_continuation` past the last one to
  // the lane end, every `guide_spacing`.
  double lookahead = 10.0;
  double lane_change_length = 20.0;
  double lane_continuation = 15.0;
  double guide_spacing = 10.0;
  SmoothingOptions smoothing;
};

struct KeyframeReport {
  Keyframe keyframe;
  long frame = 0;  // frames after the edit start
  Vec2 target = Vec2::Zero();
  Vec2 reached = Vec2::Zero();
  double error = 0.0;
  double target_s = 0.0;
  double reached_s = 0.0;
  bool met = false;
  double closest_distance = 0.0;
  double closest_time = 0.0;  // absolute
};

struct EditResult {
  VehicleId vehicle = 0;
  bool met = false;
  std::vector<KeyframeReport> reports;
  // Replanned path when a keyframe was off the vehicle's path.
  std::optional<PathEntry> new_path;
  PathId path_id = -1;  // path id inside `world`
  SpeedControl control;
  std::vector<TrackingTarget> targets;
  std::vector<CoarseTrajectory> segments;
  std::vector<CoarseNodeRow> coarse_rows;
  LatticeSpec lattice;
  ControlSchedule initial;
  OptimizeResult optimization;
  std::size_t expansions = 0;
  double search_seconds = 0.0;
  double optimize_seconds = 0.0;
  // The input world at the edit start with the path change and control
  // schedule installed.
  World world;
};

// Keyframes must all name the same vehicle; they are sorted by time.
EditResult edit_vehicle(const World& world, std::vector<Keyframe> keyframes, const EditOptions& opts = {});

// Installs an edit into a (possibly later) world: registers the replanned
// path, reroutes the vehicle and sets its control schedule. Returns the path
// id used.
PathId apply_edit(World& world, const EditResult& edit);

// Predicted arc lengths on `path` of every vehicle except `excluded` (and of
// red stop lines), sampled every `every_frames` frames for `samples` samples.
// A vehicle overlaps the path while its |d| is below `overlap_width`.
// Vehicles already on the path behind `ignore_behind` are dropped.
std::vector<ObstacleTrack> predict_obstacles(const World& world, VehicleId excluded, const RefPath& path,
                                             double overlap_width, long every_frames, int samples,
                                             std::optional<double> ignore_behind = std::nullopt);

}  // namespace trajedit
