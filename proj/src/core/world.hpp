#pragma once

#include "core/forces.hpp"
#include "core/grid_planner.hpp"
#include "core/scene.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace trajedit {

// Per-frame desired longitudinal speeds for one vehicle, starting at
// `start_frame`. Frames outside the range fall back to the vehicle's own
// desired speed.
struct SpeedControl {
  long start_frame = 0;
  std::vector<double> values;

  std::optional<double> at(long frame) const {
    const long i = frame - start_frame;
    if (i < 0 || i >= static_cast<long>(values.size())) return std::nullopt;
    return values[static_cast<std::size_t>(i)];
  }
};

using SpeedOverrides = std::map<VehicleId, double>;

class World {
 public:
  World() = default;
  World(PathRegistry paths, GridMap grid, std::vector<StopLine> stop_lines, double dt = 0.01);

  PathRegistry paths;
  GridMap grid;
  std::vector<StopLine> stop_lines;
  // Active vehicles, ascending id.
  std::vector<VehicleState> vehicles;
  // Vehicles that reached their path end, in finishing order.
  std::vector<VehicleState> finished;
  std::map<VehicleId, SpeedControl> controls;
  ForceWeights weights;
  double dt = 0.01;
  long frame = 0;

  double time() const { return static_cast<double>(frame) * dt; }

  VehicleState* find(VehicleId id);
  const VehicleState* find(VehicleId id) const;
  // Throws NotFoundError for unknown or finished vehicles.
  const VehicleState& vehicle(VehicleId id) const;
  VehicleState& vehicle(VehicleId id);

  // Throws ValidationError on duplicate ids, NotFoundError on unknown paths.
  VehicleState& add_vehicle(VehicleState v);
  VehicleState& spawn(VehicleId id, PathId path, FrenetPose pose, double speed, double desired_speed,
                      const VehicleParams& params = {});
  bool remove_vehicle(VehicleId id);

  // Moves a vehicle onto another path, re-projecting its Cartesian state.
  void reroute(VehicleId id, PathId path);

  double lane_width(PathId path) const { return paths.entry(path).lane_width; }

  // Desired longitudinal speed in effect for `v` this frame.
  double desired_speed(const VehicleState& v, const SpeedOverrides& overrides = {}) const;

  // Stationary neighbors at the red stop lines' lane-center points.
  std::vector<VehicleState> phantoms() const;

  // Arc length at which stop line `index` crosses `path`, if it lies within
  // half a lane width of the path's interior. Cached per (path, line).
  std::optional<double> stop_line_s(PathId path, std::size_t index) const;

  // Phantoms that act on `v`: one per red stop line ahead on its own path,
  // placed where the vehicle's moving direction crosses the line.
  std::vector<VehicleState> phantoms_for(const VehicleState& v) const;

 private:
  mutable std::map<std::pair<PathId, std::size_t>, std::optional<double>> stop_s_cache_;
};

struct WorldOptions {
  double dt = 0.01;
  // Sample s0 and T0 per vehicle (ascending id order) when set.
  std::optional<std::uint64_t> seed;
};

// Grid, topological path registry and the scenario's bundled vehicles.
World make_world(const Scenario& scenario, const WorldOptions& opts = {});

// Forces on every active vehicle (aligned with world.vehicles), computed from
// the current state only. Rebuilds the grid occupancy as a side effect.
std::vector<ForceBreakdown> compute_forces(World& world, const SpeedOverrides& overrides = {});

struct VehicleStepInfo {
  VehicleId id = 0;
  ForceBreakdown forces;
  bool speed_clamped = false;  // v^s was clamped to 0
  bool finished = false;       // reached the path end this step
};

// Semi-implicit Euler update of all vehicles with precomputed forces, then
// advances the clock. Finished vehicles move to world.finished.
std::vector<VehicleStepInfo> integrate(World& world, const std::vector<ForceBreakdown>& forces, double dt);

// One synchronous frame: all forces from the pre-step snapshot, then all
// states advanced.
std::vector<VehicleStepInfo> step(World& world, double dt, const SpeedOverrides& overrides = {});
inline std::vector<VehicleStepInfo> step(World& world) { return step(world, world.dt); }

// Longitudinal Euler update shared with the optimizer's rollout.
struct LongitudinalStep {
  double s = 0.0;
  double vs = 0.0;
  bool clamped = false;
};
inline LongitudinalStep integrate_longitudinal(double s, double vs, double fs, double mass, double dt) {
  LongitudinalStep out;
  out.vs = vs + fs / mass * dt;
  if (out.vs < 0.0) {
    out.vs = 0.0;
    out.clamped = true;
  }
  out.s = s + out.vs * dt;
  return out;
}

}  // namespace trajedit
