#include "core/world.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <random>

namespace trajedit {

World::World(PathRegistry paths_in, GridMap grid_in, std::vector<StopLine> stop_lines_in, double dt_in)
    : paths(std::move(paths_in)), grid(std::move(grid_in)), stop_lines(std::move(stop_lines_in)), dt(dt_in) {}

VehicleState* World::find(VehicleId id) {
  auto it = std::lower_bound(vehicles.begin(), vehicles.end(), id,
                             [](const VehicleState& v, VehicleId key) { return v.id < key; });
  return it != vehicles.end() && it->id == id ? &*it : nullptr;
}

const VehicleState* World::find(VehicleId id) const { return const_cast<World*>(this)->find(id); }

const VehicleState& World::vehicle(VehicleId id) const {
  const VehicleState* v = find(id);
  if (!v) throw NotFoundError("unknown or finished vehicle " + std::to_string(id));
  return *v;
}

VehicleState& World::vehicle(VehicleId id) {
  VehicleState* v = find(id);
  if (!v) throw NotFoundError("unknown or finished vehicle " + std::to_string(id));
  return *v;
}

VehicleState& World::add_vehicle(VehicleState v) {
  if (find(v.id)) throw ValidationError("duplicate vehicle id " + std::to_string(v.id));
  const RefPath& path = paths.path(v.path_id);
  if (v.pose.s < 0.0 || v.pose.s > path.length()) {
    throw RangeError("vehicle " + std::to_string(v.id) + " spawn s outside its path");
  }
  v.sync_cartesian(path);
  auto it = std::lower_bound(vehicles.begin(), vehicles.end(), v.id,
                             [](const VehicleState& a, VehicleId key) { return a.id < key; });
  return *vehicles.insert(it, std::move(v));
}

VehicleState& World::spawn(VehicleId id, PathId path, FrenetPose pose, double speed, double desired_speed,
                           const VehicleParams& params) {
  VehicleState v;
  v.id = id;
  v.path_id = path;
  v.pose = pose;
  v.frenet_velocity = {speed, 0.0};
  v.desired_velocity = {desired_speed, 0.0};
  v.params = params;
  return add_vehicle(std::move(v));
}

bool World::remove_vehicle(VehicleId id) {
  auto it = std::find_if(vehicles.begin(), vehicles.end(), [&](const VehicleState& v) { return v.id == id; });
  if (it == vehicles.end()) return false;
  vehicles.erase(it);
  controls.erase(id);
  return true;
}

void World::reroute(VehicleId id, PathId path_id) {
  VehicleState& v = vehicle(id);
  const RefPath& path = paths.path(path_id);
  const FrenetProjection proj = path.project(v.position);
  v.path_id = path_id;
  v.pose = proj.pose;
  v.frenet_velocity = path.frenet_velocity(proj.pose.s, v.velocity);
  if (v.frenet_velocity.x() < 0.0) v.frenet_velocity.x() = 0.0;
  v.sync_cartesian(path);
}

double World::desired_speed(const VehicleState& v, const SpeedOverrides& overrides) const {
  if (auto it = overrides.find(v.id); it != overrides.end()) return it->second;
  if (auto it = controls.find(v.id); it != controls.end()) {
    if (auto value = it->second.at(frame)) return *value;
  }
  return v.desired_velocity.x();
}

std::vector<VehicleState> World::phantoms() const {
  std::vector<VehicleState> out;
  const double t = time();
  for (std::size_t i = 0; i < stop_lines.size(); ++i) {
    if (!stop_lines[i].red_at(t)) continue;
    VehicleState p;
    p.id = -static_cast<VehicleId>(i) - 1;
    p.position = stop_lines[i].point;
    p.phantom = true;
    out.push_back(p);
  }
  return out;
}

std::optional<double> World::stop_line_s(PathId path_id, std::size_t index) const {
  const auto key = std::make_pair(path_id, index);
  if (auto it = stop_s_cache_.find(key); it != stop_s_cache_.end()) return it->second;
  const RefPath& path = paths.path(path_id);
  const Vec2& pt = stop_lines.at(index).point;
  const double s = path.project(pt).pose.s;
  std::optional<double> out;
  if (s > 0.0 && s < path.length() && (path.point(s) - pt).norm() < 0.5 * lane_width(path_id)) out = s;
  stop_s_cache_.emplace(key, out);
  return out;
}

std::vector<VehicleState> World::phantoms_for(const VehicleState& v) const {
  std::vector<VehicleState> out;
  const double t = time();
  const RefPath& path = paths.path(v.path_id);
  for (std::size_t i = 0; i < stop_lines.size(); ++i) {
    if (!stop_lines[i].red_at(t)) continue;
    const std::optional<double> s = stop_line_s(v.path_id, i);
    if (!s || *s <= v.pose.s) continue;
    // The line runs across the lane through the path point at *s; the
    // phantom sits where the vehicle's moving direction meets it.
    const Vec2 t_line = path.tangent(*s);
    const Vec2 dir = v.moving_direction();
    const double closing = dir.dot(t_line);
    if (closing < 1e-3) continue;
    VehicleState p;
    p.id = -static_cast<VehicleId>(i) - 1;
    p.path_id = v.path_id;
    p.position = v.position + dir * ((path.point(*s) - v.position).dot(t_line) / closing);
    p.pose = {*s, v.pose.d};
    p.heading = path.heading(*s);
    p.phantom = true;
    out.push_back(p);
  }
  return out;
}

World make_world(const Scenario& scenario, const WorldOptions& opts) {
  World world(build_topo_registry(scenario.network), build_grid(scenario.network, scenario.grid_resolution),
              scenario.stop_lines, opts.dt);
  std::vector<VehicleSpawn> spawns = scenario.vehicles;
  std::sort(spawns.begin(), spawns.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::mt19937_64 rng(opts.seed.value_or(0));
  for (const VehicleSpawn& sp : spawns) {
    const auto path = world.paths.find_by_lanes(sp.lanes);
    if (!path) throw ValidationError("vehicle " + std::to_string(sp.id) + ": no topological path starts with the given lanes");
    VehicleParams params;
    if (opts.seed) params = sample_params(rng, params);
    world.spawn(sp.id, *path, {sp.s, sp.d}, sp.speed, sp.desired_speed, params);
  }
  return world;
}

std::vector<ForceBreakdown> compute_forces(World& world, const SpeedOverrides& overrides) {
  std::vector<std::pair<VehicleId, Vec2>> positions;
  positions.reserve(world.vehicles.size());
  for (const auto& v : world.vehicles) positions.emplace_back(v.id, v.position);
  world.grid.update_occupancy(positions);
  const int half_window = GridMap::kNeighborWindow / 2;

  std::vector<ForceBreakdown> out(world.vehicles.size());
  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    const VehicleState& v = world.vehicles[i];
    const RefPath& path = world.paths.path(v.path_id);
    ForceBreakdown& f = out[i];
    f.self = self_motivated_force(v, world.desired_speed(v, overrides), world.weights);
    f.path = path_keeping_force(v, world.lane_width(v.path_id), world.weights);

    Vec2 cartesian = Vec2::Zero();
    const Cell here = world.grid.cell_of(v.position);
    for (VehicleId nid : world.grid.query_window(here)) {
      if (nid == v.id) continue;
      if (const VehicleState* n = world.find(nid)) cartesian += collision_avoidance_force(v, *n, world.weights);
    }
    for (const VehicleState& p : world.phantoms_for(v)) {
      const Cell c = world.grid.cell_of(p.position);
      if (c.row < here.row - half_window || c.row >= here.row + half_window || c.col < here.col - half_window ||
          c.col >= here.col + half_window)
        continue;
      cartesian += collision_avoidance_force(v, p, world.weights);
    }
    const Vec2 t = path.tangent(v.pose.s);
    f.collision = {cartesian.dot(t), cartesian.dot(left_normal(t))};
    f.total = f.self + f.path + f.collision;
  }
  return out;
}

std::vector<VehicleStepInfo> integrate(World& world, const std::vector<ForceBreakdown>& forces, double dt) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (forces.size() != world.vehicles.size()) throw ValidationError("force count does not match vehicle count");

  std::vector<VehicleStepInfo> info(world.vehicles.size());
  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    VehicleState& v = world.vehicles[i];
    const RefPath& path = world.paths.path(v.path_id);
    const LongitudinalStep lon = integrate_longitudinal(v.pose.s, v.vs(), forces[i].total.x(), v.params.mass, dt);
    v.frenet_velocity.x() = lon.vs;
    v.frenet_velocity.y() += forces[i].total.y() / v.params.mass * dt;
    v.pose.s = lon.s;
    v.pose.d += v.vd() * dt;
    info[i] = {v.id, forces[i], lon.clamped, false};
    if (v.pose.s >= path.length()) {
      v.pose.s = path.length();
      info[i].finished = true;
    }
    v.sync_cartesian(path);
  }

  for (std::size_t i = info.size(); i-- > 0;) {
    if (!info[i].finished) continue;
    world.finished.push_back(world.vehicles[i]);
    world.vehicles.erase(world.vehicles.begin() + static_cast<std::ptrdiff_t>(i));
  }
  ++world.frame;
  return info;
}

std::vector<VehicleStepInfo> step(World& world, double dt, const SpeedOverrides& overrides) {
  const auto forces = compute_forces(world, overrides);
  return integrate(world, forces, dt);
}

}  // namespace trajedit
