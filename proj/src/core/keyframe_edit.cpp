#include "core/keyframe_edit.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace trajedit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Topological path whose centerline lies closest to `p` (ties: lower id).
std::optional<PathId> nearest_topo_path(const PathRegistry& paths, const Vec2& p) {
  std::optional<PathId> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (PathId id : paths.topo_ids()) {
    const FrenetPose pose = paths.path(id).project(p).pose;
    if (std::abs(pose.d) < best_d) {
      best_d = std::abs(pose.d);
      best = id;
    }
  }
  return best;
}

bool off_path(const RefPath& path, double lane_width, const Vec2& p) {
  const FrenetProjection proj = path.project(p);
  return (p - path.point(proj.pose.s)).norm() > 0.5 * lane_width;
}

// Plans a user path from the vehicle through the keyframe points and on to
// the end of the lane reached at the last one.
PathEntry replan_through(const World& w, const VehicleState& v, const std::vector<Keyframe>& keyframes,
                         const EditOptions& opts) {
  const RefPath& current = w.paths.path(v.path_id);
  Polyline waypoints{v.position};
  std::vector<Vec2> points;
  for (const auto& k : keyframes) {
    if (k.point) points.push_back(*k.point);
  }
  // Guide points keep the grid search on lane centers; left alone it cuts
  // across curves along the inner edge of the road.
  const double first_s = current.project(points.front()).pose.s;
  const double guide_end = std::min(first_s - opts.lane_change_length, current.length());
  for (double s = v.pose.s + opts.lookahead; s < guide_end; s += opts.guide_spacing) {
    waypoints.push_back(current.point(s));
  }
  waypoints.insert(waypoints.end(), points.begin(), points.end());

  double width = w.lane_width(v.path_id);
  if (auto lane = nearest_topo_path(w.paths, points.back())) {
    const RefPath& tail = w.paths.path(*lane);
    width = w.lane_width(*lane);
    const double s_kf = tail.project(points.back()).pose.s;
    for (double s = s_kf + opts.lane_continuation; s < tail.length() - 1.0; s += opts.guide_spacing) {
      waypoints.push_back(tail.point(s));
    }
    if (tail.length() - s_kf > 1.0) waypoints.push_back(tail.point(tail.length()));
  }

  PlanRequest req;
  req.waypoints = waypoints;
  RefPath path = plan_user_path(w.grid, req, opts.smoothing);
  return PathEntry{std::move(path), width, {}};
}

}  // namespace

std::vector<ObstacleTrack> predict_obstacles(const World& world, VehicleId excluded, const RefPath& path,
                                             double overlap_width, long every_frames, int samples,
                                             std::optional<double> ignore_behind) {
  World w = world;
  w.remove_vehicle(excluded);
  std::map<VehicleId, ObstacleTrack> tracks;
  for (int i = 0; i < samples; ++i) {
    auto note = [&](const VehicleState& v, double length) {
      const FrenetProjection proj = path.project(v.position);
      if (std::abs(proj.pose.d) >= overlap_width) return;
      if (proj.pose.s <= 0.0 || proj.pose.s >= path.length()) {
        // Past either end: only an overlap if the point is really on the path.
        if ((path.point(proj.pose.s) - v.position).norm() >= overlap_width) return;
      }
      ObstacleTrack& track = tracks[v.id];
      track.length = length;
      track.s.resize(static_cast<std::size_t>(samples));
      track.s[static_cast<std::size_t>(i)] = proj.pose.s;
    };
    for (const auto& v : w.vehicles) note(v, v.params.length);
    for (const auto& p : w.phantoms()) note(p, 0.0);
    if (i + 1 < samples) {
      for (long k = 0; k < every_frames; ++k) step(w);
    }
  }
  std::vector<ObstacleTrack> out;
  for (auto& [id, t] : tracks) {
    if (ignore_behind && t.s.front() && *t.s.front() < *ignore_behind) continue;
    out.push_back(std::move(t));
  }
  return out;
}

EditResult edit_vehicle(const World& world, std::vector<Keyframe> keyframes, const EditOptions& opts) {
  if (keyframes.empty()) throw ValidationError("no keyframes given");
  std::stable_sort(keyframes.begin(), keyframes.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  const VehicleId id = keyframes.front().vehicle;
  for (const auto& k : keyframes) {
    if (k.vehicle != id) throw ValidationError("keyframes of one edit must name the same vehicle");
    if (!k.point && !k.s) throw ValidationError("keyframe needs a point or an arc length");
  }

  EditResult out;
  out.vehicle = id;
  out.world = world;
  World& w = out.world;
  const double now = w.time();
  const double dt = w.dt;

  // Frames after the edit start for each keyframe.
  std::vector<long> frames;
  for (const auto& k : keyframes) {
    const double rel = (k.time - now) / dt;
    const long f = std::lround(rel);
    if (f < 1) throw RangeError("keyframe time " + std::to_string(k.time) + " s is not in the future");
    if (std::abs(rel - static_cast<double>(f)) > 1e-6) {
      throw ValidationError("keyframe time " + std::to_string(k.time) + " s is not a multiple of the time step");
    }
    frames.push_back(f);
  }

  // Replan when a keyframe point lies off the vehicle's path.
  {
    const VehicleState& v = w.vehicle(id);
    const RefPath& path = w.paths.path(v.path_id);
    bool needs_path = false;
    for (const auto& k : keyframes) {
      if (k.point && off_path(path, w.lane_width(v.path_id), *k.point)) needs_path = true;
    }
    if (needs_path) {
      PathEntry entry = replan_through(w, v, keyframes, opts);
      const PathId pid = w.paths.register_user_path(entry.path, entry.lane_width);
      entry.path.set_id(pid);
      w.reroute(id, pid);
      out.new_path = std::move(entry);
    }
  }
  const VehicleState& v = w.vehicle(id);
  out.path_id = v.path_id;
  const RefPath& path = w.paths.path(v.path_id);

  std::vector<Vec2> target_points;
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    const auto& k = keyframes[i];
    TrackingTarget t;
    t.frame = frames[i];
    t.vs = k.speed;
    if (k.point) {
      t.s = path.project(*k.point).pose.s;
      target_points.push_back(*k.point);
    } else {
      if (*k.s < 0.0 || *k.s > path.length()) {
        throw RangeError("keyframe arc length " + std::to_string(*k.s) + " m is beyond the path length");
      }
      t.s = *k.s;
      target_points.push_back(path.point(*k.s));
    }
    out.targets.push_back(t);
  }

  // Coarse stage.
  LatticeSpec spec = opts.lattice;
  spec.accel = v.params.max_acc.x();
  spec.s_max = path.length();
  const double horizon = static_cast<double>(frames.back()) * dt;
  const int lattice_steps = std::max(1, static_cast<int>(std::ceil(horizon / spec.time_step - 1e-9)));
  spec.t_max = lattice_steps * spec.time_step;
  spec.validate();
  out.lattice = spec;

  const long per_step = std::lround(spec.time_step / dt);
  if (per_step < 1 || std::abs(spec.time_step / dt - static_cast<double>(per_step)) > 1e-9 * per_step) {
    throw ValidationError("lattice time step must be a multiple of the simulation time step");
  }

  auto clamp_node = [&](StateTimeNode n) {
    n.i_s = std::clamp(n.i_s, 0, spec.max_s_index());
    n.i_v = std::clamp(n.i_v, 0, spec.max_v_index());
    n.i_t = std::clamp(n.i_t, 0, spec.max_t_index());
    return n;
  };

  std::vector<double> node_speeds;
  if (opts.init == InitMode::kCoarseSearch) {
    const auto tracks =
        predict_obstacles(w, id, path, v.params.width, per_step, spec.max_t_index() + 1, v.pose.s);
    const ObstacleMap obstacles = rasterize_obstacles(tracks, spec, v.params.jam_headway);

    const auto t0 = Clock::now();
    StateTimeNode start = clamp_node(nearest_node(v.pose.s, v.vs(), 0.0, spec));
    std::vector<StateTimeNode> all_nodes;
    for (std::size_t i = 0; i < keyframes.size(); ++i) {
      const double goal_speed = keyframes[i].speed.value_or(w.desired_speed(v));
      const StateTimeNode goal = clamp_node(nearest_node(out.targets[i].s, goal_speed, frames[i] * dt, spec));
      if (i > 0) {
        const StateTimeNode mapped = clamp_node(
            nearest_node(out.targets[i - 1].s, keyframes[i - 1].speed.value_or(w.desired_speed(v)),
                         frames[i - 1] * dt, spec));
        // Continue from the previous segment's end if the keyframe node is blocked.
        start = obstacles.blocked(mapped.i_s, mapped.i_t) ? all_nodes.back() : mapped;
      }
      SearchStats stats;
      CoarseTrajectory seg = search(start, goal, spec, obstacles, &stats);
      out.expansions += stats.expansions;
      for (std::size_t j = (i == 0 ? 0 : 1); j < seg.nodes.size(); ++j) all_nodes.push_back(seg.nodes[j]);
      // A fallback segment holds its last speed until the keyframe time.
      while (all_nodes.back().i_t < goal.i_t) {
        StateTimeNode hold = all_nodes.back();
        hold.i_s += 2 * hold.i_v;
        ++hold.i_t;
        all_nodes.push_back(hold);
      }
      out.segments.push_back(std::move(seg));
    }
    while (all_nodes.back().i_t < spec.max_t_index()) {
      StateTimeNode hold = all_nodes.back();
      hold.i_s += 2 * hold.i_v;
      ++hold.i_t;
      all_nodes.push_back(hold);
    }
    out.search_seconds = seconds_since(t0);
    for (const auto& n : all_nodes) {
      const NodeValue nv = node_value(n, spec);
      node_speeds.push_back(nv.v);
      out.coarse_rows.push_back({n.i_t, nv.s, nv.v});
    }
    out.initial = pad_speeds(node_speeds, spec.time_step, dt);
  } else {
    double speed = opts.average_speed;
    if (speed < 0.0) speed = std::max(0.0, (out.targets.back().s - v.pose.s) / horizon);
    out.initial.values.assign(static_cast<std::size_t>(lattice_steps * per_step), speed);
  }
  if (static_cast<long>(out.initial.size()) < frames.back()) {
    out.initial.values.resize(static_cast<std::size_t>(frames.back()), out.initial.values.back());
  }

  OptimizeConfig cfg = opts.optimizer;
  cfg.v_max = spec.v_max;
  const auto t1 = Clock::now();
  out.optimization = optimize(w, id, out.initial, out.targets, cfg);
  out.optimize_seconds = seconds_since(t1);

  const FineTrajectory& traj = out.optimization.trajectory;
  out.met = true;
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    KeyframeReport r;
    r.keyframe = keyframes[i];
    r.frame = frames[i];
    r.target = target_points[i];
    r.reached = traj.position[static_cast<std::size_t>(frames[i])];
    r.error = (r.reached - r.target).norm();
    r.target_s = out.targets[i].s;
    r.reached_s = traj.s[static_cast<std::size_t>(frames[i])];
    r.met = r.error < opts.tolerance;
    r.closest_distance = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < traj.position.size(); ++f) {
      const double d = (traj.position[f] - r.target).norm();
      if (d < r.closest_distance) {
        r.closest_distance = d;
        r.closest_time = now + static_cast<double>(f) * dt;
      }
    }
    out.met = out.met && r.met;
    out.reports.push_back(r);
  }

  out.control = SpeedControl{w.frame, out.optimization.schedule.values};
  w.controls[id] = out.control;
  return out;
}

PathId apply_edit(World& world, const EditResult& edit) {
  PathId pid = world.vehicle(edit.vehicle).path_id;
  if (edit.new_path) {
    pid = world.paths.register_user_path(edit.new_path->path, edit.new_path->lane_width);
    world.reroute(edit.vehicle, pid);
  }
  world.controls[edit.vehicle] = edit.control;
  return pid;
}

}  // namespace trajedit
