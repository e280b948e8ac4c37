#pragma once

#include "core/ref_path.hpp"
#include "core/scene.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace trajedit {

struct PlanRequest {
  Polyline waypoints;
  double mu_a = 20.0;
  double mu_b = -1.5;
};

// h(n) = |n - goal| + mu_a * exp(mu_b * label(n)), distances in meters.
double lane_center_heuristic(double distance_to_goal, std::uint8_t label, double mu_a, double mu_b);

struct GridPlan {
  std::vector<Cell> cells;
  // Index into `cells` of each waypoint.
  std::vector<std::size_t> waypoint_indices;
  // Accumulated step cost (meters) per segment.
  std::vector<double> segment_costs;
};

// Single-segment A* over 8-connected drivable cells. Returns an empty list
// when the goal is unreachable.
std::vector<Cell> astar_cells(const GridMap& grid, Cell start, Cell goal, double mu_a, double mu_b,
                              double* cost = nullptr);

// Segment-by-segment plan through the waypoints. Throws PlanningError if a
// waypoint is undrivable or a segment has no route.
GridPlan plan_grid_path(const GridMap& grid, const PlanRequest& req);

struct SmoothingOptions {
  double downsample_spacing = 2.0;
  double gaussian_sigma = 2.0;  // in samples
  int window = 5;
  double check_spacing = 0.5;
};

// Down-sample, Gaussian-smooth and spline-fit a cell path. Endpoints stay
// fixed; so do `pinned` cell indices, whose positions are replaced by the
// matching entry of `pinned_points` when given.
RefPath smooth_and_fit(const std::vector<Cell>& cells, const GridMap& grid, const SmoothingOptions& opts = {},
                       const std::vector<std::size_t>& pinned = {}, const Polyline& pinned_points = {});

// Plans and fits in one call, pinning the request's waypoints.
RefPath plan_user_path(const GridMap& grid, const PlanRequest& req, const SmoothingOptions& opts = {});

struct PathEntry {
  RefPath path;
  double lane_width = 3.5;
  std::vector<std::string> lanes;  // empty for user paths
};

// The reference path set: topological paths first, then user paths.
class PathRegistry {
 public:
  PathId add_topo(RefPath path, double lane_width, std::vector<std::string> lanes);
  PathId register_user_path(RefPath path, double lane_width = 3.5);

  const PathEntry& entry(PathId id) const;
  const RefPath& path(PathId id) const { return entry(id).path; }
  bool contains(PathId id) const { return entries_.count(id) != 0; }
  std::size_t size() const { return entries_.size(); }
  std::vector<PathId> ids() const;
  std::vector<PathId> topo_ids() const;
  std::vector<PathId> user_ids() const;
  std::optional<PathId> find_by_lanes(const std::vector<std::string>& prefix) const;

 private:
  // Shared so copying a registry (world snapshots) does not copy paths.
  std::map<PathId, std::shared_ptr<const PathEntry>> entries_;
  PathId next_id_ = 0;
};

PathRegistry build_topo_registry(const LaneNetwork& net);

}  // namespace trajedit
