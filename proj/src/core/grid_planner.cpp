#include "core/grid_planner.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <tuple>

namespace trajedit {

double lane_center_heuristic(double distance_to_goal, std::uint8_t label, double mu_a, double mu_b) {
  return distance_to_goal + mu_a * std::exp(mu_b * static_cast<double>(label));
}

namespace {

struct OpenEntry {
  double f;
  double g;
  int row;
  int col;
  bool operator>(const OpenEntry& o) const {
    return std::tie(f, g, row, col) > std::tie(o.f, o.g, o.row, o.col);
  }
};

constexpr std::array<std::pair<int, int>, 8> kMoves = {
    {{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};

}  // namespace

std::vector<Cell> astar_cells(const GridMap& grid, Cell start, Cell goal, double mu_a, double mu_b, double* cost) {
  if (!grid.drivable(start) || !grid.drivable(goal)) return {};
  if (start == goal) {
    if (cost) *cost = 0.0;
    return {start};
  }
  const double res = grid.resolution();
  const std::size_t n = static_cast<std::size_t>(grid.rows()) * static_cast<std::size_t>(grid.cols());
  auto idx = [&](const Cell& c) { return static_cast<std::size_t>(c.row) * grid.cols() + c.col; };
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<char> closed(n, 0);
  const Vec2 goal_center = grid.center(goal);
  auto h = [&](const Cell& c) {
    return lane_center_heuristic((grid.center(c) - goal_center).norm(), grid.label(c), mu_a, mu_b);
  };

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  g[idx(start)] = 0.0;
  open.push({h(start), 0.0, start.row, start.col});
  bool found = false;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const Cell cur{top.row, top.col};
    const std::size_t ci = idx(cur);
    if (closed[ci]) continue;
    closed[ci] = 1;
    if (cur == goal) {
      found = true;
      break;
    }
    for (const auto& [dr, dc] : kMoves) {
      const Cell nb{cur.row + dr, cur.col + dc};
      if (!grid.drivable(nb)) continue;
      const bool diagonal = dr != 0 && dc != 0;
      // No corner cutting through two undrivable orthogonal neighbours.
      if (diagonal && !grid.drivable({cur.row + dr, cur.col}) && !grid.drivable({cur.row, cur.col + dc})) continue;
      const std::size_t ni = idx(nb);
      if (closed[ni]) continue;
      const double ng = g[ci] + (diagonal ? std::sqrt(2.0) : 1.0) * res;
      if (ng < g[ni]) {
        g[ni] = ng;
        parent[ni] = static_cast<std::int64_t>(ci);
        open.push({ng + h(nb), ng, nb.row, nb.col});
      }
    }
  }
  if (!found) return {};

  std::vector<Cell> out;
  for (std::int64_t i = static_cast<std::int64_t>(idx(goal)); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    out.push_back({static_cast<int>(i / grid.cols()), static_cast<int>(i % grid.cols())});
  }
  std::reverse(out.begin(), out.end());
  if (cost) *cost = g[idx(goal)];
  return out;
}

GridPlan plan_grid_path(const GridMap& grid, const PlanRequest& req) {
  if (req.waypoints.size() < 2) throw PlanningError("path planning needs at least 2 waypoints");
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < req.waypoints.size(); ++i) {
    const Cell c = grid.cell_of(req.waypoints[i]);
    if (!grid.drivable(c)) {
      std::ostringstream msg;
      msg << "waypoint " << i << " (" << req.waypoints[i].x() << ", " << req.waypoints[i].y()
          << ") is not in a drivable cell";
      throw PlanningError(msg.str());
    }
    cells.push_back(c);
  }

  GridPlan plan;
  plan.waypoint_indices.push_back(0);
  plan.cells.push_back(cells.front());
  for (std::size_t i = 1; i < cells.size(); ++i) {
    double cost = 0.0;
    auto seg = astar_cells(grid, cells[i - 1], cells[i], req.mu_a, req.mu_b, &cost);
    if (seg.empty()) {
      throw PlanningError("no drivable route for segment " + std::to_string(i - 1) + " (waypoint " +
                          std::to_string(i - 1) + " -> " + std::to_string(i) + ")");
    }
    plan.cells.insert(plan.cells.end(), seg.begin() + 1, seg.end());
    plan.waypoint_indices.push_back(plan.cells.size() - 1);
    plan.segment_costs.push_back(cost);
  }
  return plan;
}

RefPath smooth_and_fit(const std::vector<Cell>& cells, const GridMap& grid, const SmoothingOptions& opts,
                       const std::vector<std::size_t>& pinned, const Polyline& pinned_points) {
  if (cells.size() < 2) throw PlanningError("smoothing needs at least 2 cells");

  struct Sample {
    Vec2 p;
    bool fixed;
  };
  auto position = [&](std::size_t i) {
    for (std::size_t k = 0; k < pinned.size(); ++k) {
      if (pinned[k] == i && k < pinned_points.size()) return pinned_points[k];
    }
    return grid.center(cells[i]);
  };
  auto is_pinned = [&](std::size_t i) {
    return i == 0 || i + 1 == cells.size() || std::find(pinned.begin(), pinned.end(), i) != pinned.end();
  };

  // Down-sample: keep a cell once it is far enough from the last kept sample;
  // pinned cells and the endpoints are always kept.
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Vec2 p = position(i);
    const bool fixed = is_pinned(i);
    if (samples.empty()) {
      samples.push_back({p, fixed});
      continue;
    }
    const double gap = (p - samples.back().p).norm();
    if (fixed) {
      // Drop a free sample that would sit too close to a fixed one.
      if (!samples.back().fixed && gap < 0.5 * opts.downsample_spacing && samples.size() > 1) samples.pop_back();
      if ((p - samples.back().p).norm() > 1e-9) samples.push_back({p, true});
    } else if (gap >= opts.downsample_spacing) {
      samples.push_back({p, false});
    }
  }
  if (samples.size() < 2) throw PlanningError("smoothing needs at least 2 distinct samples");

  // Gaussian smoothing, truncated window renormalised at the ends.
  std::vector<double> kernel;
  const int half = opts.window / 2;
  for (int k = -half; k <= half; ++k) kernel.push_back(std::exp(-0.5 * k * k / (opts.gaussian_sigma * opts.gaussian_sigma)));
  Polyline smoothed(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].fixed) {
      smoothed[i] = samples[i].p;
      continue;
    }
    Vec2 acc = Vec2::Zero();
    double wsum = 0.0;
    for (int k = -half; k <= half; ++k) {
      const auto j = static_cast<std::ptrdiff_t>(i) + k;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(samples.size())) continue;
      const double w = kernel[static_cast<std::size_t>(k + half)];
      acc += w * samples[static_cast<std::size_t>(j)].p;
      wsum += w;
    }
    smoothed[i] = acc / wsum;
  }

  RefPath path = make_path(smoothed, PathSource::kUser);
  const int n = std::max(1, static_cast<int>(std::ceil(path.length() / opts.check_spacing)));
  for (int i = 0; i <= n; ++i) {
    const double s = path.length() * i / n;
    if (grid.label_at(path.point(s)) == GridMap::kUnreachable) {
      std::ostringstream msg;
      msg << "smoothed path leaves the drivable area at s = " << s << " m";
      throw PlanningError(msg.str());
    }
  }
  return path;
}

RefPath plan_user_path(const GridMap& grid, const PlanRequest& req, const SmoothingOptions& opts) {
  const GridPlan plan = plan_grid_path(grid, req);
  return smooth_and_fit(plan.cells, grid, opts, plan.waypoint_indices, req.waypoints);
}

PathId PathRegistry::add_topo(RefPath path, double lane_width, std::vector<std::string> lanes) {
  const PathId id = next_id_++;
  path.set_id(id);
  entries_.emplace(id, std::make_shared<const PathEntry>(PathEntry{std::move(path), lane_width, std::move(lanes)}));
  return id;
}

PathId PathRegistry::register_user_path(RefPath path, double lane_width) {
  const PathId id = next_id_++;
  path.set_id(id);
  entries_.emplace(id, std::make_shared<const PathEntry>(PathEntry{std::move(path), lane_width, {}}));
  return id;
}

const PathEntry& PathRegistry::entry(PathId id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw NotFoundError("unknown path id " + std::to_string(id));
  return *it->second;
}

std::vector<PathId> PathRegistry::ids() const {
  std::vector<PathId> out;
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

std::vector<PathId> PathRegistry::topo_ids() const {
  std::vector<PathId> out;
  for (const auto& [id, e] : entries_) {
    if (e->path.source() == PathSource::kTopo) out.push_back(id);
  }
  return out;
}

std::vector<PathId> PathRegistry::user_ids() const {
  std::vector<PathId> out;
  for (const auto& [id, e] : entries_) {
    if (e->path.source() == PathSource::kUser) out.push_back(id);
  }
  return out;
}

std::optional<PathId> PathRegistry::find_by_lanes(const std::vector<std::string>& prefix) const {
  for (const auto& [id, e] : entries_) {
    if (e->path.source() != PathSource::kTopo) continue;
    if (prefix.size() <= e->lanes.size() && std::equal(prefix.begin(), prefix.end(), e->lanes.begin())) return id;
  }
  return std::nullopt;
}

PathRegistry build_topo_registry(const LaneNetwork& net) {
  PathRegistry reg;
  for (auto& tp : topo_paths(net)) {
    double width = 0.0;
    for (const auto& lid : tp.lanes) width = std::max(width, net.lane(lid).width);
    reg.add_topo(make_path(tp.points, PathSource::kTopo), width, tp.lanes);
  }
  return reg;
}

}  // namespace trajedit
