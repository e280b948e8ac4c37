#pragma once

#include "core/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trajedit {

struct Lane {
  std::string id;
  Polyline centerline;
  double width = 3.5;
  std::vector<std::string> predecessors;
  std::vector<std::string> successors;
};

struct Bounds {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
};

// Lanes keyed by id. std::map keeps iteration in ascending id order, which is
// the tie-break every enumeration over lanes relies on.
struct LaneNetwork {
  std::map<std::string, Lane> lanes;
  Bounds bounds;

  const Lane& lane(const std::string& id) const;
};

// A stop line acts as a stationary phantom neighbor at `point` while the
// light is red, i.e. for simulation time in [red_from, red_until).
struct StopLine {
  std::string id;
  Vec2 point = Vec2::Zero();
  double red_from = 0.0;
  double red_until = 0.0;

  bool red_at(double t) const { return t >= red_from && t < red_until; }
};

// Default traffic bundled with a scenario file. `lanes` names the lane chain
// of a topological path (prefix match, see find_topo_path).
struct VehicleSpawn {
  VehicleId id = 0;
  std::vector<std::string> lanes;
  double s = 0.0;
  double d = 0.0;
  double speed = 0.0;
  double desired_speed = 10.0;
};

struct Scenario {
  std::string name;
  double grid_resolution = 0.5;
  LaneNetwork network;
  std::vector<StopLine> stop_lines;
  std::vector<VehicleSpawn> vehicles;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Fills in predecessor lists from successor lists, checks every lane
// invariant and rejects cyclic topologies. Throws ValidationError naming the
// offending lane.
void validate_network(LaneNetwork& net, double junction_tolerance);

Bounds compute_bounds(const LaneNetwork& net, double margin = 1.0);

struct TopoPath {
  std::vector<std::string> lanes;
  Polyline points;
};

// Depth-first enumeration of every source-to-sink lane chain; sources and
// successors are visited in ascending id order.
std::vector<TopoPath> topo_paths(const LaneNetwork& net);

// Index of the first topological path whose lane chain starts with `prefix`.
std::optional<std::size_t> find_topo_path(const std::vector<TopoPath>& paths,
                                          const std::vector<std::string>& prefix);

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

class GridMap {
 public:
  enum Label : std::uint8_t { kUnreachable = 0, kDrivable = 1, kLaneCenter = 2 };

  static constexpr int kNeighborWindow = 100;

  GridMap() = default;
  GridMap(Vec2 origin, double resolution, int rows, int cols);

  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool in_bounds(int row, int col) const { return row >= 0 && row < rows_ && col >= 0 && col < cols_; }
  bool in_bounds(const Cell& c) const { return in_bounds(c.row, c.col); }

  // Cell containing p, unclamped (may be out of bounds).
  Cell cell_of(const Vec2& p) const;
  Vec2 center(const Cell& c) const;

  std::uint8_t label(const Cell& c) const { return labels_[index(c)]; }
  std::uint8_t label_at(const Vec2& p) const;
  void set_label(const Cell& c, std::uint8_t value) { labels_[index(c)] = value; }
  bool drivable(const Cell& c) const { return in_bounds(c) && label(c) >= kDrivable; }

  // Rebuilds the transient per-cell vehicle lists. Positions outside the grid
  // are ignored.
  void update_occupancy(std::span<const std::pair<VehicleId, Vec2>> vehicles);

  // Vehicles in rows [row0, row1) x cols [col0, col1), ascending id.
  std::vector<VehicleId> query_rect(int row0, int col0, int row1, int col1) const;

  // The 100 x 100-cell neighbor window centered on `c`:
  // rows [r - 50, r + 50), cols [c - 50, c + 50).
  std::vector<VehicleId> query_window(const Cell& c, int size = kNeighborWindow) const;

 private:
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c.col);
  }

  Vec2 origin_ = Vec2::Zero();
  double resolution_ = 0.5;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> labels_;
  // (cell index, vehicle id), sorted.
  std::vector<std::pair<std::size_t, VehicleId>> occupancy_;
};

// Rasterizes each lane segment as a capsule (segment swept by a disc of
// radius width / 2). Cells whose centers fall inside a capsule are drivable;
// cells within resolution / 2 of a centerline are lane centers. Label 2 wins
// over 1 where capsules overlap.
GridMap build_grid(const LaneNetwork& net, double resolution);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace trajedit
