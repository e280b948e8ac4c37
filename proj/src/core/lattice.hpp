#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace trajedit {

// Discretization of the (s, v^s, t) space along one path. Speed and position
// steps follow from constant-acceleration motion over one time step:
// dv = a * dt, ds = a * dt^2 / 2.
struct LatticeSpec {
  double time_step = 0.5;
  double accel = 5.0;
  double v_max = 20.0;
  double s_max = 100.0;
  double t_max = 10.0;
  double distance_weight = 1.0;  // w_d
  double accel_weight = 2.0;     // w_a
  std::size_t max_expansions = 5'000'000;

  double speed_step() const { return accel * time_step; }
  double position_step() const { return 0.5 * accel * time_step * time_step; }
  int max_s_index() const;
  int max_v_index() const;
  int max_t_index() const;

  // Throws ValidationError for non-positive parameters.
  void validate() const;
};

struct StateTimeNode {
  int i_s = 0;
  int i_v = 0;
  int i_t = 0;

  auto operator<=>(const StateTimeNode&) const = default;
};

struct NodeValue {
  double s = 0.0;
  double v = 0.0;
  double t = 0.0;
};

NodeValue node_value(const StateTimeNode& n, const LatticeSpec& spec);

// Nearest lattice node to a continuous state (each axis rounded).
StateTimeNode nearest_node(double s, double v, double t, const LatticeSpec& spec);

// Blocked (i_s, i_t) cells; speed is not an obstacle dimension.
class ObstacleMap {
 public:
  ObstacleMap() = default;
  explicit ObstacleMap(const LatticeSpec& spec);

  bool blocked(int i_s, int i_t) const;
  void block(int i_s, int i_t);
  // Blocks every i_s with s in [s_lo, s_hi] at time index i_t.
  void block_interval(int i_t, double s_lo, double s_hi);
  std::size_t blocked_count() const;

 private:
  int ns_ = 0;
  int nt_ = 0;
  double ds_ = 1.0;
  std::vector<std::uint8_t> cells_;
};

// Predicted longitudinal position of another vehicle on the searched path,
// one entry per lattice time index; nullopt where it does not overlap the
// path (or has left the scene).
struct ObstacleTrack {
  std::vector<std::optional<double>> s;
  double length = 4.5;
};

// Each track blocks [s_j - headway - length, s_j + length] at its times,
// where `headway` is the searching vehicle's jam headway s0.
ObstacleMap rasterize_obstacles(const std::vector<ObstacleTrack>& tracks, const LatticeSpec& spec, double headway);

// Accelerate, maintain, decelerate; out-of-bounds and blocked nodes dropped.
std::vector<StateTimeNode> successors(const StateTimeNode& n, const LatticeSpec& spec,
                                      const ObstacleMap* obstacles = nullptr);

// True if `b` is one of the three transitions out of `a` (bounds ignored).
bool is_transition(const StateTimeNode& a, const StateTimeNode& b);

struct CoarseTrajectory {
  std::vector<StateTimeNode> nodes;
  bool reached_goal = false;
};

struct SearchStats {
  std::size_t expansions = 0;
  bool capped = false;
};

// Distance part of the heuristic: w_d * |(s, v, t) - goal|.
double goal_distance(const StateTimeNode& n, const StateTimeNode& goal, const LatticeSpec& spec);

// A* with uniform step cost. f = steps + w_d * |q - goal| + w_a * |v - v_parent| / dt.
// If the goal is not reached, returns the path to the expanded node with the
// smallest distance term (ties: smallest full heuristic). Throws SearchError
// if the start is blocked or out of bounds.
CoarseTrajectory search(const StateTimeNode& start, const StateTimeNode& goal, const LatticeSpec& spec,
                        const ObstacleMap& obstacles, SearchStats* stats = nullptr);

}  // namespace trajedit
