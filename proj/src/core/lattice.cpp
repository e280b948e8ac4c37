#include "core/lattice.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace trajedit {

namespace {

int floor_index(double value, double step) { return static_cast<int>(std::floor(value / step + 1e-9)); }

}  // namespace

int LatticeSpec::max_s_index() const { return floor_index(s_max, position_step()); }
int LatticeSpec::max_v_index() const { return floor_index(v_max, speed_step()); }
int LatticeSpec::max_t_index() const { return floor_index(t_max, time_step); }

void LatticeSpec::validate() const {
  if (!(time_step > 0.0)) throw ValidationError("lattice time step must be positive");
  if (!(accel > 0.0)) throw ValidationError("lattice acceleration must be positive");
  if (!(v_max > 0.0) || !(s_max > 0.0) || !(t_max > 0.0)) {
    throw ValidationError("lattice bounds v_max, s_max, t_max must be positive");
  }
}

NodeValue node_value(const StateTimeNode& n, const LatticeSpec& spec) {
  return {n.i_s * spec.position_step(), n.i_v * spec.speed_step(), n.i_t * spec.time_step};
}

StateTimeNode nearest_node(double s, double v, double t, const LatticeSpec& spec) {
  return {static_cast<int>(std::lround(s / spec.position_step())), static_cast<int>(std::lround(v / spec.speed_step())),
          static_cast<int>(std::lround(t / spec.time_step))};
}

ObstacleMap::ObstacleMap(const LatticeSpec& spec)
    : ns_(spec.max_s_index() + 1),
      nt_(spec.max_t_index() + 1),
      ds_(spec.position_step()),
      cells_(static_cast<std::size_t>(ns_) * static_cast<std::size_t>(nt_), 0) {}

bool ObstacleMap::blocked(int i_s, int i_t) const {
  if (i_s < 0 || i_s >= ns_ || i_t < 0 || i_t >= nt_) return false;
  return cells_[static_cast<std::size_t>(i_t) * ns_ + i_s] != 0;
}

void ObstacleMap::block(int i_s, int i_t) {
  if (i_s < 0 || i_s >= ns_ || i_t < 0 || i_t >= nt_) return;
  cells_[static_cast<std::size_t>(i_t) * ns_ + i_s] = 1;
}

void ObstacleMap::block_interval(int i_t, double s_lo, double s_hi) {
  if (s_hi < s_lo) return;
  const int lo = std::max(0, static_cast<int>(std::ceil(s_lo / ds_ - 1e-9)));
  const int hi = std::min(ns_ - 1, static_cast<int>(std::floor(s_hi / ds_ + 1e-9)));
  for (int i = lo; i <= hi; ++i) block(i, i_t);
}

std::size_t ObstacleMap::blocked_count() const {
  std::size_t n = 0;
  for (auto c : cells_) n += c;
  return n;
}

ObstacleMap rasterize_obstacles(const std::vector<ObstacleTrack>& tracks, const LatticeSpec& spec, double headway) {
  ObstacleMap map(spec);
  for (const auto& track : tracks) {
    const int nt = std::min(static_cast<int>(track.s.size()), spec.max_t_index() + 1);
    for (int it = 0; it < nt; ++it) {
      if (!track.s[static_cast<std::size_t>(it)]) continue;
      const double s = *track.s[static_cast<std::size_t>(it)];
      map.block_interval(it, s - headway - track.length, s + track.length);
    }
  }
  return map;
}

std::vector<StateTimeNode> successors(const StateTimeNode& n, const LatticeSpec& spec, const ObstacleMap* obstacles) {
  std::vector<StateTimeNode> out;
  out.reserve(3);
  const int max_s = spec.max_s_index();
  const int max_v = spec.max_v_index();
  const int max_t = spec.max_t_index();
  for (int dv : {1, 0, -1}) {
    const StateTimeNode next{n.i_s + 2 * n.i_v + dv, n.i_v + dv, n.i_t + 1};
    if (next.i_v < 0 || next.i_v > max_v) continue;
    if (next.i_s < 0 || next.i_s > max_s) continue;
    if (next.i_t > max_t) continue;
    if (obstacles && obstacles->blocked(next.i_s, next.i_t)) continue;
    out.push_back(next);
  }
  return out;
}

bool is_transition(const StateTimeNode& a, const StateTimeNode& b) {
  const int dv = b.i_v - a.i_v;
  return b.i_t == a.i_t + 1 && dv >= -1 && dv <= 1 && b.i_s == a.i_s + 2 * a.i_v + dv;
}

double goal_distance(const StateTimeNode& n, const StateTimeNode& goal, const LatticeSpec& spec) {
  const NodeValue a = node_value(n, spec);
  const NodeValue b = node_value(goal, spec);
  const double ds = a.s - b.s, dv = a.v - b.v, dt = a.t - b.t;
  return spec.distance_weight * std::sqrt(ds * ds + dv * dv + dt * dt);
}

CoarseTrajectory search(const StateTimeNode& start, const StateTimeNode& goal, const LatticeSpec& spec,
                        const ObstacleMap& obstacles, SearchStats* stats) {
  spec.validate();
  const int max_s = spec.max_s_index();
  const int max_v = spec.max_v_index();
  if (start.i_s < 0 || start.i_s > max_s || start.i_v < 0 || start.i_v > max_v || start.i_t < 0 ||
      start.i_t > spec.max_t_index()) {
    throw SearchError("lattice start node is out of bounds");
  }
  if (obstacles.blocked(start.i_s, start.i_t)) throw SearchError("lattice start node is blocked by another vehicle");

  const auto ns = static_cast<std::uint64_t>(max_s + 1);
  const auto nv = static_cast<std::uint64_t>(max_v + 1);
  auto key = [&](const StateTimeNode& n) {
    return (static_cast<std::uint64_t>(n.i_t) * nv + static_cast<std::uint64_t>(n.i_v)) * ns +
           static_cast<std::uint64_t>(n.i_s);
  };

  struct Record {
    StateTimeNode node;
    std::uint64_t parent;
    bool has_parent;
    double h;
    bool closed;
  };
  struct Entry {
    double f, h;
    int i_t, i_s, i_v;
    std::uint64_t key;
    bool operator>(const Entry& o) const {
      return std::tie(f, h, i_t, i_s, i_v) > std::tie(o.f, o.h, o.i_t, o.i_s, o.i_v);
    }
  };

  const double accel_term = spec.accel_weight / spec.time_step;
  std::unordered_map<std::uint64_t, Record> records;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const double h0 = goal_distance(start, goal, spec);
  records.emplace(key(start), Record{start, 0, false, h0, false});
  open.push({h0, h0, start.i_t, start.i_s, start.i_v, key(start)});

  SearchStats local;
  bool reached = false;
  std::uint64_t best_key = key(start);
  std::tuple<double, double, int, int, int> best{goal_distance(start, goal, spec), h0, start.i_t, start.i_s, start.i_v};

  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    Record& rec = records.at(top.key);
    if (rec.closed || top.h != rec.h) continue;
    rec.closed = true;
    ++local.expansions;
    const StateTimeNode cur = rec.node;

    const std::tuple<double, double, int, int, int> rank{goal_distance(cur, goal, spec), rec.h, cur.i_t, cur.i_s, cur.i_v};
    if (rank < best) {
      best = rank;
      best_key = top.key;
    }
    if (cur == goal) {
      reached = true;
      best_key = top.key;
      break;
    }
    if (local.expansions >= spec.max_expansions) {
      local.capped = true;
      break;
    }

    const double v_cur = cur.i_v * spec.speed_step();
    for (const StateTimeNode& nb : successors(cur, spec, &obstacles)) {
      const double h = goal_distance(nb, goal, spec) + accel_term * std::abs(nb.i_v * spec.speed_step() - v_cur);
      const std::uint64_t k = key(nb);
      auto it = records.find(k);
      if (it == records.end()) {
        records.emplace(k, Record{nb, top.key, true, h, false});
      } else if (!it->second.closed && h < it->second.h) {
        it->second.parent = top.key;
        it->second.has_parent = true;
        it->second.h = h;
      } else {
        continue;
      }
      open.push({static_cast<double>(nb.i_t - start.i_t) + h, h, nb.i_t, nb.i_s, nb.i_v, k});
    }
  }

  CoarseTrajectory out;
  out.reached_goal = reached;
  for (std::uint64_t k = best_key;;) {
    const Record& r = records.at(k);
    out.nodes.push_back(r.node);
    if (!r.has_parent) break;
    k = r.parent;
  }
  std::reverse(out.nodes.begin(), out.nodes.end());
  if (stats) *stats = local;
  return out;
}

}  // namespace trajedit
