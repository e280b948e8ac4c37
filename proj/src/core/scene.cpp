#include "core/scene.hpp"

#include "core/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace trajedit {

using nlohmann::json;

const Lane& LaneNetwork::lane(const std::string& id) const {
  auto it = lanes.find(id);
  if (it == lanes.end()) throw NotFoundError("unknown lane '" + id + "'");
  return it->second;
}

namespace {

Vec2 parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(where + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<std::string> parse_string_list(const json& j, const std::string& where) {
  std::vector<std::string> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw ParseError(where + ": expected a list of ids");
  for (const auto& e : j) {
    if (!e.is_string()) throw ParseError(where + ": ids must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("scenario root must be an object");

  Scenario sc;
  try {
    if (root.contains("meta")) {
      const auto& meta = root.at("meta");
      sc.name = meta.value("name", std::string{});
      sc.grid_resolution = meta.value("grid_resolution", 0.5);
    }
    if (!(sc.grid_resolution > 0.0)) throw ValidationError("meta.grid_resolution must be positive");

    if (!root.contains("lanes") || !root.at("lanes").is_array())
      throw ParseError("scenario needs a 'lanes' list");
    for (const auto& jl : root.at("lanes")) {
      Lane lane;
      if (!jl.contains("id") || !jl.at("id").is_string()) throw ParseError("lane without string 'id'");
      lane.id = jl.at("id").get<std::string>();
      const std::string where = "lane '" + lane.id + "'";
      lane.width = jl.value("width", 3.5);
      if (!jl.contains("centerline") || !jl.at("centerline").is_array())
        throw ParseError(where + ": missing centerline");
      for (const auto& p : jl.at("centerline")) lane.centerline.push_back(parse_point(p, where));
      if (jl.contains("successors")) lane.successors = parse_string_list(jl.at("successors"), where);
      if (!sc.network.lanes.emplace(lane.id, lane).second)
        throw ValidationError("duplicate lane id '" + lane.id + "'");
    }

    if (root.contains("stop_lines")) {
      for (const auto& js : root.at("stop_lines")) {
        StopLine line;
        line.id = js.value("id", std::string{});
        line.point = parse_point(js.at("point"), "stop line '" + line.id + "'");
        const auto red = js.at("red");
        line.red_from = red.at(0).get<double>();
        line.red_until = red.at(1).get<double>();
        sc.stop_lines.push_back(line);
      }
    }

    if (root.contains("vehicles")) {
      for (const auto& jv : root.at("vehicles")) {
        VehicleSpawn v;
        v.id = jv.at("id").get<int>();
        v.lanes = parse_string_list(jv.at("path"), "vehicle " + std::to_string(v.id));
        v.s = jv.value("s", 0.0);
        v.d = jv.value("d", 0.0);
        v.speed = jv.value("speed", 0.0);
        v.desired_speed = jv.value("desired_speed", 10.0);
        sc.vehicles.push_back(v);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }

  validate_network(sc.network, sc.grid_resolution);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

void check_acyclic(const LaneNetwork& net) {
  enum class Mark { kNone, kActive, kDone };
  std::map<std::string, Mark> mark;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    mark[id] = Mark::kActive;
    stack.push_back(id);
    for (const auto& succ : net.lane(id).successors) {
      if (mark[succ] == Mark::kActive) {
        auto from = std::find(stack.begin(), stack.end(), succ);
        std::string cycle;
        for (auto it = from; it != stack.end(); ++it) cycle += *it + " -> ";
        throw ValidationError("lane topology has a cycle: " + cycle + succ);
      }
      if (mark[succ] == Mark::kNone) visit(succ);
    }
    stack.pop_back();
    mark[id] = Mark::kDone;
  };
  for (const auto& [id, lane] : net.lanes) {
    if (mark[id] == Mark::kNone) visit(id);
  }
}

}  // namespace

void validate_network(LaneNetwork& net, double junction_tolerance) {
  for (auto& [id, lane] : net.lanes) {
    lane.predecessors.clear();
    if (lane.centerline.size() < 2)
      throw ValidationError("lane '" + id + "' has a degenerate centerline (fewer than 2 points)");
    for (std::size_t i = 1; i < lane.centerline.size(); ++i) {
      if ((lane.centerline[i] - lane.centerline[i - 1]).norm() == 0.0)
        throw ValidationError("lane '" + id + "' has repeated consecutive centerline points");
    }
    if (!(lane.width > 0.0)) throw ValidationError("lane '" + id + "' has non-positive width");
  }
  for (auto& [id, lane] : net.lanes) {
    for (const auto& succ : lane.successors) {
      auto it = net.lanes.find(succ);
      if (it == net.lanes.end())
        throw ValidationError("lane '" + id + "' references unknown successor '" + succ + "'");
      const double gap = (it->second.centerline.front() - lane.centerline.back()).norm();
      if (gap > junction_tolerance)
        throw ValidationError("lane '" + succ + "' does not start where its predecessor '" + id + "' ends");
      it->second.predecessors.push_back(id);
    }
  }

  check_acyclic(net);
  net.bounds = compute_bounds(net);
}

Bounds compute_bounds(const LaneNetwork& net, double margin) {
  if (net.lanes.empty()) return {};
  Bounds b;
  b.min = Vec2::Constant(std::numeric_limits<double>::infinity());
  b.max = Vec2::Constant(-std::numeric_limits<double>::infinity());
  for (const auto& [id, lane] : net.lanes) {
    const double r = 0.5 * lane.width + margin;
    for (const auto& p : lane.centerline) {
      b.min = b.min.cwiseMin(p - Vec2::Constant(r));
      b.max = b.max.cwiseMax(p + Vec2::Constant(r));
    }
  }
  return b;
}

std::vector<TopoPath> topo_paths(const LaneNetwork& net) {
  check_acyclic(net);
  std::vector<TopoPath> out;
  std::vector<std::string> chain;
  std::function<void(const std::string&)> dfs = [&](const std::string& id) {
    chain.push_back(id);
    const Lane& lane = net.lane(id);
    if (lane.successors.empty()) {
      TopoPath path;
      path.lanes = chain;
      for (const auto& lid : chain) {
        for (const auto& p : net.lane(lid).centerline) {
          if (!path.points.empty() && (path.points.back() - p).norm() < 1e-6) continue;
          path.points.push_back(p);
        }
      }
      out.push_back(std::move(path));
    } else {
      auto succs = lane.successors;
      std::sort(succs.begin(), succs.end());
      for (const auto& s : succs) dfs(s);
    }
    chain.pop_back();
  };
  for (const auto& [id, lane] : net.lanes) {
    bool is_source = true;
    for (const auto& [other_id, other] : net.lanes) {
      if (std::find(other.successors.begin(), other.successors.end(), id) != other.successors.end()) {
        is_source = false;
        break;
      }
    }
    if (is_source) dfs(id);
  }
  return out;
}

std::optional<std::size_t> find_topo_path(const std::vector<TopoPath>& paths,
                                          const std::vector<std::string>& prefix) {
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& lanes = paths[i].lanes;
    if (prefix.size() <= lanes.size() && std::equal(prefix.begin(), prefix.end(), lanes.begin())) return i;
  }
  return std::nullopt;
}

GridMap::GridMap(Vec2 origin, double resolution, int rows, int cols)
    : origin_(std::move(origin)),
      resolution_(resolution),
      rows_(rows),
      cols_(cols),
      labels_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), kUnreachable) {}

Cell GridMap::cell_of(const Vec2& p) const {
  return {static_cast<int>(std::floor((p.y() - origin_.y()) / resolution_)),
          static_cast<int>(std::floor((p.x() - origin_.x()) / resolution_))};
}

Vec2 GridMap::center(const Cell& c) const {
  return {origin_.x() + (c.col + 0.5) * resolution_, origin_.y() + (c.row + 0.5) * resolution_};
}

std::uint8_t GridMap::label_at(const Vec2& p) const {
  const Cell c = cell_of(p);
  return in_bounds(c) ? label(c) : static_cast<std::uint8_t>(kUnreachable);
}

void GridMap::update_occupancy(std::span<const std::pair<VehicleId, Vec2>> vehicles) {
  occupancy_.clear();
  occupancy_.reserve(vehicles.size());
  for (const auto& [id, p] : vehicles) {
    const Cell c = cell_of(p);
    if (!in_bounds(c)) continue;
    occupancy_.emplace_back(index(c), id);
  }
  std::sort(occupancy_.begin(), occupancy_.end());
}

std::vector<VehicleId> GridMap::query_rect(int row0, int col0, int row1, int col1) const {
  std::vector<VehicleId> out;
  row0 = std::max(row0, 0);
  col0 = std::max(col0, 0);
  row1 = std::min(row1, rows_);
  col1 = std::min(col1, cols_);
  if (row0 >= row1 || col0 >= col1 || occupancy_.empty()) return out;
  for (int r = row0; r < row1; ++r) {
    const std::size_t lo = index({r, col0});
    const std::size_t hi = index({r, col1 - 1});
    auto it = std::lower_bound(occupancy_.begin(), occupancy_.end(), std::make_pair(lo, std::numeric_limits<VehicleId>::min()));
    for (; it != occupancy_.end() && it->first <= hi; ++it) out.push_back(it->second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VehicleId> GridMap::query_window(const Cell& c, int size) const {
  const int half = size / 2;
  return query_rect(c.row - half, c.col - half, c.row - half + size, c.col - half + size);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

GridMap build_grid(const LaneNetwork& net, double resolution) {
  if (!(resolution > 0.0)) throw ValidationError("grid resolution must be positive");
  const Bounds& b = net.bounds;
  const int cols = std::max(1, static_cast<int>(std::ceil(b.width() / resolution)));
  const int rows = std::max(1, static_cast<int>(std::ceil(b.height() / resolution)));
  GridMap grid(b.min, resolution, rows, cols);

  const double center_band = 0.5 * resolution;
  for (const auto& [id, lane] : net.lanes) {
    const double radius = 0.5 * lane.width;
    for (std::size_t i = 1; i < lane.centerline.size(); ++i) {
      const Vec2& a = lane.centerline[i - 1];
      const Vec2& q = lane.centerline[i];
      const Vec2 lo = a.cwiseMin(q) - Vec2::Constant(radius);
      const Vec2 hi = a.cwiseMax(q) + Vec2::Constant(radius);
      const Cell c0 = grid.cell_of(lo);
      const Cell c1 = grid.cell_of(hi);
      for (int r = std::max(c0.row, 0); r <= std::min(c1.row, rows - 1); ++r) {
        for (int c = std::max(c0.col, 0); c <= std::min(c1.col, cols - 1); ++c) {
          const Cell cell{r, c};
          const double dist = point_segment_distance(grid.center(cell), a, q);
          if (dist > radius) continue;
          const std::uint8_t value = dist <= center_band ? GridMap::kLaneCenter : GridMap::kDrivable;
          if (value > grid.label(cell)) grid.set_label(cell, value);
        }
      }
    }
  }
  return grid;
}

}  // namespace trajedit
