#include "core/errors.hpp"
#include "core/scene.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace trajedit;

namespace {

const char* kThreeLanes = R"({
  "meta": {"name": "three", "grid_resolution": 0.5},
  "lanes": [
    {"id": "A", "width": 3.5, "centerline": [[0, 0], [50, 0]], "successors": ["B"]},
    {"id": "B", "width": 3.5, "centerline": [[50, 0], [100, 0]], "successors": ["C"]},
    {"id": "C", "width": 3.5, "centerline": [[100, 0], [150, 0]]}
  ]
})";

Lane straight_lane(const std::string& id, Vec2 a, Vec2 b, double width = 3.5) {
  Lane l;
  l.id = id;
  l.centerline = {a, b};
  l.width = width;
  return l;
}

LaneNetwork network_of(std::vector<Lane> lanes, Bounds bounds) {
  LaneNetwork net;
  for (auto& l : lanes) net.lanes[l.id] = l;
  net.bounds = bounds;
  return net;
}

std::string chain_json(const std::vector<std::tuple<std::string, Vec2, Vec2, std::vector<std::string>>>& lanes) {
  std::string out = R"({"lanes": [)";
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const auto& [id, a, b, succ] = lanes[i];
    out += R"({"id": ")" + id + R"(", "centerline": [[)" + std::to_string(a.x()) + "," + std::to_string(a.y()) +
           "],[" + std::to_string(b.x()) + "," + std::to_string(b.y()) + R"(]], "successors": [)";
    for (std::size_t k = 0; k < succ.size(); ++k) out += (k ? ",\"" : "\"") + succ[k] + "\"";
    out += "]}";
    if (i + 1 < lanes.size()) out += ",";
  }
  return out + "]}";
}

}  // namespace

TEST(LoadScenario, StraightChainKeepsSuccessors) {
  const Scenario sc = parse_scenario(kThreeLanes);
  ASSERT_EQ(sc.network.lanes.size(), 3u);
  EXPECT_EQ(sc.network.lane("A").successors, std::vector<std::string>{"B"});
  EXPECT_EQ(sc.network.lane("B").successors, std::vector<std::string>{"C"});
  EXPECT_TRUE(sc.network.lane("C").successors.empty());
  EXPECT_EQ(sc.network.lane("B").predecessors, std::vector<std::string>{"A"});
}

TEST(LoadScenario, DanglingSuccessorNamesTheLane) {
  const std::string text = R"({"lanes": [{"id": "A", "centerline": [[0,0],[10,0]], "successors": ["L9"]}]})";
  try {
    parse_scenario(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("L9"), std::string::npos);
  }
}

TEST(LoadScenario, DegenerateCenterlineNamesTheLane) {
  const std::string text = R"({"lanes": [{"id": "bad", "centerline": [[0,0]]}]})";
  try {
    parse_scenario(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
}

TEST(LoadScenario, MalformedJsonIsAParseError) {
  EXPECT_THROW(parse_scenario("{\"lanes\": [}"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"lanes": [{"centerline": [[0,0],[1,0]]}]})"), ParseError);
}

TEST(LoadScenario, MissingFileIsNotFound) {
  EXPECT_THROW(load_scenario("/nonexistent/scene.json"), NotFoundError);
}

TEST(LoadScenario, DisconnectedSuccessorIsRejected) {
  const std::string text = R"({"lanes": [
    {"id": "A", "centerline": [[0,0],[10,0]], "successors": ["B"]},
    {"id": "B", "centerline": [[12,0],[20,0]]}]})";
  EXPECT_THROW(parse_scenario(text), ValidationError);
}

TEST(LoadScenario, CurvyRoadBoundsContainInflatedCenterlines) {
  const Scenario sc = load_scenario(std::string(TRAJEDIT_SCENARIO_DIR) + "/curvy_road.json");
  ASSERT_EQ(sc.network.lanes.size(), 3u);
  const Bounds& b = sc.network.bounds;
  for (const auto& [id, lane] : sc.network.lanes) {
    const double r = 0.5 * lane.width;
    for (const auto& p : lane.centerline) {
      EXPECT_TRUE(b.contains(p + Vec2(r, r)) && b.contains(p - Vec2(r, r))) << id;
    }
  }
}

TEST(LoadScenario, BundledScenariosAllLoad) {
  for (const char* name : {"straight_road", "curvy_road", "crosswalk", "intersection", "congestion"}) {
    const Scenario sc = load_scenario(std::string(TRAJEDIT_SCENARIO_DIR) + "/" + name + ".json");
    EXPECT_FALSE(topo_paths(sc.network).empty()) << name;
  }
}

TEST(BuildGrid, EmptyNetworkIsAllUnreachable) {
  LaneNetwork net;
  net.bounds = {Vec2(0, 0), Vec2(10, 10)};
  const GridMap g = build_grid(net, 0.5);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) EXPECT_EQ(g.label({r, c}), 0);
  }
}

TEST(BuildGrid, SingleLaneBandMatchesCapsuleOracle) {
  // Row centers sit at y = -2.5, -2.0, ..., so the centerline y = 0 hits one.
  const LaneNetwork net = network_of({straight_lane("A", {0, 0}, {50, 0})}, {Vec2(-2, -2.75), Vec2(52, 2.75)});
  const GridMap g = build_grid(net, 0.5);
  const int col = g.cell_of({25.0, 0.0}).col;
  int band = 0, centers = 0;
  for (int r = 0; r < g.rows(); ++r) {
    band += g.label({r, col}) >= 1;
    centers += g.label({r, col}) == 2;
  }
  EXPECT_EQ(band, 7);
  EXPECT_EQ(centers, 1);
  EXPECT_EQ(g.label(g.cell_of({25.0, 0.0})), 2);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      EXPECT_EQ(g.label({r, c}), oracle::expected_label(g.center({r, c}), net, 0.5)) << r << "," << c;
    }
  }
}

TEST(BuildGrid, AdjacentLanesFormOneBandWithTwoCenterRows) {
  const LaneNetwork net = network_of({straight_lane("A", {0, 0}, {40, 0}), straight_lane("B", {0, 3.5}, {40, 3.5})},
                                     {Vec2(-2, -2.75), Vec2(42, 6.25)});
  const GridMap g = build_grid(net, 0.5);
  const int col = g.cell_of({20.0, 0.0}).col;
  int first = -1, last = -1, centers = 0;
  for (int r = 0; r < g.rows(); ++r) {
    if (g.label({r, col}) >= 1) {
      if (first < 0) first = r;
      last = r;
    }
    centers += g.label({r, col}) == 2;
  }
  for (int r = first; r <= last; ++r) EXPECT_GE(g.label({r, col}), 1) << "gap at row " << r;
  EXPECT_EQ(centers, 2);
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      EXPECT_EQ(g.label({r, c}), oracle::expected_label(g.center({r, c}), net, 0.5));
    }
  }
}

TEST(BuildGrid, CurvyRoadMatchesOracleAtTwoResolutions) {
  const Scenario sc = load_scenario(std::string(TRAJEDIT_SCENARIO_DIR) + "/curvy_road.json");
  for (double res : {0.5, 0.25}) {
    const GridMap g = build_grid(sc.network, res);
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> rr(0, g.rows() - 1), cc(0, g.cols() - 1);
    for (int i = 0; i < 4000; ++i) {
      const Cell c{rr(rng), cc(rng)};
      const Vec2 p = g.center(c);
      const int want = oracle::expected_label(p, sc.network, res);
      ASSERT_EQ(g.label(c), want) << "res " << res << " at " << p.transpose();
      if (want == 2) {
        double best = 1e9;
        for (const auto& [id, lane] : sc.network.lanes) best = std::min(best, oracle::polyline_distance(p, lane.centerline));
        EXPECT_LE(best, 0.5 * res + 1e-9);
      }
    }
  }
}

TEST(BuildGrid, CellRoundTripStaysWithinResolution) {
  const LaneNetwork net = network_of({straight_lane("A", {0, 0}, {20, 0})}, {Vec2(-3, -3), Vec2(23, 3)});
  const GridMap g = build_grid(net, 0.5);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> x(-3, 23), y(-3, 3);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p(x(rng), y(rng));
    EXPECT_LT((g.center(g.cell_of(p)) - p).norm(), 0.5);
  }
}

TEST(TopoPaths, IsolatedLaneIsOnePath) {
  const Scenario sc = parse_scenario(R"({"lanes": [{"id": "A", "centerline": [[0,0],[5,0],[10,1]]}]})");
  const auto paths = topo_paths(sc.network);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].points, sc.network.lane("A").centerline);
}

TEST(TopoPaths, YSplitGivesTwoPathsWithoutDuplicateJunctionPoints) {
  const Scenario sc = parse_scenario(chain_json({{"A", {0, 0}, {10, 0}, {"B", "C"}},
                                                 {"B", {10, 0}, {20, 3}, {}},
                                                 {"C", {10, 0}, {20, -3}, {}}}));
  const auto paths = topo_paths(sc.network);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0].lanes, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(paths[1].lanes, (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(paths[0].points.size(), 3u);
}

TEST(TopoPaths, FullyConnectedLayersMatchChainEnumeration) {
  // 2 sources x 2 middle lanes x 2 sinks, every layer fully connected.
  const std::vector<std::tuple<std::string, Vec2, Vec2, std::vector<std::string>>> lanes{
      {"S0", {0, 0}, {10, 0}, {"M0", "M1"}}, {"S1", {0, 3}, {10, 0}, {"M0", "M1"}},
      {"M0", {10, 0}, {20, 0}, {"T0", "T1"}}, {"M1", {10, 0}, {20, 0.2}, {"T0", "T1"}},
      {"T0", {20, 0}, {30, 0}, {}},           {"T1", {20, -0.2}, {30, 3}, {}}};
  const Scenario sc = parse_scenario(chain_json(lanes));
  const auto paths = topo_paths(sc.network);
  EXPECT_EQ(paths.size(), oracle::chain_count(sc.network));
  EXPECT_EQ(paths.size(), 8u);
  // Depth-first, ascending ids: the first chain uses the smallest id at each level.
  EXPECT_EQ(paths.front().lanes, (std::vector<std::string>{"S0", "M0", "T0"}));
  EXPECT_EQ(paths.back().lanes, (std::vector<std::string>{"S1", "M1", "T1"}));
  EXPECT_EQ(topo_paths(sc.network).size(), paths.size());
}

TEST(TopoPaths, IntersectionCountMatchesOracle) {
  const Scenario sc = load_scenario(std::string(TRAJEDIT_SCENARIO_DIR) + "/intersection.json");
  EXPECT_EQ(topo_paths(sc.network).size(), oracle::chain_count(sc.network));
}

TEST(TopoPaths, CycleIsRejectedAndListed) {
  const std::string text = chain_json({{"A", {0, 0}, {10, 0}, {"B"}}, {"B", {10, 0}, {0, 0}, {"A"}}});
  try {
    parse_scenario(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cycle"), std::string::npos);
    EXPECT_NE(msg.find("A"), std::string::npos);
    EXPECT_NE(msg.find("B"), std::string::npos);
  }
}

TEST(Occupancy, EmptyWorldHasEmptyWindows) {
  const LaneNetwork net = network_of({straight_lane("A", {0, 0}, {100, 0})}, {Vec2(-2, -60), Vec2(102, 60)});
  GridMap g = build_grid(net, 0.5);
  g.update_occupancy({});
  EXPECT_TRUE(g.query_window({100, 100}).empty());
}

TEST(Occupancy, WindowContainsNearbyVehicleOnly) {
  const LaneNetwork net = network_of({straight_lane("A", {0, 0}, {150, 0})}, {Vec2(-2, -2), Vec2(152, 2)});
  GridMap g = build_grid(net, 0.5);
  const std::vector<std::pair<VehicleId, Vec2>> vs{{7, Vec2(10.0, 0.0)}};
  g.update_occupancy(vs);
  const Cell c = g.cell_of({10.0, 0.0});
  EXPECT_EQ(g.query_window(c), std::vector<VehicleId>{7});
  EXPECT_TRUE(g.query_window({c.row, c.col + 200}).empty());
}

TEST(Occupancy, RandomWindowsMatchBruteForceFilter) {
  const LaneNetwork net = network_of({straight_lane("A", {0, 0}, {100, 0})}, {Vec2(0, -50), Vec2(100, 50)});
  GridMap g = build_grid(net, 0.5);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> x(-5, 105), y(-55, 55);
  std::vector<std::pair<VehicleId, Vec2>> vs;
  for (int i = 0; i < 50; ++i) vs.push_back({i, Vec2(x(rng), y(rng))});
  g.update_occupancy(vs);
  std::uniform_int_distribution<int> rr(-20, g.rows() + 20), cc(-20, g.cols() + 20);
  for (int q = 0; q < 200; ++q) {
    const Cell center{rr(rng), cc(rng)};
    std::vector<VehicleId> want;
    for (const auto& [id, p] : vs) {
      const Cell c = g.cell_of(p);
      if (!g.in_bounds(c)) continue;
      if (c.row >= center.row - 50 && c.row < center.row + 50 && c.col >= center.col - 50 && c.col < center.col + 50) {
        want.push_back(id);
      }
    }
    EXPECT_EQ(g.query_window(center), want);
  }
}
