#include "core/errors.hpp"
#include "core/grid_planner.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace trajedit;

namespace {

// rows x cols grid at 0.5 m with every cell set to `fill`.
GridMap blank(int rows, int cols, std::uint8_t fill) {
  GridMap g(Vec2::Zero(), 0.5, rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) g.set_label({r, c}, fill);
  }
  return g;
}

// Turning angle per unit length at each interior vertex.
double max_discrete_curvature(const Polyline& pts) {
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i] - pts[i - 1], b = pts[i + 1] - pts[i];
    const double turn = std::abs(std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b)));
    best = std::max(best, turn / (0.5 * (a.norm() + b.norm())));
  }
  return best;
}

// An L-shaped corridor 7 cells wide turning 90 degrees, centered rows/cols labeled 2.
GridMap corner_corridor() {
  GridMap g = blank(60, 60, 0);
  for (int r = 5; r <= 11; ++r) {
    for (int c = 5; c <= 55; ++c) g.set_label({r, c}, r == 8 ? 2 : 1);
  }
  for (int c = 49; c <= 55; ++c) {
    for (int r = 5; r <= 55; ++r) g.set_label({r, c}, std::max<std::uint8_t>(g.label({r, c}), c == 52 ? 2 : 1));
  }
  return g;
}

}  // namespace

TEST(Heuristic, LaneCenterBiasValues) {
  EXPECT_NEAR(lane_center_heuristic(10.0, 2, 20.0, -1.5), 10.0 + 20.0 * std::exp(-3.0), 1e-12);
  EXPECT_NEAR(lane_center_heuristic(10.0, 2, 20.0, -1.5), 10.996, 1e-3);
  EXPECT_NEAR(lane_center_heuristic(10.0, 1, 20.0, -1.5), 14.463, 1e-3);
}

TEST(PlanGridPath, StartEqualsGoalIsOneCell) {
  const GridMap g = blank(10, 10, 1);
  PlanRequest req;
  req.waypoints = {g.center({3, 3}), g.center({3, 3})};
  const GridPlan plan = plan_grid_path(g, req);
  ASSERT_EQ(plan.cells.size(), 1u);
  EXPECT_EQ(plan.cells[0], (Cell{3, 3}));
}

TEST(PlanGridPath, CorridorFollowsTheLaneCenterRow) {
  GridMap g = blank(7, 60, 1);
  for (int c = 0; c < 60; ++c) g.set_label({3, c}, 2);
  PlanRequest req;
  req.waypoints = {g.center({3, 0}), g.center({3, 59})};
  const GridPlan plan = plan_grid_path(g, req);
  for (const Cell& c : plan.cells) EXPECT_EQ(g.label(c), 2) << c.row << "," << c.col;
  // The lane-center route is also the Euclidean optimum here.
  EXPECT_NEAR(plan.segment_costs[0], oracle::dijkstra_cost(g, {3, 0}, {3, 59}), 1e-9);
}

TEST(PlanGridPath, UndrivableWaypointAndMissingRouteAreErrors) {
  GridMap g = blank(10, 20, 1);
  g.set_label({5, 5}, 0);
  PlanRequest req;
  req.waypoints = {g.center({1, 1}), g.center({5, 5})};
  EXPECT_THROW(plan_grid_path(g, req), PlanningError);

  for (int r = 0; r < 10; ++r) g.set_label({r, 10}, 0);
  req.waypoints = {g.center({1, 1}), g.center({1, 5}), g.center({1, 15})};
  try {
    plan_grid_path(g, req);
    FAIL() << "expected PlanningError";
  } catch (const PlanningError& e) {
    EXPECT_NE(std::string(e.what()).find("segment 1"), std::string::npos) << e.what();
  }
}

TEST(PlanGridPath, NoCornerCuttingBetweenBlockedOrthogonals) {
  // Two drivable cells touching only diagonally are not connected.
  GridMap g = blank(4, 4, 0);
  g.set_label({1, 1}, 1);
  g.set_label({2, 2}, 1);
  EXPECT_TRUE(astar_cells(g, {1, 1}, {2, 2}, 20.0, -1.5).empty());
  EXPECT_EQ(oracle::dijkstra_cost(g, {1, 1}, {2, 2}), std::numeric_limits<double>::infinity());
}

TEST(PlanGridPath, RandomGridsStayDrivableWithinTheDijkstraBound) {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<int> dim(8, 60);
    const int rows = dim(rng), cols = dim(rng);
    GridMap g = blank(rows, cols, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double x = u(rng);
        g.set_label({r, c}, x < 0.25 ? 0 : (x < 0.4 ? 2 : 1));
      }
    }
    std::uniform_int_distribution<int> rr(0, rows - 1), cc(0, cols - 1);
    Cell a{rr(rng), cc(rng)}, b{rr(rng), cc(rng)};
    g.set_label(a, 1);
    g.set_label(b, 1);
    double cost = 0.0;
    const auto cells = astar_cells(g, a, b, 20.0, -1.5, &cost);
    const double best = oracle::dijkstra_cost(g, a, b);
    if (std::isinf(best)) {
      EXPECT_TRUE(cells.empty()) << "trial " << trial;
      continue;
    }
    ASSERT_FALSE(cells.empty()) << "trial " << trial;
    EXPECT_EQ(cells.front(), a);
    EXPECT_EQ(cells.back(), b);
    double walked = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      EXPECT_GE(g.label(cells[i]), 1);
      if (i == 0) continue;
      const int dr = std::abs(cells[i].row - cells[i - 1].row), dc = std::abs(cells[i].col - cells[i - 1].col);
      ASSERT_LE(std::max(dr, dc), 1);
      walked += (dr && dc ? std::sqrt(2.0) : 1.0) * g.resolution();
    }
    EXPECT_NEAR(walked, cost, 1e-9);
    EXPECT_GE(cost, best - 1e-9);
    EXPECT_LE(cost, best + 20.0 * static_cast<double>(cells.size()) * std::exp(-1.5) + 1e-9);
  }
}

TEST(PlanGridPath, IdenticalRequestsGiveIdenticalPaths) {
  const GridMap g = corner_corridor();
  PlanRequest req;
  req.waypoints = {g.center({8, 6}), g.center({54, 52})};
  EXPECT_EQ(plan_grid_path(g, req).cells, plan_grid_path(g, req).cells);
}

TEST(SmoothAndFit, TwoCellsGiveStraightPath) {
  const GridMap g = blank(5, 5, 1);
  const RefPath p = smooth_and_fit({{2, 1}, {2, 3}}, g);
  EXPECT_NEAR(p.length(), 1.0, 1e-9);
  EXPECT_EQ(p.source(), PathSource::kUser);
}

TEST(SmoothAndFit, StraightCorridorStaysStraight) {
  const GridMap g = blank(5, 110, 1);
  std::vector<Cell> cells;
  for (int c = 5; c < 105; ++c) cells.push_back({2, c});
  const RefPath p = smooth_and_fit(cells, g);
  for (double s = 0.0; s <= p.length(); s += 0.25) EXPECT_LT(std::abs(p.heading(s)), 1e-6);
  EXPECT_NEAR(p.length(), 99 * 0.5, 1e-6);
}

TEST(SmoothAndFit, CornerIsLessCurvedThanTheCellPolyline) {
  const GridMap g = corner_corridor();
  PlanRequest req;
  req.waypoints = {g.center({8, 6}), g.center({54, 52})};
  const GridPlan plan = plan_grid_path(g, req);
  Polyline raw;
  for (const Cell& c : plan.cells) raw.push_back(g.center(c));
  const RefPath p = smooth_and_fit(plan.cells, g);
  EXPECT_LT(max_discrete_curvature(p.sample(0.5)), max_discrete_curvature(raw));
  for (const Vec2& q : p.sample(0.5)) EXPECT_GE(g.label_at(q), 1);
  EXPECT_LT((p.point(0.0) - raw.front()).norm(), 1e-9);
  EXPECT_LT((p.point(p.length()) - raw.back()).norm(), 1e-9);
}

TEST(SmoothAndFit, LeavingTheDrivableAreaIsAnError) {
  // Cells alternate between two far-apart rows; the smoothed curve crosses
  // the empty rows between them.
  GridMap g = blank(40, 40, 0);
  std::vector<Cell> zig;
  for (int c = 0; c < 40; ++c) {
    const int r = (c / 5) % 2 == 0 ? 2 : 30;
    zig.push_back({r, c});
    g.set_label({r, c}, 1);
  }
  EXPECT_THROW(smooth_and_fit(zig, g), PlanningError);
}

TEST(PlanUserPath, PassesThroughTheWaypoints) {
  const GridMap g = corner_corridor();
  PlanRequest req;
  req.waypoints = {g.center({8, 6}) + Vec2(0.1, 0.05), Vec2(26.2, 4.3), g.center({54, 52})};
  const RefPath p = plan_user_path(g, req);
  for (const Vec2& w : req.waypoints) {
    double best = 1e9;
    for (const Vec2& q : p.sample(0.05)) best = std::min(best, (q - w).norm());
    EXPECT_LT(best, 0.05);
  }
}

TEST(PathRegistry, StartsWithTopoPathsOnly) {
  LaneNetwork net;
  Lane a;
  a.id = "A";
  a.centerline = {{0, 0}, {30, 0}};
  net.lanes["A"] = a;
  validate_network(net, 0.5);
  net.bounds = compute_bounds(net);
  const PathRegistry reg = build_topo_registry(net);
  EXPECT_EQ(reg.size(), 1u);
  EXPECT_TRUE(reg.user_ids().empty());
  EXPECT_EQ(reg.topo_ids().size(), 1u);
}

TEST(PathRegistry, RegisteringTwiceGivesDistinctIdsAndKeepsTopo) {
  LaneNetwork net;
  Lane a;
  a.id = "A";
  a.centerline = {{0, 0}, {30, 0}};
  net.lanes["A"] = a;
  PathRegistry reg = build_topo_registry(net);
  const PathId topo = reg.topo_ids().front();
  const double topo_len = reg.path(topo).length();
  const RefPath user = make_path({{0, 1}, {10, 1}}, PathSource::kUser);
  const PathId id1 = reg.register_user_path(user);
  const PathId id2 = reg.register_user_path(user);
  EXPECT_NE(id1, id2);
  EXPECT_NEAR(reg.path(id1).length(), 10.0, 1e-9);
  EXPECT_EQ(reg.path(id1).control_points(), user.control_points());
  EXPECT_EQ(reg.user_ids(), (std::vector<PathId>{id1, id2}));
  EXPECT_EQ(reg.path(topo).length(), topo_len);
  EXPECT_THROW(reg.entry(999), NotFoundError);
}
