#include "core/errors.hpp"
#include "core/ref_path.hpp"
#include "core/scene.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace trajedit;

namespace {

constexpr double kPi = 3.14159265358979323846;

Polyline quarter_circle(double r, int n) {
  Polyline pts;
  for (int i = 0; i <= n; ++i) {
    const double a = 0.5 * kPi * i / n;
    pts.emplace_back(r * std::sin(a), r * (1.0 - std::cos(a)));
  }
  return pts;
}

RefPath curvy_path() {
  Polyline pts;
  for (int x = 0; x <= 300; x += 2) pts.emplace_back(x, 15.0 * std::sin(2.0 * kPi * x / 150.0));
  return make_path(pts, PathSource::kTopo);
}

// Brute-force nearest arc length by dense sampling.
double nearest_s(const RefPath& path, const Vec2& p) {
  double best = 1e18, best_s = 0.0;
  const int n = static_cast<int>(path.length() / 0.01);
  for (int i = 0; i <= n; ++i) {
    const double s = path.length() * i / n;
    const double d = (path.point(s) - p).squaredNorm();
    if (d < best) {
      best = d;
      best_s = s;
    }
  }
  return best_s;
}

}  // namespace

TEST(MakePath, CollinearPointsGiveStraightPath) {
  const RefPath p = make_path({{0, 0}, {10, 0}, {20, 0}}, PathSource::kTopo);
  EXPECT_NEAR(p.length(), 20.0, 1e-6);
  for (double s = 0.0; s <= 20.0; s += 0.5) EXPECT_NEAR(p.heading(s), 0.0, 1e-12);
}

TEST(MakePath, QuarterCircleLengthWithinHalfPercent) {
  const RefPath p = make_path(quarter_circle(50.0, 8), PathSource::kTopo);
  EXPECT_NEAR(p.length(), 25.0 * kPi, 0.005 * 25.0 * kPi);
}

TEST(MakePath, TwoPointsGiveSegment) {
  const RefPath p = make_path({{1, 1}, {4, 5}}, PathSource::kUser);
  EXPECT_NEAR(p.length(), 5.0, 1e-9);
  EXPECT_NEAR((p.point(2.5) - Vec2(2.5, 3.0)).norm(), 0.0, 1e-9);
  EXPECT_EQ(p.source(), PathSource::kUser);
}

TEST(MakePath, RejectsFewerThanTwoDistinctPoints) {
  EXPECT_THROW(make_path({{1, 1}}, PathSource::kTopo), ValidationError);
  EXPECT_THROW(make_path({{1, 1}, {1, 1}}, PathSource::kTopo), ValidationError);
}

TEST(MakePath, InterpolatesEveryControlPoint) {
  const RefPath p = curvy_path();
  ASSERT_EQ(p.knots().size(), p.control_points().size());
  for (std::size_t i = 0; i < p.knots().size(); ++i) {
    EXPECT_NEAR((p.point_at_knot_param(p.knots()[i]) - p.control_points()[i]).norm(), 0.0, 1e-9);
  }
}

TEST(MakePath, LengthAgreesWithDensifiedPolyline) {
  const RefPath p = curvy_path();
  const Polyline dense = p.sample(p.length() / 10000.0);
  double len = 0.0;
  for (std::size_t i = 1; i < dense.size(); ++i) len += (dense[i] - dense[i - 1]).norm();
  EXPECT_LT(std::abs(p.length() - len) / p.length(), 1e-3);
}

TEST(MakePath, HeadingIsContinuous) {
  const RefPath p = curvy_path();
  double prev = p.heading(0.0);
  for (double s = 0.1; s <= p.length(); s += 0.1) {
    const double h = p.heading(s);
    EXPECT_LT(std::abs(std::remainder(h - prev, 2.0 * kPi)), 0.01) << s;
    prev = h;
  }
}

TEST(FrenetToCartesian, StraightPathExamples) {
  const RefPath p = make_path({{0, 0}, {20, 0}}, PathSource::kTopo);
  CartesianState c = frenet_to_cartesian(p, {5.0, 1.0}, {3.0, 0.0});
  EXPECT_NEAR((c.position - Vec2(5, 1)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((c.velocity - Vec2(3, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(c.heading, 0.0, 1e-12);

  c = frenet_to_cartesian(p, {5.0, 0.0}, {3.0, 3.0});
  EXPECT_NEAR((c.velocity - Vec2(3, 3)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(c.heading, kPi / 4.0, 1e-12);
}

TEST(FrenetToCartesian, OutOfRangeArcLengthThrows) {
  const RefPath p = make_path({{0, 0}, {20, 0}}, PathSource::kTopo);
  EXPECT_THROW(frenet_to_cartesian(p, {-0.5, 0.0}, {0, 0}), RangeError);
  EXPECT_THROW(frenet_to_cartesian(p, {20.5, 0.0}, {0, 0}), RangeError);
}

TEST(FrenetToCartesian, QuarterCircleMidpointNearAnalyticPoint) {
  const double r = 50.0;
  const RefPath p = make_path(quarter_circle(r, 16), PathSource::kTopo);
  const CartesianState c = frenet_to_cartesian(p, {0.5 * p.length(), 0.0}, {0, 0});
  const double a = kPi / 4.0;
  EXPECT_LT((c.position - Vec2(r * std::sin(a), r * (1.0 - std::cos(a)))).norm(), 1e-3);
}

TEST(CartesianToFrenet, StraightPathAndClamp) {
  const RefPath p = make_path({{0, 0}, {20, 0}}, PathSource::kTopo);
  const FrenetPose f = cartesian_to_frenet(p, {5, 1});
  EXPECT_NEAR(f.s, 5.0, 1e-9);
  EXPECT_NEAR(f.d, 1.0, 1e-9);
  EXPECT_NEAR(cartesian_to_frenet(p, {30, 2}).s, 20.0, 1e-12);
  EXPECT_NEAR(cartesian_to_frenet(p, {-4, 2}).s, 0.0, 1e-12);
}

TEST(CartesianToFrenet, RandomPointsNearCurvyPathRoundTrip) {
  const RefPath p = curvy_path();
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> s(1.0, p.length() - 1.0), d(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double s0 = s(rng);
    const Vec2 q = p.point(s0) + d(rng) * p.normal(s0);
    const FrenetPose f = cartesian_to_frenet(p, q);
    const Vec2 back = frenet_to_cartesian(p, f, {0, 0}).position;
    ASSERT_LT((back - q).norm(), 1e-3) << "point " << i;
  }
}

TEST(CartesianToFrenet, AgreesWithDenseSamplingOracle) {
  const RefPath p = curvy_path();
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> s(1.0, p.length() - 1.0), d(-5.0, 5.0);
  for (int i = 0; i < 30; ++i) {
    const double s0 = s(rng);
    const Vec2 q = p.point(s0) + d(rng) * p.normal(s0);
    EXPECT_NEAR(cartesian_to_frenet(p, q).s, nearest_s(p, q), 0.02);
  }
}

TEST(FrenetRoundTrip, PoseSurvivesBothDirections) {
  const RefPath p = curvy_path();
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> s(0.5, p.length() - 0.5), d(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const FrenetPose in{s(rng), d(rng)};
    if (1.0 / std::max(std::abs(p.curvature(in.s)), 1e-12) <= std::abs(in.d)) continue;
    const FrenetPose out = cartesian_to_frenet(p, frenet_to_cartesian(p, in, {0, 0}).position);
    ASSERT_LT(std::abs(out.s - in.s), 1e-3);
    ASSERT_LT(std::abs(out.d - in.d), 1e-3);
  }
}

TEST(FrenetProjection, InteriorFootPointsStayWithinTheCurvatureRadius) {
  // A distance minimum in the interior cannot sit past the local center of
  // curvature, so the fold flag stays off there.
  const RefPath p = curvy_path();
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> x(-10.0, 310.0), y(-60.0, 60.0);
  int interior = 0;
  for (int i = 0; i < 500; ++i) {
    const FrenetProjection f = p.project({x(rng), y(rng)});
    if (f.pose.s <= 0.0 || f.pose.s >= p.length()) continue;
    ++interior;
    // Concave side only; the convex side has no such limit.
    EXPECT_LE(f.pose.d * p.curvature(f.pose.s), 1.0 + 1e-6);
    EXPECT_FALSE(f.beyond_radius);
  }
  EXPECT_GT(interior, 400);
}

TEST(ArcLength, UnitSpeedParameterization) {
  const RefPath p = curvy_path();
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> s(0.0, p.length() - 0.01);
  for (int i = 0; i < 100; ++i) {
    const double s0 = s(rng);
    EXPECT_NEAR((p.point(s0 + 1e-3) - p.point(s0)).norm() / 1e-3, 1.0, 1e-2);
  }
}

TEST(ArcLength, TangentAndNormalAreOrthonormal) {
  const RefPath p = curvy_path();
  for (double s = 0.0; s <= p.length(); s += 0.37) {
    const Vec2 t = p.tangent(s), n = p.normal(s);
    EXPECT_LT(std::abs(t.dot(n)), 1e-9);
    EXPECT_LT(std::abs(t.norm() - 1.0), 1e-6);
    // Left normal: t x n = +1.
    EXPECT_NEAR(t.x() * n.y() - t.y() * n.x(), 1.0, 1e-9);
  }
}
