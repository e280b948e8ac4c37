#pragma once

#include "core/types.hpp"

#include <vector>

namespace trajedit {

// Natural cubic spline y(u) over strictly increasing knots.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> knots, std::vector<double> values);

  double value(double u) const;
  double derivative(double u) const;
  double second_derivative(double u) const;

 private:
  std::size_t segment(double u) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> m_;  // second derivatives at the knots
};

enum class PathSource { kTopo, kUser };

struct FrenetPose {
  double s = 0.0;
  double d = 0.0;  // positive to the left of the travel direction
};

struct CartesianState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double heading = 0.0;
};

struct FrenetProjection {
  FrenetPose pose;
  // |d| exceeds the local radius of curvature on the concave side, so the
  // Frenet frame folds and the pose is not unique.
  bool beyond_radius = false;
};

// Interpolating cubic-spline path with an arc-length table. Immutable after
// construction.
class RefPath {
 public:
  RefPath() = default;

  PathId id() const { return id_; }
  void set_id(PathId id) { id_ = id; }
  PathSource source() const { return source_; }
  const Polyline& control_points() const { return control_points_; }
  double length() const { return length_; }

  Vec2 point(double s) const;
  Vec2 tangent(double s) const;
  Vec2 normal(double s) const { return left_normal(tangent(s)); }
  double heading(double s) const;
  double curvature(double s) const;

  // Position on the spline at knot parameter u, used by tests that check
  // interpolation of the control points.
  Vec2 point_at_knot_param(double u) const { return {x_.value(u), y_.value(u)}; }
  const std::vector<double>& knots() const { return knots_; }

  CartesianState to_cartesian(const FrenetPose& pose, const Vec2& frenet_velocity) const;
  FrenetProjection project(const Vec2& p) const;
  // [v . t, v . n] at arc length s.
  Vec2 frenet_velocity(double s, const Vec2& cartesian_velocity) const;

  // Samples the path at (at most) the given spacing, endpoints included.
  Polyline sample(double spacing) const;

  friend RefPath make_path(const Polyline& points, PathSource source);

 private:
  double param_at(double s) const;

  PathId id_ = -1;
  PathSource source_ = PathSource::kTopo;
  Polyline control_points_;
  std::vector<double> knots_;
  CubicSpline x_;
  CubicSpline y_;
  // Arc-length table (monotone): sample_s_[i] is the arc length at knot
  // parameter sample_u_[i].
  std::vector<double> sample_u_;
  std::vector<double> sample_s_;
  Polyline sample_points_;
  double length_ = 0.0;
};

inline constexpr double kArcTableSpacing = 0.05;

// Natural cubic spline per coordinate over chord-length knots. Consecutive
// duplicate points are dropped; throws ValidationError for fewer than two
// distinct points.
RefPath make_path(const Polyline& points, PathSource source);

// Throws RangeError when pose.s lies outside [0, length].
CartesianState frenet_to_cartesian(const RefPath& path, const FrenetPose& pose, const Vec2& frenet_velocity);

// Closest-point projection; s is clamped to [0, length].
FrenetPose cartesian_to_frenet(const RefPath& path, const Vec2& p);

}  // namespace trajedit
