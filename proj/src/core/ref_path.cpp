#include "core/ref_path.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace trajedit {

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)), m_(knots_.size(), 0.0) {
  const std::size_t n = knots_.size();
  if (n < 3) return;  // straight segment: all second derivatives zero

  // Thomas algorithm on the interior equations; natural ends (m = 0).
  std::vector<double> c(n, 0.0), r(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = knots_[i] - knots_[i - 1];
    const double h1 = knots_[i + 1] - knots_[i];
    const double a = h0 / 6.0;
    const double b = (h0 + h1) / 3.0;
    const double cc = h1 / 6.0;
    const double rhs = (values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0;
    const double denom = b - a * c[i - 1];
    c[i] = cc / denom;
    r[i] = (rhs - a * r[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = r[i] - c[i] * m_[i + 1];
    if (i == 1) break;
  }
}

std::size_t CubicSpline::segment(double u) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
  std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(i, knots_.size() - 2);
}

double CubicSpline::value(double u) const {
  const std::size_t i = segment(u);
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - u) / h;
  const double b = (u - knots_[i]) / h;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double u) const {
  const std::size_t i = segment(u);
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - u) / h;
  const double b = (u - knots_[i]) / h;
  return (values_[i + 1] - values_[i]) / h + ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

double CubicSpline::second_derivative(double u) const {
  const std::size_t i = segment(u);
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - u) / h;
  const double b = (u - knots_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

RefPath make_path(const Polyline& points, PathSource source) {
  Polyline pts;
  for (const auto& p : points) {
    if (pts.empty() || (p - pts.back()).norm() > 1e-9) pts.push_back(p);
  }
  if (pts.size() < 2) throw ValidationError("a path needs at least 2 distinct points");

  RefPath path;
  path.source_ = source;
  path.control_points_ = pts;
  path.knots_.resize(pts.size());
  path.knots_[0] = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) path.knots_[i] = path.knots_[i - 1] + (pts[i] - pts[i - 1]).norm();

  std::vector<double> xs(pts.size()), ys(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    xs[i] = pts[i].x();
    ys[i] = pts[i].y();
  }
  path.x_ = CubicSpline(path.knots_, xs);
  path.y_ = CubicSpline(path.knots_, ys);

  // Arc-length table: each knot interval is split so that consecutive samples
  // are at most kArcTableSpacing apart along the chord; sub-interval lengths
  // come from 5-point Gauss-Legendre quadrature of |C'(u)|.
  static constexpr std::array<double, 5> kNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                   0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> kWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                     0.4786286704993665, 0.2369268850561891};
  auto speed = [&](double u) { return std::hypot(path.x_.derivative(u), path.y_.derivative(u)); };

  path.sample_u_.push_back(0.0);
  path.sample_s_.push_back(0.0);
  path.sample_points_.push_back(pts.front());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double u0 = path.knots_[i - 1];
    const double u1 = path.knots_[i];
    const int n = std::max(1, static_cast<int>(std::ceil((u1 - u0) / kArcTableSpacing)));
    for (int k = 1; k <= n; ++k) {
      const double a = u0 + (u1 - u0) * (k - 1) / n;
      const double b = k == n ? u1 : u0 + (u1 - u0) * k / n;
      double len = 0.0;
      for (std::size_t q = 0; q < kNodes.size(); ++q) len += kWeights[q] * speed(0.5 * (a + b) + 0.5 * (b - a) * kNodes[q]);
      len *= 0.5 * (b - a);
      path.sample_u_.push_back(b);
      path.sample_s_.push_back(path.sample_s_.back() + len);
      path.sample_points_.push_back(path.point_at_knot_param(b));
    }
  }
  path.length_ = path.sample_s_.back();
  return path;
}

double RefPath::param_at(double s) const {
  s = std::clamp(s, 0.0, length_);
  auto it = std::upper_bound(sample_s_.begin(), sample_s_.end(), s);
  std::size_t i = it == sample_s_.begin() ? 0 : static_cast<std::size_t>(it - sample_s_.begin()) - 1;
  i = std::min(i, sample_s_.size() - 2);
  const double w = (s - sample_s_[i]) / (sample_s_[i + 1] - sample_s_[i]);
  return sample_u_[i] + w * (sample_u_[i + 1] - sample_u_[i]);
}

Vec2 RefPath::point(double s) const { return point_at_knot_param(param_at(s)); }

Vec2 RefPath::tangent(double s) const {
  const double u = param_at(s);
  Vec2 t(x_.derivative(u), y_.derivative(u));
  return t.normalized();
}

double RefPath::heading(double s) const {
  const Vec2 t = tangent(s);
  return std::atan2(t.y(), t.x());
}

double RefPath::curvature(double s) const {
  const double u = param_at(s);
  const double dx = x_.derivative(u), dy = y_.derivative(u);
  const double ddx = x_.second_derivative(u), ddy = y_.second_derivative(u);
  const double sp = std::hypot(dx, dy);
  return (dx * ddy - dy * ddx) / (sp * sp * sp);
}

CartesianState RefPath::to_cartesian(const FrenetPose& pose, const Vec2& frenet_velocity) const {
  const Vec2 t = tangent(pose.s);
  const Vec2 n = left_normal(t);
  CartesianState out;
  out.position = point(pose.s) + pose.d * n;
  out.velocity = frenet_velocity.x() * t + frenet_velocity.y() * n;
  const double base = std::atan2(t.y(), t.x());
  if (frenet_velocity.norm() > 0.1) {
    out.heading = base + std::atan2(frenet_velocity.y(), frenet_velocity.x());
  } else {
    out.heading = base;
  }
  return out;
}

FrenetProjection RefPath::project(const Vec2& p) const {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sample_points_.size(); ++i) {
    const double d2 = (sample_points_[i] - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  // Safeguarded Newton on (p - C(s)) . t(s) = 0 inside the bracket of the
  // neighbouring samples.
  const double lo = sample_s_[best == 0 ? 0 : best - 1];
  const double hi = sample_s_[std::min(best + 1, sample_s_.size() - 1)];
  double s = sample_s_[best];
  for (int it = 0; it < 20; ++it) {
    const Vec2 r = p - point(s);
    const Vec2 t = tangent(s);
    const double denom = std::max(0.1, 1.0 - curvature(s) * r.dot(left_normal(t)));
    const double next = std::clamp(s + r.dot(t) / denom, lo, hi);
    if (std::abs(next - s) < 1e-12) break;
    s = next;
  }
  s = std::clamp(s, 0.0, length_);

  FrenetProjection out;
  out.pose.s = s;
  out.pose.d = (p - point(s)).dot(normal(s));
  const double k = curvature(s);
  out.beyond_radius = std::abs(k) > 1e-12 && out.pose.d * k > 0.0 && std::abs(out.pose.d) >= 1.0 / std::abs(k);
  return out;
}

Vec2 RefPath::frenet_velocity(double s, const Vec2& cartesian_velocity) const {
  const Vec2 t = tangent(s);
  return {cartesian_velocity.dot(t), cartesian_velocity.dot(left_normal(t))};
}

Polyline RefPath::sample(double spacing) const {
  const int n = std::max(1, static_cast<int>(std::ceil(length_ / spacing)));
  Polyline out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out.push_back(point(length_ * i / n));
  return out;
}

CartesianState frenet_to_cartesian(const RefPath& path, const FrenetPose& pose, const Vec2& frenet_velocity) {
  if (pose.s < 0.0 || pose.s > path.length())
    throw RangeError("arc length " + std::to_string(pose.s) + " outside path [0, " + std::to_string(path.length()) + "]");
  return path.to_cartesian(pose, frenet_velocity);
}

FrenetPose cartesian_to_frenet(const RefPath& path, const Vec2& p) { return path.project(p).pose; }

}  // namespace trajedit
