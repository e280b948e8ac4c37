#include "core/forces.hpp"

#include <cmath>
#include <numbers>

namespace trajedit {

VehicleParams sample_params(std::mt19937_64& rng, VehicleParams base) {
  std::uniform_real_distribution<double> headway(3.0, 5.0);
  std::uniform_real_distribution<double> reaction(0.5, 1.5);
  base.jam_headway = headway(rng);
  base.reaction_time = reaction(rng);
  return base;
}

Vec2 VehicleState::moving_direction() const {
  const double speed = velocity.norm();
  if (speed > 0.1) return velocity / speed;
  return {std::cos(heading), std::sin(heading)};
}

Vec2 self_motivated_force(const VehicleState& v, std::optional<double> desired_vs, const ForceWeights& w) {
  const Vec2 desired(desired_vs.value_or(v.desired_velocity.x()), v.desired_velocity.y());
  const Vec2 gap = desired - v.frenet_velocity;
  const double scale = w.self * v.params.mass;
  return {scale * std::tanh(0.5 * gap.x()) * v.params.max_acc.x(),
          scale * std::tanh(0.5 * gap.y()) * v.params.max_acc.y()};
}

double self_force_control_derivative(const VehicleState& v, double desired_vs, const ForceWeights& w) {
  const double c = std::cosh(0.5 * (desired_vs - v.vs()));
  return 0.5 * w.self * v.params.mass * v.params.max_acc.x() / (c * c);
}

Vec2 path_keeping_force(const VehicleState& v, double lane_width, const ForceWeights& w) {
  const double d = v.pose.d;
  if (std::abs(d) < 0.5 * (lane_width - v.params.width)) return Vec2::Zero();
  const double toward = d > 0.0 ? -1.0 : (d < 0.0 ? 1.0 : 0.0);
  return {0.0, w.path * std::abs(d) * toward};
}

Vec2 collision_avoidance_force(const VehicleState& self, const VehicleState& neighbor, const ForceWeights& w) {
  const VehicleParams& prm = self.params;
  const double speed = self.velocity.norm();
  const double b = prm.jam_headway + speed * prm.reaction_time +
                   speed * (neighbor.velocity - self.velocity).norm() / (2.0 * prm.max_acc.norm());
  const double c = 1.0 / prm.jam_headway;
  const Vec2 to_neighbor = neighbor.position - self.position;
  const double dist = to_neighbor.norm();
  const Vec2 dir = self.moving_direction();

  if (dist < 1e-9) {
    // Coincident: distance taken as 0, pushed straight back.
    return -w.collision * b * dir;
  }
  const double cos_phi = std::clamp(dir.dot(to_neighbor) / dist, -1.0, 1.0);
  const double phi = std::acos(cos_phi);
  if (phi > 0.25 * std::numbers::pi) return Vec2::Zero();
  const double denom = 1.0 + c * dist;
  const Vec2 away = -to_neighbor / dist;
  return w.collision * cos_phi * b / (denom * denom) * away;
}

}  // namespace trajedit
