#pragma once

#include "core/ref_path.hpp"
#include "core/types.hpp"

#include <random>

namespace trajedit {

struct VehicleParams {
  double mass = 1.0;
  Vec2 max_acc{5.0, 1.0};     // Frenet [a^s, a^d], m/s^2
  double jam_headway = 4.0;   // s0, m
  double reaction_time = 1.0; // T0, s
  double width = 1.8;
  double length = 4.5;
};

// Per-vehicle s0 ~ U(3, 5) m and T0 ~ U(0.5, 1.5) s.
VehicleParams sample_params(std::mt19937_64& rng, VehicleParams base = {});

struct ForceWeights {
  double self = 1.0;
  double path = 0.5;
  double collision = 3.0;
};

struct VehicleState {
  VehicleId id = 0;
  PathId path_id = -1;
  FrenetPose pose;
  Vec2 frenet_velocity = Vec2::Zero();  // [v^s, v^d]
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double heading = 0.0;
  // Free-flow desired velocity; the lateral component stays 0.
  Vec2 desired_velocity = Vec2::Zero();
  VehicleParams params;
  // Stationary phantom (red-light stop line); never integrated.
  bool phantom = false;

  double vs() const { return frenet_velocity.x(); }
  double vd() const { return frenet_velocity.y(); }

  // Moving direction: velocity below 0.1 m/s falls back to the heading.
  Vec2 moving_direction() const;

  void sync_cartesian(const RefPath& path) {
    const CartesianState c = path.to_cartesian(pose, frenet_velocity);
    position = c.position;
    velocity = c.velocity;
    heading = c.heading;
  }
};

}  // namespace trajedit
