#pragma once

#include "core/vehicle.hpp"

#include <optional>

namespace trajedit {

struct ForceBreakdown {
  Vec2 self = Vec2::Zero();       // f_o, Frenet
  Vec2 path = Vec2::Zero();       // f_k, Frenet
  Vec2 collision = Vec2::Zero();  // summed neighbor forces projected into Frenet
  Vec2 total = Vec2::Zero();
};

// Self-motivated force f_o = w_o * m * tanh((v_o - v) / 2) (*) a_hat.
//
// Note the sign: the printed form 2 / (1 + exp(v_o - v)) - 1 equals
// -tanh((v_o - v) / 2) and would drive the speed away from v_o. The argument
// is negated here, 2 / (1 + exp(-(v_o - v))) - 1, so the force restores the
// desired velocity. `desired_vs` replaces the longitudinal desired speed
// when set (the optimizer's control channel).
Vec2 self_motivated_force(const VehicleState& v, std::optional<double> desired_vs = std::nullopt,
                          const ForceWeights& w = {});

// d f^s_o / d v^s_o; equals -d f^s_o / d v^s.
double self_force_control_derivative(const VehicleState& v, double desired_vs, const ForceWeights& w = {});

// Attraction back to the path, active once |d| >= (w_l - w_v) / 2.
Vec2 path_keeping_force(const VehicleState& v, double lane_width, const ForceWeights& w = {});

// Cartesian repulsion exerted on `self` by `neighbor`.
Vec2 collision_avoidance_force(const VehicleState& self, const VehicleState& neighbor, const ForceWeights& w = {});

}  // namespace trajedit
