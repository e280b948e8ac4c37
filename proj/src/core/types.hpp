#pragma once

#include <Eigen/Core>

#include <vector>

namespace trajedit {

using Vec2 = Eigen::Vector2d;
using Polyline = std::vector<Vec2>;

using VehicleId = int;
using PathId = int;

inline Vec2 left_normal(const Vec2& tangent) { return {-tangent.y(), tangent.x()}; }

}  // namespace trajedit
