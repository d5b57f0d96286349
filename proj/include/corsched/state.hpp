#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

namespace corsched {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Rigid transform. rot is nominally in SO(3) but is allowed to drift off it;
// that drift is exactly what the defect functionals measure.
struct Pose {
  Mat3 rot = Mat3::Identity();
  Vec3 trans = Vec3::Zero();
};

// Point over a height field. z is free; the manifold is z = f(u, v).
struct TerrainPoint {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

// Planar waypoint chain with pinned endpoints. Feasibility means every
// waypoint clears every obstacle.
struct Trajectory {
  std::vector<Vec2> points;
};

using State = std::variant<Mat3, Pose, TerrainPoint, Trajectory>;

bool state_is_finite(const State& s);

}  // namespace corsched
