#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "corsched/state.hpp"

namespace corsched {

enum class DomainId {
  so3,
  se3,
  terrain,
  so3_impulse,
  se3_lever,
  terrain_ridge,
  pdm_lite,
};

const char* domain_name(DomainId id);
DomainId domain_from_name(std::string_view name);  // throws ConfigError

// Analytic height field f(u, v) = base + optional ridge. The ridge is a
// sharp exponential wall along a meandering center line u = c(v).
struct HeightField {
  double base_amp = 0.4;
  double base_freq = 1.2;
  double ridge_amp = 0.0;  // 0 disables the ridge
  double ridge_sharpness = 18.0;
  double ridge_center_amp = 0.15;
  double ridge_center_freq = 1.3;

  double center_line(double v) const;
  double eval(double u, double v) const;
  // d/du and d/dv of eval, closed form.
  void gradient(double u, double v, double& fu, double& fv) const;
};

struct Circle {
  Vec2 center = Vec2::Zero();
  double radius = 0.1;
};

struct ObstacleSet {
  std::vector<Circle> circles;
  // Push-out leaves points this fraction of a radius outside the boundary
  // so a projected point is strictly feasible, not marginal.
  double margin_frac = 1e-3;
};

// Everything geometric a domain needs: which manifold, plus its parameters.
struct DomainSpec {
  DomainId id = DomainId::so3;
  double alpha = 1.0;  // rotation weight in the se3 metric
  HeightField field;
  double lever_length = 1.2;
  Vec3 lever_anchor = Vec3::Zero();
  ObstacleSet obstacles;

  bool rotational() const {
    return id == DomainId::so3 || id == DomainId::so3_impulse ||
           id == DomainId::se3 || id == DomainId::se3_lever;
  }
  bool has_translation() const {
    return id == DomainId::se3 || id == DomainId::se3_lever;
  }
  bool terrain_like() const {
    return id == DomainId::terrain || id == DomainId::terrain_ridge;
  }
};

DomainSpec default_domain_spec(DomainId id);

// --- SO(3) ---
// Nearest rotation in Frobenius norm (polar factor; det forced to +1).
Mat3 project_so3(const Mat3& a);
// ||A^T A - I||_F + |det A - 1|; zero iff A is a rotation.
double defect_so3(const Mat3& a);
// Geodesic angle between two rotations. Inputs must be on-manifold to tol.
double dist_so3(const Mat3& r1, const Mat3& r2);

// --- SE(3) (product manifold, translation unconstrained unless levered) ---
// Arm tip p0 + L * R * e1; the lever variant pins translation to it.
Vec3 lever_point(const Mat3& rot, const DomainSpec& spec);
Pose project_se3(const Pose& p, const DomainSpec& spec);
double defect_se3(const Pose& p, const DomainSpec& spec);
// dist_so3 + alpha * ||t1 - t2||.
double dist_se3(const Pose& a, const Pose& b, const DomainSpec& spec);

// --- terrain graph z = f(u, v) ---
TerrainPoint project_terrain(const TerrainPoint& p, const HeightField& f);
double defect_terrain(const TerrainPoint& p, const HeightField& f);
double dist_terrain(const TerrainPoint& a, const TerrainPoint& b);

// --- obstacle-feasible trajectories ---
Trajectory project_trajectory(const Trajectory& traj, const ObstacleSet& obs);
// Norm of the residual to the margin-free push-out: sqrt of the sum over
// waypoints of squared worst-case penetration depth.
double trajectory_defect(const Trajectory& traj, const ObstacleSet& obs);
// Mean waypoint displacement between equal-length chains.
double trajectory_distance(const Trajectory& a, const Trajectory& b);

// --- dispatch over State ---
State project_state(const State& x, const DomainSpec& spec);
double state_defect(const State& x, const DomainSpec& spec);
// Requires both arguments on-manifold (within tolerance); throws otherwise.
double state_distance(const State& a, const State& b, const DomainSpec& spec);

// Rodrigues formula; axis need not be normalized (zero axis gives identity).
Mat3 axis_angle_rotation(const Vec3& axis, double angle);

}  // namespace corsched
