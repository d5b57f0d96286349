#pragma once

#include <vector>

#include "corsched/geometry.hpp"
#include "corsched/noise.hpp"

namespace corsched {

// Geometric noise ladder for the annealed sampler. Horizon = levels * inner;
// rollout step t sits at level t / inner.
struct AnnealSchedule {
  int levels = 0;
  int inner = 0;
  std::vector<double> sigmas;

  int horizon() const { return levels * inner; }
  double sigma_at_step(int t) const { return sigmas[t / inner]; }

  static AnnealSchedule geometric(int levels, int inner, double sigma_max,
                                  double sigma_min);
};

Trajectory straight_line_points(const Vec2& start, const Vec2& goal, int waypoints);

// Smoothness energy: sum of squared segment lengths.
double trajectory_energy(const Trajectory& traj);

// dE/dp_i for interior waypoints (2 (2 p_i - p_{i-1} - p_{i+1})); endpoints
// are pinned and get zero.
std::vector<Vec2> energy_gradient(const Trajectory& traj);

// One Langevin step at rollout step t: gradient descent on the smoothness
// energy plus level-sigma isotropic noise on interior waypoints. noise_gain
// scales the level sigma for that step only.
Trajectory langevin_step(const Trajectory& traj, int t, const AnnealSchedule& anneal,
                         double step_size, const NoiseStream& noise,
                         double noise_gain = 1.0);

}  // namespace corsched
