#include "corsched/pdm.hpp"

#include <cmath>
#include <stdexcept>

#include "corsched/errors.hpp"

namespace corsched {

AnnealSchedule AnnealSchedule::geometric(int levels, int inner, double sigma_max,
                                         double sigma_min) {
  if (levels < 1 || inner < 1)
    throw ConfigError("anneal schedule needs positive levels and inner steps");
  if (sigma_min <= 0.0 || sigma_max < sigma_min)
    throw ConfigError("anneal sigmas must satisfy sigma_max >= sigma_min > 0");
  AnnealSchedule s;
  s.levels = levels;
  s.inner = inner;
  s.sigmas.resize(static_cast<size_t>(levels));
  double ratio = levels > 1 ? std::pow(sigma_min / sigma_max, 1.0 / (levels - 1)) : 1.0;
  double sigma = sigma_max;
  for (int k = 0; k < levels; ++k) {
    s.sigmas[static_cast<size_t>(k)] = sigma;
    sigma *= ratio;
  }
  return s;
}

Trajectory straight_line_points(const Vec2& start, const Vec2& goal, int waypoints) {
  if (waypoints < 3) throw ConfigError("trajectory needs at least 3 waypoints");
  Trajectory traj;
  traj.points.resize(static_cast<size_t>(waypoints));
  for (int i = 0; i < waypoints; ++i) {
    double a = static_cast<double>(i) / (waypoints - 1);
    traj.points[static_cast<size_t>(i)] = (1.0 - a) * start + a * goal;
  }
  return traj;
}

double trajectory_energy(const Trajectory& traj) {
  double e = 0.0;
  for (size_t i = 0; i + 1 < traj.points.size(); ++i)
    e += (traj.points[i + 1] - traj.points[i]).squaredNorm();
  return e;
}

std::vector<Vec2> energy_gradient(const Trajectory& traj) {
  size_t w = traj.points.size();
  std::vector<Vec2> grad(w, Vec2::Zero());
  for (size_t i = 1; i + 1 < w; ++i)
    grad[i] = 2.0 * (2.0 * traj.points[i] - traj.points[i - 1] - traj.points[i + 1]);
  return grad;
}

Trajectory langevin_step(const Trajectory& traj, int t, const AnnealSchedule& anneal,
                         double step_size, const NoiseStream& noise,
                         double noise_gain) {
  if (t < 0 || t >= anneal.horizon())
    throw std::out_of_range("langevin_step: step outside the anneal horizon");
  double sigma = anneal.sigma_at_step(t) * noise_gain;
  std::vector<Vec2> grad = energy_gradient(traj);
  Trajectory out = traj;
  for (size_t i = 1; i + 1 < out.points.size(); ++i) {
    out.points[i] -= step_size * grad[i];
    if (sigma > 0.0) {
      out.points[i].x() +=
          sigma * noise.gaussian(NoiseStream::kDynamics, static_cast<std::uint64_t>(t), 2 * i);
      out.points[i].y() +=
          sigma * noise.gaussian(NoiseStream::kDynamics, static_cast<std::uint64_t>(t), 2 * i + 1);
    }
  }
  return out;
}

}  // namespace corsched
