#pragma once

#include "corsched/geometry.hpp"
#include "corsched/noise.hpp"
#include "corsched/state.hpp"

namespace corsched {

// Tunables for every domain family. A config section fills one of these per
// domain; unused fields are simply ignored by the other families.
struct DynamicsParams {
  int horizon = 200;
  double step_size = 0.05;

  // Rotational families. The drift term deliberately pushes the iterate off
  // SO(3); the restore term contracts deviation at rate restore_rate so that
  // defect injected early does not persist to the end of the horizon.
  double rot_rate = 0.8;        // magnitude of the tangent angular velocity
  double drift_scale = 0.4;     // magnitude of the normal (off-manifold) drift
  double drift_floor = 0.5;     // oscillation floor as a fraction of scale
  double drift_cycles = 3.0;    // drift oscillations per horizon
  double drift_phase = 0.0;
  double drift_burst = 0.0;     // log-sigma of the mean-one per-step drift multiplier
  double restore_rate = 4.0;
  double noise_scale = 0.003;

  // Impulse variant: drift multiplier impulse_mag inside
  // [impulse_start_frac, impulse_start_frac + impulse_width_frac) * T.
  double impulse_start_frac = 0.40;
  double impulse_width_frac = 0.05;
  double impulse_mag = 12.0;

  // se3 translation.
  double trans_vel = 0.5;
  double trans_noise = 0.01;
  // Lever variant: translation chases anchor + L * R * e1 with this gain.
  // The angular velocity magnitude follows a slew envelope
  // slew_base + slew_mag * gaussian(center, width) so the lag error spikes
  // during one fast maneuver instead of staying uniformly high.
  double lever_gain = 2.0;
  double slew_base = 0.1;
  double slew_mag = 10.0;
  double slew_center_frac = 0.5;
  double slew_width_frac = 0.03;

  // Terrain families: planar drive is mostly +u with a meander in v; z
  // integrates the locally observed slope and never consults f directly.
  double planar_speed = 0.4;
  double steer_amp = 0.5;
  double steer_cycles = 2.0;
  double planar_noise = 1e-3;
  double height_noise = 2e-4;
  double start_u = -2.0;
  double start_v = 0.0;

  // pdm-lite annealed Langevin sampler. Horizon must equal levels * inner.
  int pdm_levels = 10;
  int pdm_inner = 20;
  int pdm_waypoints = 32;
  double pdm_sigma_max = 0.12;
  double pdm_sigma_min = 0.004;
  double pdm_step = 0.10;
  double pdm_start_u = -1.2, pdm_start_v = 0.0;
  double pdm_goal_u = 1.2, pdm_goal_v = 0.0;

  void validate(DomainId id) const;  // throws ConfigError
};

DynamicsParams default_dynamics(DomainId id);

// Seed-dependent on-manifold starting point.
State initial_state(const DomainSpec& spec, const DynamicsParams& params,
                    const NoiseStream& noise);

// One uncorrected step x_t -> proposal. Reads noise only at counter `t`.
State propose_update(const State& x, int t, const DomainSpec& spec,
                     const DynamicsParams& params, const NoiseStream& noise);

}  // namespace corsched
