#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "corsched/dynamics.hpp"
#include "corsched/errors.hpp"
#include "corsched/metrics.hpp"
#include "corsched/pdm.hpp"
#include "corsched/rollout.hpp"
#include "test_util.hpp"

using namespace corsched;

namespace {

Trajectory jittered_line(int waypoints, uint64_t rng_seed, double amp = 0.3) {
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> g;
  Trajectory t = straight_line_points(Vec2(-1.2, 0.0), Vec2(1.2, 0.0), waypoints);
  for (size_t i = 1; i + 1 < t.points.size(); ++i) {
    t.points[i].x() += amp * g(rng);
    t.points[i].y() += amp * g(rng);
  }
  return t;
}

}  // namespace

TEST_SUITE("pdm") {

TEST_CASE("geometric anneal ladder") {
  AnnealSchedule s = AnnealSchedule::geometric(10, 20, 0.12, 0.004);
  CHECK(s.horizon() == 200);
  REQUIRE(s.sigmas.size() == 10);
  CHECK(s.sigmas.front() == 0.12);
  CHECK(s.sigmas.back() == doctest::Approx(0.004).epsilon(1e-12));
  for (size_t k = 1; k < s.sigmas.size(); ++k) CHECK(s.sigmas[k] < s.sigmas[k - 1]);
  double ratio = s.sigmas[1] / s.sigmas[0];
  for (size_t k = 1; k < s.sigmas.size(); ++k)
    CHECK(s.sigmas[k] / s.sigmas[k - 1] == doctest::Approx(ratio).epsilon(1e-12));

  // Step-to-level indexing.
  AnnealSchedule t = AnnealSchedule::geometric(3, 4, 1.0, 0.25);
  CHECK(t.sigma_at_step(0) == t.sigmas[0]);
  CHECK(t.sigma_at_step(3) == t.sigmas[0]);
  CHECK(t.sigma_at_step(4) == t.sigmas[1]);
  CHECK(t.sigma_at_step(11) == t.sigmas[2]);

  AnnealSchedule one = AnnealSchedule::geometric(1, 5, 0.1, 0.1);
  CHECK(one.sigmas == std::vector<double>{0.1});

  CHECK_THROWS_AS(AnnealSchedule::geometric(0, 5, 0.1, 0.01), ConfigError);
  CHECK_THROWS_AS(AnnealSchedule::geometric(5, 0, 0.1, 0.01), ConfigError);
  CHECK_THROWS_AS(AnnealSchedule::geometric(5, 5, 0.1, 0.0), ConfigError);
  CHECK_THROWS_AS(AnnealSchedule::geometric(5, 5, 0.01, 0.1), ConfigError);
}

TEST_CASE("straight line waypoints") {
  Trajectory t = straight_line_points(Vec2(-1.2, 0.0), Vec2(1.2, 0.0), 32);
  REQUIRE(t.points.size() == 32);
  CHECK(t.points.front().x() == -1.2);
  CHECK(t.points.front().y() == 0.0);
  CHECK(t.points.back().x() == 1.2);
  CHECK(t.points.back().y() == 0.0);
  Vec2 step = t.points[1] - t.points[0];
  for (size_t i = 1; i + 1 < t.points.size(); ++i) {
    Vec2 d = t.points[i + 1] - t.points[i];
    CHECK((d - step).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(straight_line_points(Vec2(0, 0), Vec2(1, 1), 2), ConfigError);
}

TEST_CASE("quadratic energy and its gradient, by hand") {
  Trajectory t;
  t.points = {Vec2(0, 0), Vec2(1, 0), Vec2(3, 0)};
  CHECK(trajectory_energy(t) == 5.0);
  auto grad = energy_gradient(t);
  REQUIRE(grad.size() == 3);
  CHECK(grad[0] == Vec2(0, 0));  // endpoints pinned
  CHECK(grad[2] == Vec2(0, 0));
  CHECK(grad[1].x() == -2.0);
  CHECK(grad[1].y() == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
  Trajectory t = jittered_line(10, 61);
  auto grad = energy_gradient(t);
  const double h = 1e-6;
  for (size_t i = 1; i + 1 < t.points.size(); ++i) {
    for (int axis = 0; axis < 2; ++axis) {
      Trajectory plus = t, minus = t;
      plus.points[i](axis) += h;
      minus.points[i](axis) -= h;
      double fd = (trajectory_energy(plus) - trajectory_energy(minus)) / (2.0 * h);
      double g = grad[i](axis);
      CHECK(std::abs(fd - g) <= 1e-6 * std::max(1.0, std::abs(g)));
    }
  }
}

TEST_CASE("zero step and zero noise is the identity") {
  AnnealSchedule still{1, 20, {0.0}};
  Trajectory t = jittered_line(12, 62);
  Trajectory out = langevin_step(t, 7, still, 0.0, NoiseStream(1));
  CHECK(testutil::same_state(State(out), State(t)));
}

TEST_CASE("a straight line is a fixed point of the noiseless sampler") {
  AnnealSchedule still{1, 20, {0.0}};
  Trajectory t = straight_line_points(Vec2(-1.2, 0.0), Vec2(1.2, 0.0), 32);
  Trajectory x = t;
  for (int k = 0; k < 20; ++k) x = langevin_step(x, k, still, 0.1, NoiseStream(1));
  for (size_t i = 0; i < t.points.size(); ++i)
    CHECK((x.points[i] - t.points[i]).norm() <= 1e-13);
}

TEST_CASE("noiseless descent strictly decreases the energy") {
  AnnealSchedule still{1, 40, {0.0}};
  Trajectory x = jittered_line(16, 63);
  double prev = trajectory_energy(x);
  for (int k = 0; k < 30; ++k) {
    x = langevin_step(x, k % 40, still, 0.05, NoiseStream(1));
    double e = trajectory_energy(x);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("langevin updates are deterministic and pin the endpoints") {
  AnnealSchedule anneal = AnnealSchedule::geometric(10, 20, 0.12, 0.004);
  Trajectory t = jittered_line(32, 64, 0.05);
  Trajectory a = langevin_step(t, 13, anneal, 0.1, NoiseStream(9));
  Trajectory b = langevin_step(t, 13, anneal, 0.1, NoiseStream(9));
  CHECK(testutil::same_state(State(a), State(b)));

  Trajectory c = langevin_step(t, 13, anneal, 0.1, NoiseStream(10));
  CHECK_FALSE(testutil::same_state(State(a), State(c)));

  Trajectory x = t;
  for (int k = 0; k < 50; ++k) x = langevin_step(x, k, anneal, 0.1, NoiseStream(9));
  CHECK(x.points.front() == t.points.front());
  CHECK(x.points.back() == t.points.back());

  CHECK_THROWS_AS(langevin_step(t, -1, anneal, 0.1, NoiseStream(9)), std::out_of_range);
  CHECK_THROWS_AS(langevin_step(t, 200, anneal, 0.1, NoiseStream(9)), std::out_of_range);
}

TEST_CASE("propose_update wires the configured anneal into the sampler") {
  DomainSpec spec = default_domain_spec(DomainId::pdm_lite);
  DynamicsParams p = default_dynamics(DomainId::pdm_lite);
  NoiseStream noise(21);
  State x0 = initial_state(spec, p, noise);

  AnnealSchedule anneal = AnnealSchedule::geometric(p.pdm_levels, p.pdm_inner,
                                                    p.pdm_sigma_max, p.pdm_sigma_min);
  for (int t : {0, 19, 20, 121, 199}) {
    State via_dynamics = propose_update(x0, t, spec, p, noise);
    Trajectory direct =
        langevin_step(std::get<Trajectory>(x0), t, anneal, p.pdm_step, noise);
    CHECK(testutil::same_state(via_dynamics, State(direct)));
  }
}

TEST_CASE("defect equals the stacked per-waypoint residual norm") {
  ObstacleSet obs = default_domain_spec(DomainId::pdm_lite).obstacles;
  std::mt19937_64 rng(65);
  std::uniform_real_distribution<double> ux(-1.4, 1.4), uy(-0.6, 0.6);
  for (int rep = 0; rep < 500; ++rep) {
    Trajectory t;
    for (int i = 0; i < 8; ++i) t.points.emplace_back(ux(rng), uy(rng));
    double expect_sq = 0.0;
    for (const Vec2& pnt : t.points) {
      double worst = 0.0;
      for (const Circle& c : obs.circles)
        worst = std::max(worst, c.radius - (pnt - c.center).norm());
      expect_sq += worst * worst;
    }
    CHECK(trajectory_defect(t, obs) == doctest::Approx(std::sqrt(expect_sq)).epsilon(1e-9));
  }
}

TEST_CASE("pdm rollouts respect the projection budget") {
  DomainSpec spec = default_domain_spec(DomainId::pdm_lite);
  DynamicsParams p = default_dynamics(DomainId::pdm_lite);
  const int T = p.horizon;
  REQUIRE(T == p.pdm_levels * p.pdm_inner);
  const int B = budget_from_fraction(0.25, T);
  REQUIRE(B == 50);

  std::vector<std::vector<double>> calib;
  for (uint64_t s = 400; s < 408; ++s)
    calib.push_back(terminal_defect_trace(spec, p, s));
  ThresholdSurface surf = calibrate_thresholds(calib, T, B);

  for (uint64_t seed : {900u, 901u, 902u}) {
    PairedCell cell = run_paired_cell(spec, p, 0.25, seed, surf);
    REQUIRE_FALSE(cell.any_failed());

    for (double d : cell.stepwise.post_defects) CHECK(d <= 1e-9);
    CHECK(cell.terminal.post_defects.back() <= 1e-9);
    CHECK(cell.adaptive.post_defects.back() <= 1e-9);

    // At most a quarter of the inner updates get an intermediate projection.
    CHECK(static_cast<int>(cell.adaptive.events.size()) <= B);
    CHECK(static_cast<int>(cell.periodic.events.size()) == B);

    // Paired noise: all arms saw the same proposal at step 0.
    CHECK(cell.terminal.proposal_defects[0] == cell.adaptive.proposal_defects[0]);

    // Endpoints survive every arm.
    for (Schedule::Kind k : kAllKinds) {
      const auto& traj = std::get<Trajectory>(cell.arm(k).states.back());
      CHECK(traj.points.front().x() == p.pdm_start_u);
      CHECK(traj.points.back().x() == p.pdm_goal_u);
    }
  }
}

}  // TEST_SUITE
