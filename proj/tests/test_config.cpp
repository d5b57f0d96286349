#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <doctest.h>

#include "corsched/config.hpp"
#include "corsched/errors.hpp"
#include "corsched/io.hpp"
#include "test_util.hpp"

using namespace corsched;

namespace {

std::string thrown_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults describe the headline study") {
  ExperimentConfig c = ExperimentConfig::defaults();
  CHECK_NOTHROW(c.validate());

  REQUIRE(c.domains.size() == 7);
  CHECK(c.domains.front() == DomainId::so3);
  CHECK(c.domains.back() == DomainId::pdm_lite);

  REQUIRE(c.budget_grid.size() == 21);
  CHECK(c.budget_grid.front() == 0.0);
  CHECK(c.budget_grid.back() == 1.0);
  CHECK(c.budget_grid[5] == 0.25);  // the summary fraction sits on the grid

  CHECK(c.calib_seed_start == 1000);
  CHECK(c.calib_count == 64);
  CHECK(c.eval_seed_start == 5000);
  CHECK(c.eval_count == 50);
  CHECK(c.q_mass == 0.2);
  CHECK(c.summary_budget == 0.25);
  CHECK_FALSE(c.write_traces);

  for (DomainId d : c.domains) {
    CHECK(c.spec(d).id == d);
    CHECK(c.params(d).horizon == 200);
  }
  CHECK(c.params(DomainId::pdm_lite).pdm_levels == 10);
  CHECK(c.spec(DomainId::pdm_lite).obstacles.circles.size() == 3);
}

TEST_CASE("budget grid parses ranges and lists") {
  auto r = parse_budget_grid("0.0:1.0:0.05");
  REQUIRE(r.size() == 21);
  CHECK(r.front() == 0.0);
  CHECK(r.back() == 1.0);

  CHECK(parse_budget_grid("0:0.5:0.25") == std::vector<double>{0.0, 0.25, 0.5});
  CHECK(parse_budget_grid("0,0.25,1") == std::vector<double>{0.0, 0.25, 1.0});
  CHECK(parse_budget_grid("0.4") == std::vector<double>{0.4});

  CHECK_THROWS_AS(parse_budget_grid("0.5:0.1:0.1"), ConfigError);
  CHECK_THROWS_AS(parse_budget_grid("0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_budget_grid("0:1"), ConfigError);
  CHECK_THROWS_AS(parse_budget_grid("zero"), ConfigError);
}

TEST_CASE("config files override defaults") {
  testutil::TempDir td("config");
  auto file = td.path / "exp.cfg";
  write_text_file(file,
                  "# run shrunk for tests\n"
                  "domains = so3, pdm-lite\n"
                  "budget_grid = 0,0.25,1\n"
                  "calib_seed_start = 1\n"
                  "calib_count = 8\n"
                  "eval_seed_start = 100\n"
                  "eval_count = 6\n"
                  "write_traces = true\n"
                  "jobs = 1\n"
                  "out_dir = results\n"
                  "pdm_scene_seeds = 100, 101\n"
                  "\n"
                  "[so3]\n"
                  "horizon = 40\n"
                  "noise_scale = 0.001\n"
                  "\n"
                  "[pdm-lite]\n"
                  "pdm_levels = 4\n"
                  "pdm_inner = 10\n"
                  "horizon = 40\n"
                  "pdm_waypoints = 12\n"
                  "\n"
                  "[global]\n"
                  "q_mass = 0.3\n");

  ExperimentConfig c = ExperimentConfig::from_file(file);
  CHECK(c.domains == std::vector<DomainId>{DomainId::so3, DomainId::pdm_lite});
  CHECK(c.budget_grid == std::vector<double>{0.0, 0.25, 1.0});
  CHECK(c.calib_seed_start == 1);
  CHECK(c.calib_count == 8);
  CHECK(c.eval_count == 6);
  CHECK(c.write_traces);
  CHECK(c.jobs == 1);
  CHECK(c.out_dir == "results");
  CHECK(c.pdm_scene_seeds == std::vector<std::uint64_t>{100, 101});
  CHECK(c.q_mass == 0.3);  // [global] returns to the top-level section

  CHECK(c.params(DomainId::so3).horizon == 40);
  CHECK(c.params(DomainId::so3).noise_scale == 0.001);
  CHECK(c.params(DomainId::so3).rot_rate == 0.8);  // untouched keys keep defaults
  CHECK(c.params(DomainId::pdm_lite).pdm_levels == 4);
  CHECK(c.params(DomainId::pdm_lite).pdm_waypoints == 12);

  // Domains not named in the file keep their default tables too.
  CHECK(c.spec(DomainId::terrain_ridge).field.ridge_amp > 0.0);
}

TEST_CASE("unknown keys are hard errors with file and line") {
  testutil::TempDir td("config_err");
  auto file = td.path / "bad.cfg";

  write_text_file(file, "domains = so3\n\nfrobnicate = 1\n");
  std::string msg = thrown_message([&] { ExperimentConfig::from_file(file); });
  CHECK(msg.find("bad.cfg:3") != std::string::npos);
  CHECK(msg.find("unknown global key 'frobnicate'") != std::string::npos);

  write_text_file(file, "[so3]\nwarp_speed = 9\n");
  msg = thrown_message([&] { ExperimentConfig::from_file(file); });
  CHECK(msg.find("bad.cfg:2") != std::string::npos);
  CHECK(msg.find("unknown domain key 'warp_speed'") != std::string::npos);

  write_text_file(file, "q_mass\n");
  msg = thrown_message([&] { ExperimentConfig::from_file(file); });
  CHECK(msg.find("key = value") != std::string::npos);

  write_text_file(file, "jobs = one\n");
  CHECK_THROWS_AS(ExperimentConfig::from_file(file), ConfigError);

  CHECK_THROWS_AS(ExperimentConfig::from_file(td.path / "missing.cfg"), ConfigError);
}

TEST_CASE("validation rejects inconsistent experiments") {
  auto base = ExperimentConfig::defaults();

  auto c = base;
  c.domains.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = base;
  c.budget_grid.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = base;
  c.budget_grid.push_back(1.5);
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = base;
  c.calib_count = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = base;
  c.q_mass = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = base;
  c.degeneracy_eps = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = base;
  c.jobs = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = base;
  c.specs[DomainId::so3].alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = base;
  c.specs[DomainId::pdm_lite].obstacles.circles[0].radius = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  // Start pose buried inside an obstacle.
  c = base;
  c.specs[DomainId::pdm_lite].obstacles.circles[0].center = Vec2(-1.2, 0.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);

  // Horizon must factor as levels * inner.
  c = base;
  c.dynamics[DomainId::pdm_lite].pdm_inner = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("seed ranges may touch but never overlap") {
  auto c = ExperimentConfig::defaults();
  c.calib_seed_start = 1000;
  c.calib_count = 64;
  c.eval_seed_start = 1050;
  c.eval_count = 50;
  std::string msg = thrown_message([&] { c.validate(); });
  CHECK(msg.find("[1000, 1064)") != std::string::npos);
  CHECK(msg.find("[1050, 1100)") != std::string::npos);

  c.eval_seed_start = 1064;  // half-open ranges: touching is fine
  CHECK_NOTHROW(c.validate());

  c.eval_seed_start = 900;  // eval below calib overlapping nothing
  CHECK_NOTHROW(c.validate());

  c.eval_count = 101;  // now reaches into [1000, 1064)
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("canonical text pins every effective value") {
  auto a = ExperimentConfig::defaults();
  auto b = ExperimentConfig::defaults();
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(a.content_hash() == b.content_hash());

  b.q_mass = 0.25;
  CHECK(a.content_hash() != b.content_hash());

  b = ExperimentConfig::defaults();
  b.dynamics[DomainId::so3].rot_rate = 0.81;
  CHECK(a.content_hash() != b.content_hash());

  b = ExperimentConfig::defaults();
  b.specs[DomainId::terrain].field.base_amp = 0.5;
  CHECK(a.content_hash() != b.content_hash());

  // Domains outside the run list do not contribute.
  b = ExperimentConfig::defaults();
  b.dynamics[DomainId::se3].trans_vel = 99.0;
  b.domains = {DomainId::so3};
  auto a2 = ExperimentConfig::defaults();
  a2.domains = {DomainId::so3};
  CHECK(a2.content_hash() == b.content_hash());
}

TEST_CASE("lookups on unconfigured domains fail loudly") {
  ExperimentConfig empty;
  CHECK_THROWS_AS(empty.spec(DomainId::so3), ConfigError);
  CHECK_THROWS_AS(empty.params(DomainId::so3), ConfigError);
}

}  // TEST_SUITE
