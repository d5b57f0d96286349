#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "corsched/dynamics.hpp"
#include "corsched/geometry.hpp"

namespace corsched {

// Full experiment description. Defaults reproduce the headline study; a
// config file overrides fields with flat key = value lines, one [section]
// per domain. Unknown keys are a hard error, not a warning.
struct ExperimentConfig {
  std::vector<DomainId> domains;

  std::vector<double> budget_grid;  // fractions in [0, 1]
  std::uint64_t calib_seed_start = 1000;
  int calib_count = 64;
  std::uint64_t eval_seed_start = 5000;
  int eval_count = 50;

  double q_mass = 0.2;
  double degeneracy_eps = 1e-8;
  double summary_budget = 0.25;  // fraction reported in summary.csv

  bool write_traces = false;
  bool compact_traces = false;
  int jobs = 0;  // 0 = hardware concurrency
  std::string out_dir = "out";

  std::vector<std::uint64_t> pdm_scene_seeds;  // pdm verb; empty = first 3 eval seeds

  std::map<DomainId, DomainSpec> specs;
  std::map<DomainId, DynamicsParams> dynamics;

  static ExperimentConfig defaults();
  static ExperimentConfig from_file(const std::filesystem::path& path);

  const DomainSpec& spec(DomainId id) const;
  const DynamicsParams& params(DomainId id) const;

  // Throws ConfigError: empty grid, fractions outside [0,1], overlapping
  // calibration/evaluation seed ranges, per-domain parameter validation.
  void validate() const;

  // Canonical text dump of every effective value; hashing this ties output
  // artifacts to the exact configuration that produced them.
  std::string canonical_text() const;
  std::uint64_t content_hash() const;
};

std::vector<double> parse_budget_grid(const std::string& text);

}  // namespace corsched
