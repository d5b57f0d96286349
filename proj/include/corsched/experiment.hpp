#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "corsched/config.hpp"
#include "corsched/io.hpp"
#include "corsched/metrics.hpp"

namespace corsched {

struct ExperimentPaths {
  std::filesystem::path out;

  std::filesystem::path surface(DomainId d, int budget) const;
  std::filesystem::path cells() const { return out / "cells.jsonl"; }
  std::filesystem::path traces() const { return out / "traces.jsonl"; }
  std::filesystem::path summary() const { return out / "summary.csv"; }
  std::filesystem::path frontier() const { return out / "frontier.csv"; }
  std::filesystem::path winrates() const { return out / "winrates.csv"; }
  std::filesystem::path budget_usage() const { return out / "budget_usage.csv"; }
  std::filesystem::path manifest() const { return out / "manifest.txt"; }
  std::filesystem::path frontier_svg(DomainId d) const;
  std::filesystem::path pdm_scene_svg(std::uint64_t seed) const;
};

// Calibrate every (domain, budget) surface from terminal rollouts and save
// them under out/. N_cal rollouts are shared across the budget grid.
void run_calibration(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                     std::ostream& log);

struct GridResult {
  std::vector<CellMetrics> cells;  // ordered by (domain, budget, seed)
  int failed_cells = 0;
};

// Full evaluation grid. Loads surfaces (MissingArtifactError if absent),
// runs cells on a worker pool, writes cells.jsonl (+ traces.jsonl when
// configured). Deterministic output order regardless of job count.
GridResult run_grid(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                    std::ostream& log);

// Aggregate cells.jsonl into summary/frontier/winrates/budget_usage CSVs and
// the frontier SVGs.
void write_reports(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                   std::span<const CellMetrics> cells, std::ostream& log);

// Scene SVGs plus a console table for the sampler domain.
void run_pdm_scenes(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                    std::ostream& log);

void write_manifest(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                    std::string_view stage);

// Fast end-to-end exercise on a reduced grid; returns false on any check
// failure and logs what broke.
bool run_selftest(std::ostream& log);

}  // namespace corsched
