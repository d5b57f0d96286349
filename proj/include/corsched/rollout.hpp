#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "corsched/dynamics.hpp"
#include "corsched/schedule.hpp"

namespace corsched {

struct RolloutTrace {
  DomainId domain = DomainId::so3;
  std::uint64_t seed = 0;
  Schedule::Kind schedule = Schedule::Kind::terminal;
  int horizon = 0;

  // states has horizon+1 entries (empty in compact mode).
  std::vector<State> states;
  // Defect of the raw proposal at each step (what the policy saw), and of
  // the state actually kept after any correction. Both have horizon entries.
  std::vector<double> proposal_defects;
  std::vector<double> post_defects;

  std::vector<int> events;  // steps where an in-horizon correction fired
  int projection_calls = 0;
  // Terminal-kind correction of x_T; not an event, accounted separately.
  bool final_projection = false;

  bool failed = false;  // non-finite state; defects are truncated
  int failed_step = -1;

  double achieved_budget() const {
    return horizon > 0 ? static_cast<double>(events.size()) / horizon : 0.0;
  }
};

struct RolloutOptions {
  bool keep_states = true;
};

RolloutTrace run_rollout(const DomainSpec& spec, const DynamicsParams& params,
                         const Schedule& sched, std::uint64_t seed,
                         const RolloutOptions& opts = {});

// Noise-injectable variant used by determinism tests.
RolloutTrace run_rollout(const DomainSpec& spec, const DynamicsParams& params,
                         const Schedule& sched, const NoiseStream& noise,
                         const RolloutOptions& opts = {});

// Four arms over one (seed, budget fraction) cell. All arms share the seed,
// hence the initial state and the entire noise sequence.
struct PairedCell {
  DomainId domain = DomainId::so3;
  std::uint64_t seed = 0;
  double budget_fraction = 0.0;
  int target_budget = 0;

  RolloutTrace terminal;
  RolloutTrace stepwise;
  RolloutTrace periodic;
  RolloutTrace adaptive;

  const RolloutTrace& arm(Schedule::Kind k) const;
  bool any_failed() const;
};

// target budget = round(fraction * horizon), ties to even.
int budget_from_fraction(double fraction, int horizon);

PairedCell run_paired_cell(const DomainSpec& spec, const DynamicsParams& params,
                           double budget_fraction, std::uint64_t seed,
                           const ThresholdSurface& surface,
                           const RolloutOptions& opts = {});

// Defect trace of a terminal (uninstrumented) rollout: what calibration and
// the concentration statistic both consume.
std::vector<double> terminal_defect_trace(const DomainSpec& spec,
                                          const DynamicsParams& params,
                                          std::uint64_t seed);

}  // namespace corsched
