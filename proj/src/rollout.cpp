#include "corsched/rollout.hpp"

#include <cmath>

#include "corsched/errors.hpp"

namespace corsched {

namespace {
// A state this close to the manifold is treated as feasible; used only to
// decide whether the trailing terminal projection is needed.
constexpr double kFeasibleTol = 1e-9;
}  // namespace

int budget_from_fraction(double fraction, int horizon) {
  if (fraction < 0.0 || fraction > 1.0)
    throw ConfigError("budget fraction outside [0, 1]");
  return static_cast<int>(std::nearbyint(fraction * horizon));
}

const RolloutTrace& PairedCell::arm(Schedule::Kind k) const {
  switch (k) {
    case Schedule::Kind::terminal: return terminal;
    case Schedule::Kind::stepwise: return stepwise;
    case Schedule::Kind::periodic: return periodic;
    case Schedule::Kind::adaptive: return adaptive;
  }
  throw std::logic_error("PairedCell::arm: bad kind");
}

bool PairedCell::any_failed() const {
  return terminal.failed || stepwise.failed || periodic.failed || adaptive.failed;
}

RolloutTrace run_rollout(const DomainSpec& spec, const DynamicsParams& params,
                         const Schedule& sched, const NoiseStream& noise,
                         const RolloutOptions& opts) {
  if (sched.horizon != params.horizon)
    throw ConfigError("schedule horizon does not match dynamics horizon");
  const int T = params.horizon;

  RolloutTrace trace;
  trace.domain = spec.id;
  trace.seed = noise.seed();
  trace.schedule = sched.kind;
  trace.horizon = T;
  trace.proposal_defects.reserve(static_cast<size_t>(T));
  trace.post_defects.reserve(static_cast<size_t>(T));

  State x = initial_state(spec, params, noise);
  if (opts.keep_states) {
    trace.states.reserve(static_cast<size_t>(T) + 1);
    trace.states.push_back(x);
  }

  BudgetState budget;
  budget.remaining = sched.budget;

  const bool budgeted = sched.kind == Schedule::Kind::periodic ||
                        sched.kind == Schedule::Kind::adaptive;

  for (int t = 0; t < T; ++t) {
    State proposal;
    double s_t;
    try {
      proposal = propose_update(x, t, spec, params, noise);
      if (!state_is_finite(proposal))
        throw DegenerateStateError("non-finite proposal");
      s_t = state_defect(proposal, spec);
      // Terminal's only correction is the trailing one; its in-loop decide
      // is the constant-false restriction of the pure rule.
      bool fire = sched.kind != Schedule::Kind::terminal &&
                  decide(sched, t, s_t, budget);
      if (fire) {
        if (budgeted) budget.spend(t);
        x = project_state(proposal, spec);
        ++trace.projection_calls;
        trace.events.push_back(t);
      } else {
        x = proposal;
      }
    } catch (const DegenerateStateError&) {
      trace.failed = true;
      trace.failed_step = t;
      break;
    }
    trace.proposal_defects.push_back(s_t);
    trace.post_defects.push_back(state_defect(x, spec));
    if (opts.keep_states) trace.states.push_back(x);
  }

  if (!trace.failed && sched.kind != Schedule::Kind::stepwise &&
      trace.post_defects.back() > kFeasibleTol) {
    x = project_state(x, spec);
    trace.final_projection = true;
    ++trace.projection_calls;
    trace.post_defects.back() = state_defect(x, spec);
    if (opts.keep_states) trace.states.back() = x;
  }
  return trace;
}

RolloutTrace run_rollout(const DomainSpec& spec, const DynamicsParams& params,
                         const Schedule& sched, std::uint64_t seed,
                         const RolloutOptions& opts) {
  return run_rollout(spec, params, sched, NoiseStream(seed), opts);
}

PairedCell run_paired_cell(const DomainSpec& spec, const DynamicsParams& params,
                           double budget_fraction, std::uint64_t seed,
                           const ThresholdSurface& surface,
                           const RolloutOptions& opts) {
  PairedCell cell;
  cell.domain = spec.id;
  cell.seed = seed;
  cell.budget_fraction = budget_fraction;
  cell.target_budget = budget_from_fraction(budget_fraction, params.horizon);

  NoiseStream noise(seed);
  const int T = params.horizon;
  const int B = cell.target_budget;

  cell.terminal = run_rollout(spec, params,
                              make_schedule(Schedule::Kind::terminal, T), noise, opts);
  cell.stepwise = run_rollout(spec, params,
                              make_schedule(Schedule::Kind::stepwise, T), noise, opts);
  cell.periodic = run_rollout(spec, params,
                              make_schedule(Schedule::Kind::periodic, T, B), noise, opts);
  cell.adaptive = run_rollout(
      spec, params, make_schedule(Schedule::Kind::adaptive, T, B, &surface), noise, opts);
  return cell;
}

std::vector<double> terminal_defect_trace(const DomainSpec& spec,
                                          const DynamicsParams& params,
                                          std::uint64_t seed) {
  RolloutOptions opts;
  opts.keep_states = false;
  RolloutTrace trace = run_rollout(
      spec, params, make_schedule(Schedule::Kind::terminal, params.horizon), seed, opts);
  if (trace.failed)
    throw NumericalError("calibration rollout failed at step " +
                         std::to_string(trace.failed_step) + " (domain " +
                         domain_name(spec.id) + ", seed " + std::to_string(seed) + ")");
  return trace.proposal_defects;
}

}  // namespace corsched
