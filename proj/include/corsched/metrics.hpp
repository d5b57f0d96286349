#pragma once

#include <array>
#include <span>
#include <vector>

#include "corsched/rollout.hpp"

namespace corsched {

constexpr std::array<Schedule::Kind, 4> kAllKinds = {
    Schedule::Kind::terminal, Schedule::Kind::stepwise,
    Schedule::Kind::periodic, Schedule::Kind::adaptive};

// Pathwise fidelity: sum over t = 1..T of d(x_t, M) for the states the
// schedule actually kept. Terminal's final projection replaces x_T first.
double path_error(const RolloutTrace& trace);

// Statewise deviation from the stepwise arm of the same cell:
// sum of rho(x_t, x_t^step) over t = 1..T with off-manifold states projected
// before measuring. Requires state storage on both traces.
double state_path_error(const RolloutTrace& trace, const RolloutTrace& stepwise,
                        const DomainSpec& spec);

// rho between the two final states (projected first if off-manifold).
double endpoint_distance(const RolloutTrace& trace, const RolloutTrace& stepwise,
                         const DomainSpec& spec);

// Fraction of total proposal-defect mass inside the top ceil(q*T) steps.
// NaN when the total mass is zero.
double top_q_mass(std::span<const double> defects, double q);

// (m_periodic - m_adaptive) / m_periodic.
double improvement(double m_periodic, double m_adaptive);

// Headroom recovered by a schedule with normalized error nepe.
double benefit_recovered(double nepe);

struct WinRate {
  double rate = 0.0;  // wins / n, ties count as non-wins
  double se = 0.0;    // sqrt(rate * (1 - rate) / n)
  int n = 0;
  int wins = 0, ties = 0;
};

// Win = first strictly smaller than second, elementwise over paired values.
WinRate win_rate(std::span<const double> first, std::span<const double> second);

struct ScheduleMetrics {
  double e_path = 0.0;
  double e_state = 0.0;
  double endpoint = 0.0;
  double nepe = 0.0;  // NaN when the cell is degenerate
  double achieved_budget = 0.0;
  int events = 0;
  int projection_calls = 0;
  bool final_projection = false;
};

struct CellMetrics {
  DomainId domain = DomainId::so3;
  std::uint64_t seed = 0;
  double budget_fraction = 0.0;
  int target_budget = 0;
  int horizon = 0;

  bool failed = false;      // some arm blew up; only identity fields valid
  bool degenerate = false;  // |E_term - E_step| below epsilon; NEPE undefined
  double denom = 0.0;       // E_path(terminal) - E_path(stepwise)

  // Concentration of the uncorrected defect signal (terminal arm proposals).
  double c_q = 0.0;
  double q = 0.2;

  std::array<ScheduleMetrics, 4> by_kind;  // indexed by Schedule::Kind

  const ScheduleMetrics& of(Schedule::Kind k) const {
    return by_kind[static_cast<size_t>(k)];
  }
  ScheduleMetrics& of(Schedule::Kind k) { return by_kind[static_cast<size_t>(k)]; }
};

CellMetrics compute_cell_metrics(const PairedCell& cell, const DomainSpec& spec,
                                 double q, double degeneracy_eps);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};

MeanSE mean_se(std::span<const double> xs);

}  // namespace corsched
