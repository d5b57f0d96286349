#include "corsched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "corsched/errors.hpp"

namespace corsched {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kFeasibleTol = 1e-9;

// rho needs on-manifold arguments; anything further out gets projected
// first. Skipping the projection for already-feasible states saves an SVD
// per stepwise state.
State onto_manifold(const State& x, const DomainSpec& spec) {
  if (state_defect(x, spec) <= kFeasibleTol) return x;
  return project_state(x, spec);
}
}  // namespace

double path_error(const RolloutTrace& trace) {
  if (trace.failed) throw NumericalError("path_error on a failed trace");
  return std::accumulate(trace.post_defects.begin(), trace.post_defects.end(), 0.0);
}

double state_path_error(const RolloutTrace& trace, const RolloutTrace& stepwise,
                        const DomainSpec& spec) {
  if (trace.horizon != stepwise.horizon)
    throw std::invalid_argument("state_path_error: mismatched horizons");
  if (trace.states.empty() || stepwise.states.empty())
    throw std::invalid_argument("state_path_error: states were not stored");
  double total = 0.0;
  for (int t = 1; t <= trace.horizon; ++t) {
    State a = onto_manifold(trace.states[static_cast<size_t>(t)], spec);
    State b = onto_manifold(stepwise.states[static_cast<size_t>(t)], spec);
    total += state_distance(a, b, spec);
  }
  return total;
}

double endpoint_distance(const RolloutTrace& trace, const RolloutTrace& stepwise,
                         const DomainSpec& spec) {
  if (trace.states.empty() || stepwise.states.empty())
    throw std::invalid_argument("endpoint_distance: states were not stored");
  State a = onto_manifold(trace.states.back(), spec);
  State b = onto_manifold(stepwise.states.back(), spec);
  return state_distance(a, b, spec);
}

double top_q_mass(std::span<const double> defects, double q) {
  if (defects.empty() || q <= 0.0 || q > 1.0)
    throw std::invalid_argument("top_q_mass: bad arguments");
  double total = std::accumulate(defects.begin(), defects.end(), 0.0);
  if (total <= 0.0) return kNan;
  size_t k = static_cast<size_t>(
      std::ceil(q * static_cast<double>(defects.size())));
  k = std::min(k, defects.size());
  if (k == defects.size()) return 1.0;
  // Sort indices by (value desc, index asc) so ties resolve to earlier
  // steps deterministically.
  std::vector<size_t> order(defects.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (defects[a] != defects[b]) return defects[a] > defects[b];
    return a < b;
  });
  double top = 0.0;
  for (size_t i = 0; i < k; ++i) top += defects[order[i]];
  // The two sums round differently, so clamp the ratio into (0, 1].
  return std::min(1.0, top / total);
}

double improvement(double m_periodic, double m_adaptive) {
  if (m_periodic <= 0.0) return kNan;
  return (m_periodic - m_adaptive) / m_periodic;
}

double benefit_recovered(double nepe) { return 1.0 - nepe; }

WinRate win_rate(std::span<const double> first, std::span<const double> second) {
  if (first.empty() || first.size() != second.size())
    throw std::invalid_argument("win_rate: empty or mismatched pairs");
  WinRate w;
  w.n = static_cast<int>(first.size());
  for (size_t i = 0; i < first.size(); ++i) {
    if (first[i] < second[i]) {
      ++w.wins;
    } else if (first[i] == second[i]) {
      ++w.ties;
    }
  }
  w.rate = static_cast<double>(w.wins) / w.n;
  w.se = std::sqrt(w.rate * (1.0 - w.rate) / w.n);
  return w;
}

CellMetrics compute_cell_metrics(const PairedCell& cell, const DomainSpec& spec,
                                 double q, double degeneracy_eps) {
  CellMetrics m;
  m.domain = cell.domain;
  m.seed = cell.seed;
  m.budget_fraction = cell.budget_fraction;
  m.target_budget = cell.target_budget;
  m.horizon = cell.terminal.horizon;
  m.q = q;

  if (cell.any_failed()) {
    m.failed = true;
    return m;
  }

  double e_step = path_error(cell.stepwise);
  double e_term = path_error(cell.terminal);
  m.denom = e_term - e_step;
  m.degenerate = m.denom < degeneracy_eps;
  m.c_q = top_q_mass(cell.terminal.proposal_defects, q);

  for (Schedule::Kind k : kAllKinds) {
    const RolloutTrace& tr = cell.arm(k);
    ScheduleMetrics& sm = m.of(k);
    sm.e_path = path_error(tr);
    sm.e_state = state_path_error(tr, cell.stepwise, spec);
    sm.endpoint = endpoint_distance(tr, cell.stepwise, spec);
    sm.nepe = m.degenerate ? kNan : (sm.e_path - e_step) / m.denom;
    sm.achieved_budget = tr.achieved_budget();
    sm.events = static_cast<int>(tr.events.size());
    sm.projection_calls = tr.projection_calls;
    sm.final_projection = tr.final_projection;
  }
  return m;
}

MeanSE mean_se(std::span<const double> xs) {
  MeanSE r;
  r.n = static_cast<int>(xs.size());
  if (r.n == 0) return r;
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / r.n;
  if (r.n < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / (r.n - 1)) / std::sqrt(static_cast<double>(r.n));
  return r;
}

}  // namespace corsched
