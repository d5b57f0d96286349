#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corsched/geometry.hpp"

namespace corsched {

// Empirical q-quantile of an ascending pool: sorted[ceil(q*n) - 1], index
// clamped to the valid range. Lower interpolation, so the result is always
// an element of the pool.
double lower_quantile(std::span<const double> sorted, double q);

// Correction step indices for a uniform budget-B schedule on horizon T:
// { floor((k+1) * T / B) - 1 : k = 0..B-1 }. Includes T-1 whenever B >= 1.
std::vector<int> periodic_indices(int horizon, int budget);

// Threshold surface lambda[t][b] for an adaptive policy with horizon T and
// initial budget B. Row t holds entries b = 0..B, so the policy can index by
// its remaining budget directly. Conventions: lambda[t][0] = +inf (never
// fire when broke), lambda[t][b] = -inf when b >= T - t (budget covers every
// remaining step, always fire).
struct ThresholdSurface {
  int horizon = 0;
  int budget = 0;
  std::vector<double> values;  // horizon rows of (budget + 1) entries

  DomainId domain = DomainId::so3;
  std::uint64_t calib_seed_start = 0;
  int calib_count = 0;

  double at(int t, int b) const { return values[static_cast<size_t>(t) * (budget + 1) + b]; }
  double& at(int t, int b) { return values[static_cast<size_t>(t) * (budget + 1) + b]; }

  void save(const std::filesystem::path& path) const;
  static ThresholdSurface load(const std::filesystem::path& path);
};

// Build the surface from uninstrumented defect traces (one vector of T
// proposal defects per calibration rollout). lambda[t][b] is the
// (1 - b/(T-t)) quantile of the pooled suffix {s_u : u >= t} across traces.
ThresholdSurface calibrate_thresholds(const std::vector<std::vector<double>>& defect_traces,
                                      int horizon, int budget);

// Same construction for several budgets at once, sharing one suffix-pool
// sweep. Surfaces come back in the order of `budgets`.
std::vector<ThresholdSurface> calibrate_threshold_family(
    const std::vector<std::vector<double>>& defect_traces, int horizon,
    const std::vector<int>& budgets);

// Remaining correction allowance inside one rollout.
struct BudgetState {
  int remaining = 0;
  std::vector<int> spent_at;

  void spend(int t);  // throws std::logic_error if already exhausted
};

struct Schedule {
  enum class Kind { terminal, stepwise, periodic, adaptive };

  Kind kind = Kind::terminal;
  int horizon = 0;
  int budget = 0;                       // periodic / adaptive only
  std::vector<std::uint8_t> fire_mask;  // periodic only, horizon entries
  const ThresholdSurface* surface = nullptr;  // adaptive only, not owned
};

const char* schedule_name(Schedule::Kind kind);

// Validates kind-specific arguments; adaptive requires a surface whose
// horizon and budget match.
Schedule make_schedule(Schedule::Kind kind, int horizon, int budget = 0,
                       const ThresholdSurface* surface = nullptr);

// Pure decision rule: fire at step t given the proposal defect and the
// remaining budget. Never consults anything later than t.
bool decide(const Schedule& sched, int t, double defect, const BudgetState& budget);

}  // namespace corsched
