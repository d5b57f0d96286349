#include "corsched/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "corsched/errors.hpp"
#include "corsched/io.hpp"

namespace corsched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double lower_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("lower_quantile: empty pool");
  auto n = static_cast<long>(sorted.size());
  long idx = static_cast<long>(std::ceil(q * static_cast<double>(n))) - 1;
  idx = std::clamp(idx, 0l, n - 1);
  return sorted[static_cast<size_t>(idx)];
}

std::vector<int> periodic_indices(int horizon, int budget) {
  if (horizon <= 0) throw std::invalid_argument("periodic_indices: horizon <= 0");
  budget = std::min(budget, horizon);
  std::vector<int> out;
  out.reserve(static_cast<size_t>(std::max(budget, 0)));
  for (int k = 0; k < budget; ++k) {
    long idx = static_cast<long>(k + 1) * horizon / budget - 1;
    out.push_back(static_cast<int>(idx));
  }
  return out;
}

const char* schedule_name(Schedule::Kind kind) {
  switch (kind) {
    case Schedule::Kind::terminal: return "terminal";
    case Schedule::Kind::stepwise: return "stepwise";
    case Schedule::Kind::periodic: return "periodic";
    case Schedule::Kind::adaptive: return "adaptive";
  }
  return "?";
}

Schedule make_schedule(Schedule::Kind kind, int horizon, int budget,
                       const ThresholdSurface* surface) {
  if (horizon <= 0) throw ConfigError("schedule horizon must be positive");
  Schedule s;
  s.kind = kind;
  s.horizon = horizon;
  switch (kind) {
    case Schedule::Kind::terminal:
    case Schedule::Kind::stepwise:
      break;
    case Schedule::Kind::periodic: {
      if (budget < 0 || budget > horizon)
        throw ConfigError("periodic budget outside [0, horizon]");
      s.budget = budget;
      s.fire_mask.assign(static_cast<size_t>(horizon), 0);
      for (int t : periodic_indices(horizon, budget))
        s.fire_mask[static_cast<size_t>(t)] = 1;
      break;
    }
    case Schedule::Kind::adaptive: {
      if (budget < 0 || budget > horizon)
        throw ConfigError("adaptive budget outside [0, horizon]");
      if (!surface) throw ConfigError("adaptive schedule requires a threshold surface");
      if (surface->horizon != horizon || surface->budget != budget)
        throw ConfigError("threshold surface shape does not match schedule");
      s.budget = budget;
      s.surface = surface;
      break;
    }
  }
  return s;
}

bool decide(const Schedule& sched, int t, double defect, const BudgetState& budget) {
  switch (sched.kind) {
    case Schedule::Kind::terminal:
      return t == sched.horizon - 1;
    case Schedule::Kind::stepwise:
      return true;
    case Schedule::Kind::periodic:
      return sched.fire_mask[static_cast<size_t>(t)] != 0;
    case Schedule::Kind::adaptive: {
      if (budget.remaining <= 0) return false;
      return defect >= sched.surface->at(t, budget.remaining);
    }
  }
  return false;
}

void BudgetState::spend(int t) {
  if (remaining <= 0) throw std::logic_error("BudgetState::spend with no budget left");
  --remaining;
  spent_at.push_back(t);
}

std::vector<ThresholdSurface> calibrate_threshold_family(
    const std::vector<std::vector<double>>& defect_traces, int horizon,
    const std::vector<int>& budgets) {
  if (horizon <= 0) throw ConfigError("calibrate_thresholds: horizon must be positive");
  for (int budget : budgets)
    if (budget < 0 || budget > horizon)
      throw ConfigError("calibrate_thresholds: budget outside [0, horizon]");
  if (defect_traces.empty())
    throw ConfigError("calibrate_thresholds: no calibration traces");
  for (const auto& tr : defect_traces)
    if (static_cast<int>(tr.size()) != horizon)
      throw ConfigError("calibrate_thresholds: trace length != horizon");

  std::vector<ThresholdSurface> out(budgets.size());
  for (size_t i = 0; i < budgets.size(); ++i) {
    out[i].horizon = horizon;
    out[i].budget = budgets[i];
    out[i].values.assign(static_cast<size_t>(horizon) * (budgets[i] + 1), kInf);
  }

  // Suffix pools built from the back: pool at t is pool at t+1 plus every
  // trace's defect at t, kept sorted with an in-place merge. One sweep
  // serves every requested budget.
  std::vector<double> pool;
  pool.reserve(defect_traces.size() * static_cast<size_t>(horizon));
  for (int t = horizon - 1; t >= 0; --t) {
    size_t old_size = pool.size();
    for (const auto& tr : defect_traces) pool.push_back(tr[static_cast<size_t>(t)]);
    std::sort(pool.begin() + static_cast<long>(old_size), pool.end());
    std::inplace_merge(pool.begin(), pool.begin() + static_cast<long>(old_size), pool.end());

    int remaining_steps = horizon - t;
    for (size_t i = 0; i < budgets.size(); ++i) {
      for (int b = 0; b <= budgets[i]; ++b) {
        double v;
        if (b == 0) {
          v = kInf;
        } else if (b >= remaining_steps) {
          v = -kInf;
        } else {
          double q = 1.0 - static_cast<double>(b) / remaining_steps;
          v = lower_quantile(pool, q);
        }
        out[i].at(t, b) = v;
      }
    }
  }

  // Larger remaining budget can only lower the bar; quantile construction
  // guarantees it, so a violation means a calibration bug.
  for (const auto& surf : out)
    for (int t = 0; t < horizon; ++t)
      for (int b = 1; b <= surf.budget; ++b)
        if (surf.at(t, b) > surf.at(t, b - 1))
          throw NumericalError("threshold surface not monotone in remaining budget");
  return out;
}

ThresholdSurface calibrate_thresholds(const std::vector<std::vector<double>>& defect_traces,
                                      int horizon, int budget) {
  return calibrate_threshold_family(defect_traces, horizon, {budget}).front();
}

void ThresholdSurface::save(const std::filesystem::path& path) const {
  std::ostringstream os;
  os << "corsched-surface v1\n";
  os << "domain " << domain_name(domain) << "\n";
  os << "horizon " << horizon << "\n";
  os << "budget " << budget << "\n";
  os << "calib_seed_start " << calib_seed_start << "\n";
  os << "calib_count " << calib_count << "\n";
  for (int t = 0; t < horizon; ++t) {
    for (int b = 0; b <= budget; ++b) {
      if (b) os << ' ';
      os << fmt_g17(at(t, b));
    }
    os << '\n';
  }
  write_text_file(path, os.str());
}

ThresholdSurface ThresholdSurface::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("threshold surface not found: " + path.string());
  std::string magic, version;
  in >> magic >> version;
  if (magic != "corsched-surface" || version != "v1")
    throw NumericalError("unrecognized surface header in " + path.string());

  ThresholdSurface surf;
  std::string key;
  for (int i = 0; i < 5; ++i) {
    in >> key;
    if (key == "domain") {
      std::string name;
      in >> name;
      surf.domain = domain_from_name(name);
    } else if (key == "horizon") {
      in >> surf.horizon;
    } else if (key == "budget") {
      in >> surf.budget;
    } else if (key == "calib_seed_start") {
      in >> surf.calib_seed_start;
    } else if (key == "calib_count") {
      in >> surf.calib_count;
    } else {
      throw NumericalError("unexpected surface field '" + key + "' in " + path.string());
    }
  }
  if (!in || surf.horizon <= 0 || surf.budget < 0)
    throw NumericalError("malformed surface file " + path.string());

  surf.values.resize(static_cast<size_t>(surf.horizon) * (surf.budget + 1));
  for (auto& v : surf.values) {
    std::string tok;
    in >> tok;
    if (!in) throw NumericalError("truncated surface file " + path.string());
    if (tok == "inf") {
      v = kInf;
    } else if (tok == "-inf") {
      v = -kInf;
    } else {
      v = std::stod(tok);
    }
  }
  return surf;
}

}  // namespace corsched
