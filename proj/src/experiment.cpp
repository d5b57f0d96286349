#include "corsched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "corsched/errors.hpp"
#include "corsched/pdm.hpp"

namespace corsched {

namespace {

constexpr const char* kToolVersion = "corsched 1.0";

const char* schedule_color(Schedule::Kind k) {
  switch (k) {
    case Schedule::Kind::terminal: return "#888888";
    case Schedule::Kind::stepwise: return "#2066a8";
    case Schedule::Kind::periodic: return "#d4a018";
    case Schedule::Kind::adaptive: return "#c03028";
  }
  return "#000000";
}

double median(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

std::filesystem::path ExperimentPaths::surface(DomainId d, int budget) const {
  return out / ("surface_" + std::string(domain_name(d)) + "_B" +
                std::to_string(budget) + ".txt");
}

std::filesystem::path ExperimentPaths::frontier_svg(DomainId d) const {
  return out / ("frontier_" + std::string(domain_name(d)) + ".svg");
}

std::filesystem::path ExperimentPaths::pdm_scene_svg(std::uint64_t seed) const {
  return out / ("pdm_scene_" + std::to_string(seed) + ".svg");
}

void run_calibration(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                     std::ostream& log) {
  cfg.validate();
  for (DomainId domain : cfg.domains) {
    const DomainSpec& spec = cfg.spec(domain);
    const DynamicsParams& params = cfg.params(domain);

    std::vector<std::vector<double>> traces;
    traces.reserve(static_cast<size_t>(cfg.calib_count));
    for (int i = 0; i < cfg.calib_count; ++i)
      traces.push_back(terminal_defect_trace(spec, params, cfg.calib_seed_start + i));

    std::vector<int> budgets;
    std::set<int> seen;
    for (double f : cfg.budget_grid) {
      int b = budget_from_fraction(f, params.horizon);
      if (seen.insert(b).second) budgets.push_back(b);
    }

    auto surfaces = calibrate_threshold_family(traces, params.horizon, budgets);
    for (auto& surf : surfaces) {
      surf.domain = domain;
      surf.calib_seed_start = cfg.calib_seed_start;
      surf.calib_count = cfg.calib_count;
      surf.save(paths.surface(domain, surf.budget));
    }
    log << "calibrated " << domain_name(domain) << ": " << traces.size()
        << " rollouts, " << surfaces.size() << " surfaces\n";
  }
}

GridResult run_grid(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                    std::ostream& log) {
  cfg.validate();

  // Load every needed surface up front so a missing artifact fails fast.
  std::map<std::pair<DomainId, int>, ThresholdSurface> surfaces;
  for (DomainId domain : cfg.domains) {
    const DynamicsParams& params = cfg.params(domain);
    for (double f : cfg.budget_grid) {
      int b = budget_from_fraction(f, params.horizon);
      auto key = std::make_pair(domain, b);
      if (!surfaces.count(key)) {
        auto path = paths.surface(domain, b);
        if (!std::filesystem::exists(path))
          throw MissingArtifactError("missing threshold surface: " + path.string());
        ThresholdSurface surf = ThresholdSurface::load(path);
        if (surf.horizon != params.horizon || surf.budget != b)
          throw MissingArtifactError("surface shape mismatch in " + path.string());
        surfaces.emplace(key, std::move(surf));
      }
    }
  }

  struct Task {
    DomainId domain;
    double fraction;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (DomainId domain : cfg.domains)
    for (double f : cfg.budget_grid)
      for (int i = 0; i < cfg.eval_count; ++i)
        tasks.push_back({domain, f, cfg.eval_seed_start + i});

  struct CellOutput {
    CellMetrics metrics;
    std::string trace_lines;
  };
  std::vector<CellOutput> results(tasks.size());

  RolloutOptions opts;
  opts.keep_states = true;

  std::atomic<size_t> next{0};
  std::atomic<bool> aborted{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size() || aborted.load()) break;
      const Task& task = tasks[i];
      try {
        const DomainSpec& spec = cfg.spec(task.domain);
        const DynamicsParams& params = cfg.params(task.domain);
        int b = budget_from_fraction(task.fraction, params.horizon);
        const ThresholdSurface& surf = surfaces.at({task.domain, b});
        PairedCell cell = run_paired_cell(spec, params, task.fraction, task.seed,
                                          surf, opts);
        results[i].metrics =
            compute_cell_metrics(cell, spec, cfg.q_mass, cfg.degeneracy_eps);
        if (cfg.write_traces) {
          std::ostringstream os;
          for (Schedule::Kind k : kAllKinds) {
            RolloutTrace tr = cell.arm(k);
            if (cfg.compact_traces) tr.states.clear();
            os << trace_to_json(tr).dump() << '\n';
          }
          results[i].trace_lines = os.str();
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        aborted.store(true);
        break;
      }
    }
  };

  unsigned n_jobs = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
  n_jobs = std::min<unsigned>(n_jobs, static_cast<unsigned>(tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < n_jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  GridResult out;
  out.cells.reserve(results.size());
  std::string trace_blob;
  for (auto& r : results) {
    if (r.metrics.failed) ++out.failed_cells;
    out.cells.push_back(std::move(r.metrics));
    trace_blob += r.trace_lines;
  }
  write_cells_jsonl(paths.cells(), out.cells);
  if (cfg.write_traces) write_text_file(paths.traces(), trace_blob);

  log << "grid: " << out.cells.size() << " cells";
  if (out.failed_cells) {
    log << ", " << out.failed_cells << " FAILED:";
    for (const auto& c : out.cells)
      if (c.failed)
        log << " (" << domain_name(c.domain) << ", " << fmt_g12(c.budget_fraction)
            << ", " << c.seed << ")";
  }
  log << '\n';
  return out;
}

namespace {

struct GroupStats {
  std::array<std::vector<double>, 4> nepe, e_path, e_state, endpoint, achieved;
  std::vector<double> c_q;
  std::array<double, 4> achieved_max{};
  std::array<std::vector<int>, 4> budgets_used;
  int n_total = 0, n_failed = 0, n_degenerate = 0;

  void add(const CellMetrics& m) {
    ++n_total;
    if (m.failed) {
      ++n_failed;
      return;
    }
    if (m.degenerate) ++n_degenerate;
    if (!std::isnan(m.c_q)) c_q.push_back(m.c_q);
    for (Schedule::Kind k : kAllKinds) {
      auto i = static_cast<size_t>(k);
      const ScheduleMetrics& sm = m.of(k);
      if (!m.degenerate) nepe[i].push_back(sm.nepe);
      e_path[i].push_back(sm.e_path);
      e_state[i].push_back(sm.e_state);
      endpoint[i].push_back(sm.endpoint);
      achieved[i].push_back(sm.achieved_budget);
      achieved_max[i] = std::max(achieved_max[i], sm.achieved_budget);
    }
  }
};

}  // namespace

void write_reports(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                   std::span<const CellMetrics> cells, std::ostream& log) {
  std::map<std::pair<DomainId, double>, GroupStats> groups;
  std::map<DomainId, std::vector<const CellMetrics*>> by_domain;
  for (const auto& c : cells) {
    groups[{c.domain, c.budget_fraction}].add(c);
    by_domain[c.domain].push_back(&c);
  }

  auto kindex = [](Schedule::Kind k) { return static_cast<size_t>(k); };

  // frontier.csv: one row per (domain, budget, schedule).
  {
    std::ostringstream os;
    os << "domain,budget_fraction,schedule,nepe_mean,nepe_se,n\n";
    for (const auto& [key, g] : groups) {
      for (Schedule::Kind k : kAllKinds) {
        MeanSE ms = mean_se(g.nepe[kindex(k)]);
        os << domain_name(key.first) << ',' << fmt_g12(key.second) << ','
           << schedule_name(k) << ',' << fmt_g12(ms.mean) << ',' << fmt_g12(ms.se)
           << ',' << ms.n << '\n';
      }
    }
    write_text_file(paths.frontier(), os.str());
  }

  // budget_usage.csv: achieved budget fractions for the budgeted schedules.
  {
    std::ostringstream os;
    os << "domain,budget_fraction,schedule,target_budget,achieved_mean,achieved_se,"
          "achieved_max\n";
    for (const auto& [key, g] : groups) {
      int target = budget_from_fraction(key.second, cfg.params(key.first).horizon);
      for (Schedule::Kind k : {Schedule::Kind::periodic, Schedule::Kind::adaptive}) {
        MeanSE ms = mean_se(g.achieved[kindex(k)]);
        os << domain_name(key.first) << ',' << fmt_g12(key.second) << ','
           << schedule_name(k) << ',' << target << ',' << fmt_g12(ms.mean) << ','
           << fmt_g12(ms.se) << ',' << fmt_g12(g.achieved_max[kindex(k)]) << '\n';
      }
    }
    write_text_file(paths.budget_usage(), os.str());
  }

  // summary.csv: the fixed-budget table at the configured summary fraction.
  {
    double target = cfg.summary_budget;
    std::ostringstream os;
    os << "domain,budget_fraction,n,n_degenerate,n_failed,"
          "nepe_periodic,nepe_periodic_se,nepe_adaptive,nepe_adaptive_se,"
          "delta_nepe,benefit_adaptive,win_pathwise,win_pathwise_se,"
          "e_path_terminal,e_path_stepwise,e_path_periodic,e_path_adaptive,"
          "e_state_periodic,e_state_adaptive,endpoint_periodic,endpoint_adaptive,"
          "c_q_mean\n";
    for (DomainId domain : cfg.domains) {
      // Nearest grid fraction to the requested summary budget.
      double best = cfg.budget_grid.front();
      for (double f : cfg.budget_grid)
        if (std::abs(f - target) < std::abs(best - target)) best = f;
      auto it = groups.find({domain, best});
      if (it == groups.end()) continue;
      const GroupStats& g = it->second;
      if (g.nepe[kindex(Schedule::Kind::adaptive)].empty()) {
        log << "summary: all cells degenerate for " << domain_name(domain)
            << " at budget " << fmt_g12(best) << ", row omitted ("
            << g.n_degenerate << " degenerate)\n";
        continue;
      }
      MeanSE np = mean_se(g.nepe[kindex(Schedule::Kind::periodic)]);
      MeanSE na = mean_se(g.nepe[kindex(Schedule::Kind::adaptive)]);
      WinRate win = win_rate(g.e_path[kindex(Schedule::Kind::adaptive)],
                             g.e_path[kindex(Schedule::Kind::periodic)]);
      os << domain_name(domain) << ',' << fmt_g12(best) << ',' << g.n_total << ','
         << g.n_degenerate << ',' << g.n_failed << ',' << fmt_g12(np.mean) << ','
         << fmt_g12(np.se) << ',' << fmt_g12(na.mean) << ',' << fmt_g12(na.se)
         << ',' << fmt_g12(improvement(np.mean, na.mean)) << ','
         << fmt_g12(benefit_recovered(na.mean)) << ',' << fmt_g12(win.rate) << ','
         << fmt_g12(win.se) << ',' << fmt_g12(mean_se(g.e_path[0]).mean) << ','
         << fmt_g12(mean_se(g.e_path[1]).mean) << ','
         << fmt_g12(mean_se(g.e_path[2]).mean) << ','
         << fmt_g12(mean_se(g.e_path[3]).mean) << ','
         << fmt_g12(mean_se(g.e_state[2]).mean) << ','
         << fmt_g12(mean_se(g.e_state[3]).mean) << ','
         << fmt_g12(mean_se(g.endpoint[2]).mean) << ','
         << fmt_g12(mean_se(g.endpoint[3]).mean) << ','
         << fmt_g12(mean_se(g.c_q).mean) << '\n';
    }
    write_text_file(paths.summary(), os.str());
  }

  // winrates.csv: pooled over the whole budget grid per domain.
  {
    std::ostringstream os;
    os << "domain,endpoint_win,endpoint_win_se,pathwise_win,pathwise_win_se,"
          "median_delta_nepe,n,n_degenerate,n_failed\n";
    for (DomainId domain : cfg.domains) {
      auto it = by_domain.find(domain);
      if (it == by_domain.end()) continue;
      std::vector<double> ada_path, per_path, ada_end, per_end, delta;
      int n_deg = 0, n_fail = 0;
      for (const CellMetrics* m : it->second) {
        if (m->failed) {
          ++n_fail;
          continue;
        }
        ada_path.push_back(m->of(Schedule::Kind::adaptive).e_path);
        per_path.push_back(m->of(Schedule::Kind::periodic).e_path);
        ada_end.push_back(m->of(Schedule::Kind::adaptive).endpoint);
        per_end.push_back(m->of(Schedule::Kind::periodic).endpoint);
        if (m->degenerate) {
          ++n_deg;
        } else {
          double d = improvement(m->of(Schedule::Kind::periodic).nepe,
                                 m->of(Schedule::Kind::adaptive).nepe);
          if (!std::isnan(d)) delta.push_back(d);
        }
      }
      if (ada_path.empty()) {
        log << "winrates: no usable cells for " << domain_name(domain) << '\n';
        continue;
      }
      WinRate wp = win_rate(ada_path, per_path);
      WinRate we = win_rate(ada_end, per_end);
      os << domain_name(domain) << ',' << fmt_g12(we.rate) << ',' << fmt_g12(we.se)
         << ',' << fmt_g12(wp.rate) << ',' << fmt_g12(wp.se) << ','
         << fmt_g12(median(delta)) << ',' << wp.n << ',' << n_deg << ',' << n_fail
         << '\n';
    }
    write_text_file(paths.winrates(), os.str());
  }

  // Frontier SVGs, one per domain.
  for (DomainId domain : cfg.domains) {
    std::vector<PlotSeries> series;
    for (Schedule::Kind k : kAllKinds) {
      PlotSeries s;
      s.label = schedule_name(k);
      s.color = schedule_color(k);
      for (const auto& [key, g] : groups) {
        if (key.first != domain) continue;
        MeanSE ms = mean_se(g.nepe[kindex(k)]);
        if (ms.n == 0) continue;
        s.x.push_back(key.second);
        s.y.push_back(ms.mean);
      }
      series.push_back(std::move(s));
    }
    write_text_file(paths.frontier_svg(domain),
                    render_line_plot(std::string("NEPE frontier: ") + domain_name(domain),
                                     "budget fraction B/T", "mean NEPE", series));
  }
  log << "report: wrote summary, frontier, winrates, budget_usage, "
      << cfg.domains.size() << " frontier plots\n";
}

void run_pdm_scenes(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                    std::ostream& log) {
  if (!std::count(cfg.domains.begin(), cfg.domains.end(), DomainId::pdm_lite))
    throw ConfigError("pdm scenes requested but pdm-lite not in domain list");
  const DomainSpec& spec = cfg.spec(DomainId::pdm_lite);
  const DynamicsParams& params = cfg.params(DomainId::pdm_lite);

  std::vector<std::uint64_t> seeds = cfg.pdm_scene_seeds;
  if (seeds.empty())
    for (int i = 0; i < std::min(3, cfg.eval_count); ++i)
      seeds.push_back(cfg.eval_seed_start + i);

  int b = budget_from_fraction(cfg.summary_budget, params.horizon);
  auto surf_path = paths.surface(DomainId::pdm_lite, b);
  if (!std::filesystem::exists(surf_path))
    throw MissingArtifactError("missing threshold surface: " + surf_path.string());
  ThresholdSurface surf = ThresholdSurface::load(surf_path);

  for (std::uint64_t seed : seeds) {
    PairedCell cell = run_paired_cell(spec, params, cfg.summary_budget, seed, surf);
    if (cell.any_failed()) {
      log << "pdm scene seed " << seed << ": cell failed, skipped\n";
      continue;
    }

    // Scene frame sized to the start-goal span plus margin.
    double x0 = std::min(params.pdm_start_u, params.pdm_goal_u) - 0.4;
    double x1 = std::max(params.pdm_start_u, params.pdm_goal_u) + 0.4;
    double y0 = -1.0, y1 = 1.0;
    double w = 760, h = 560, rug_h = 70;
    auto sx = [&](double x) { return (x - x0) / (x1 - x0) * w; };
    auto sy = [&](double y) { return (h - rug_h) - (y - y0) / (y1 - y0) * (h - rug_h); };
    double scale = w / (x1 - x0);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
       << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    for (const auto& c : spec.obstacles.circles)
      os << "<circle cx=\"" << sx(c.center.x()) << "\" cy=\"" << sy(c.center.y())
         << "\" r=\"" << c.radius * scale
         << "\" fill=\"#e8e8e8\" stroke=\"#666666\"/>\n";

    for (Schedule::Kind k : kAllKinds) {
      const RolloutTrace& tr = cell.arm(k);
      const auto& final_traj = std::get<Trajectory>(tr.states.back());
      os << "<polyline fill=\"none\" stroke=\"" << schedule_color(k)
         << "\" stroke-width=\"1.6\" points=\"";
      for (const auto& p : final_traj.points) os << sx(p.x()) << ',' << sy(p.y()) << ' ';
      os << "\"/>\n";
    }

    // Rug ticks: when each schedule projected, on a shared time axis.
    double rug_top = h - rug_h + 8;
    int row = 0;
    for (Schedule::Kind k : kAllKinds) {
      const RolloutTrace& tr = cell.arm(k);
      double y = rug_top + 14.0 * row;
      os << "<text x=\"4\" y=\"" << y + 4 << "\" font-size=\"10\" fill=\""
         << schedule_color(k) << "\">" << schedule_name(k) << "</text>\n";
      for (int t : tr.events) {
        double x = 70 + static_cast<double>(t) / tr.horizon * (w - 90);
        os << "<line x1=\"" << x << "\" y1=\"" << y - 4 << "\" x2=\"" << x
           << "\" y2=\"" << y + 4 << "\" stroke=\"" << schedule_color(k)
           << "\"/>\n";
      }
      ++row;
    }
    os << "</svg>\n";
    write_text_file(paths.pdm_scene_svg(seed), os.str());

    // Waypoint CSV for the same cell, all four arms.
    std::ostringstream csv;
    csv << "schedule,waypoint,u,v\n";
    for (Schedule::Kind k : kAllKinds) {
      const auto& traj = std::get<Trajectory>(cell.arm(k).states.back());
      for (size_t i = 0; i < traj.points.size(); ++i)
        csv << schedule_name(k) << ',' << i << ',' << fmt_g12(traj.points[i].x())
            << ',' << fmt_g12(traj.points[i].y()) << '\n';
    }
    write_text_file(paths.out / ("pdm_traj_" + std::to_string(seed) + ".csv"),
                    csv.str());

    const CellMetrics m = compute_cell_metrics(cell, spec, cfg.q_mass, cfg.degeneracy_eps);
    log << "pdm scene seed " << seed << ": nepe periodic "
        << fmt_g12(m.of(Schedule::Kind::periodic).nepe) << ", adaptive "
        << fmt_g12(m.of(Schedule::Kind::adaptive).nepe) << '\n';
  }
}

void write_manifest(const ExperimentConfig& cfg, const ExperimentPaths& paths,
                    std::string_view stage) {
  std::ostringstream os;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(cfg.content_hash()));
  os << kToolVersion << '\n';
  os << "stage " << stage << '\n';
  os << "config_hash " << hash << '\n';
  os << "domains " << cfg.domains.size() << '\n';
  os << "budget_grid_points " << cfg.budget_grid.size() << '\n';
  os << "calib_seeds [" << cfg.calib_seed_start << ", "
     << cfg.calib_seed_start + cfg.calib_count << ")\n";
  os << "eval_seeds [" << cfg.eval_seed_start << ", "
     << cfg.eval_seed_start + cfg.eval_count << ")\n";
  os << "cells_per_domain " << cfg.budget_grid.size() * cfg.eval_count << '\n';
  os << "outputs cells.jsonl summary.csv frontier.csv winrates.csv "
        "budget_usage.csv frontier_<domain>.svg\n";
  os << "config_begin\n" << cfg.canonical_text() << "config_end\n";
  write_text_file(paths.manifest(), os.str());
}

bool run_selftest(std::ostream& log) {
  bool ok = true;
  auto check = [&](bool cond, const char* what) {
    log << (cond ? "  ok: " : "  FAIL: ") << what << '\n';
    ok = ok && cond;
  };

  // Quantile hand example.
  {
    auto surf = calibrate_thresholds({{1, 2, 3, 4}}, 4, 1);
    check(surf.at(0, 1) == 3.0 && surf.at(2, 1) == 3.0 &&
              std::isinf(surf.at(3, 1)) && surf.at(3, 1) < 0 &&
              std::isinf(surf.at(0, 0)) && surf.at(0, 0) > 0,
          "threshold hand example");
  }
  // Polar projection basics.
  {
    Mat3 two = 2.0 * Mat3::Identity();
    check(project_so3(two).isApprox(Mat3::Identity(), 1e-12), "project_so3(2I) = I");
    check(std::abs(defect_so3(two) - (3.0 * std::sqrt(3.0) + 7.0)) < 1e-9,
          "defect_so3(2I) = 3*sqrt(3) + 7");
  }
  // Paired noise and budget compliance on a small so3 cell.
  {
    DomainSpec spec = default_domain_spec(DomainId::so3);
    DynamicsParams params = default_dynamics(DomainId::so3);
    params.horizon = 40;
    auto traces = std::vector<std::vector<double>>{};
    for (int i = 0; i < 4; ++i)
      traces.push_back(terminal_defect_trace(spec, params, 10 + i));
    auto surf = calibrate_thresholds(traces, params.horizon, 10);
    PairedCell cell = run_paired_cell(spec, params, 0.25, 99, surf);
    check(!cell.any_failed(), "smoke cell runs");
    check(static_cast<int>(cell.adaptive.events.size()) <= 10,
          "adaptive budget compliance");
    check(cell.periodic.events.size() == 10, "periodic spends exactly B");
    CellMetrics m = compute_cell_metrics(cell, spec, 0.2, 1e-8);
    check(!m.degenerate && std::abs(m.of(Schedule::Kind::stepwise).nepe) < 1e-12 &&
              std::abs(m.of(Schedule::Kind::terminal).nepe - 1.0) < 1e-12,
          "NEPE endpoints");
  }
  // pdm gradient sanity: straight line is a fixed point without noise.
  {
    Trajectory line = straight_line_points(Vec2(-1, 0), Vec2(1, 0), 8);
    auto grad = energy_gradient(line);
    double gmax = 0.0;
    for (const auto& g : grad) gmax = std::max(gmax, g.norm());
    check(gmax < 1e-12, "straight line is an energy stationary point");
  }
  log << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok;
}

}  // namespace corsched
