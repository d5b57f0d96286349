#include "corsched/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "corsched/errors.hpp"

namespace corsched {

namespace {

std::string fmt(const char* spec, double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

nlohmann::json states_to_json(const std::vector<State>& states) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : states) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          std::vector<double> flat;
          if constexpr (std::is_same_v<T, Mat3>) {
            flat.assign(9, 0.0);
            for (int r = 0; r < 3; ++r)
              for (int c = 0; c < 3; ++c) flat[static_cast<size_t>(3 * r + c)] = v(r, c);
          } else if constexpr (std::is_same_v<T, Pose>) {
            for (int r = 0; r < 3; ++r)
              for (int c = 0; c < 3; ++c) flat.push_back(v.rot(r, c));
            for (int i = 0; i < 3; ++i) flat.push_back(v.trans(i));
          } else if constexpr (std::is_same_v<T, TerrainPoint>) {
            flat = {v.u, v.v, v.z};
          } else {
            for (const auto& p : v.points) {
              flat.push_back(p.x());
              flat.push_back(p.y());
            }
          }
          arr.push_back(flat);
        },
        s);
  }
  return arr;
}

std::vector<State> states_from_json(const nlohmann::json& arr, DomainId domain) {
  std::vector<State> states;
  states.reserve(arr.size());
  for (const auto& item : arr) {
    std::vector<double> flat = item.get<std::vector<double>>();
    switch (domain) {
      case DomainId::so3:
      case DomainId::so3_impulse: {
        Mat3 m;
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) m(r, c) = flat[static_cast<size_t>(3 * r + c)];
        states.emplace_back(m);
        break;
      }
      case DomainId::se3:
      case DomainId::se3_lever: {
        Pose p;
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) p.rot(r, c) = flat[static_cast<size_t>(3 * r + c)];
        for (int i = 0; i < 3; ++i) p.trans(i) = flat[static_cast<size_t>(9 + i)];
        states.emplace_back(p);
        break;
      }
      case DomainId::terrain:
      case DomainId::terrain_ridge:
        states.emplace_back(TerrainPoint{flat[0], flat[1], flat[2]});
        break;
      case DomainId::pdm_lite: {
        Trajectory tr;
        for (size_t i = 0; i + 1 < flat.size(); i += 2)
          tr.points.emplace_back(flat[i], flat[i + 1]);
        states.emplace_back(std::move(tr));
        break;
      }
    }
  }
  return states;
}

double json_num(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

nlohmann::json num_json(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

std::string fmt_g12(double v) { return fmt("%.12g", v); }
std::string fmt_g17(double v) { return fmt("%.17g", v); }

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

nlohmann::json trace_to_json(const RolloutTrace& trace) {
  nlohmann::json j;
  j["domain"] = domain_name(trace.domain);
  j["seed"] = trace.seed;
  j["schedule"] = schedule_name(trace.schedule);
  j["horizon"] = trace.horizon;
  j["proposal_defects"] = trace.proposal_defects;
  j["post_defects"] = trace.post_defects;
  j["events"] = trace.events;
  j["projection_calls"] = trace.projection_calls;
  j["final_projection"] = trace.final_projection;
  j["achieved_budget"] = trace.achieved_budget();
  j["failed"] = trace.failed;
  j["failed_step"] = trace.failed_step;
  if (!trace.states.empty()) j["states"] = states_to_json(trace.states);
  return j;
}

RolloutTrace trace_from_json(const nlohmann::json& j) {
  RolloutTrace trace;
  trace.domain = domain_from_name(j.at("domain").get<std::string>());
  trace.seed = j.at("seed").get<std::uint64_t>();
  std::string sched = j.at("schedule").get<std::string>();
  for (Schedule::Kind k :
       {Schedule::Kind::terminal, Schedule::Kind::stepwise, Schedule::Kind::periodic,
        Schedule::Kind::adaptive}) {
    if (sched == schedule_name(k)) trace.schedule = k;
  }
  trace.horizon = j.at("horizon").get<int>();
  trace.proposal_defects = j.at("proposal_defects").get<std::vector<double>>();
  trace.post_defects = j.at("post_defects").get<std::vector<double>>();
  trace.events = j.at("events").get<std::vector<int>>();
  trace.projection_calls = j.at("projection_calls").get<int>();
  trace.final_projection = j.at("final_projection").get<bool>();
  trace.failed = j.at("failed").get<bool>();
  trace.failed_step = j.at("failed_step").get<int>();
  if (j.contains("states")) trace.states = states_from_json(j["states"], trace.domain);
  return trace;
}

nlohmann::json cell_metrics_to_json(const CellMetrics& m) {
  nlohmann::json j;
  j["domain"] = domain_name(m.domain);
  j["seed"] = m.seed;
  j["budget_fraction"] = m.budget_fraction;
  j["target_budget"] = m.target_budget;
  j["horizon"] = m.horizon;
  j["failed"] = m.failed;
  if (m.failed) return j;
  j["degenerate"] = m.degenerate;
  j["denom"] = m.denom;
  j["c_q"] = num_json(m.c_q);
  j["q"] = m.q;
  for (Schedule::Kind k : kAllKinds) {
    const ScheduleMetrics& sm = m.of(k);
    nlohmann::json s;
    s["e_path"] = sm.e_path;
    s["e_state"] = sm.e_state;
    s["endpoint"] = sm.endpoint;
    s["nepe"] = num_json(sm.nepe);
    s["achieved_budget"] = sm.achieved_budget;
    s["events"] = sm.events;
    s["projection_calls"] = sm.projection_calls;
    s["final_projection"] = sm.final_projection;
    j[schedule_name(k)] = s;
  }
  return j;
}

CellMetrics cell_metrics_from_json(const nlohmann::json& j) {
  CellMetrics m;
  m.domain = domain_from_name(j.at("domain").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.budget_fraction = j.at("budget_fraction").get<double>();
  m.target_budget = j.at("target_budget").get<int>();
  m.horizon = j.at("horizon").get<int>();
  m.failed = j.at("failed").get<bool>();
  if (m.failed) return m;
  m.degenerate = j.at("degenerate").get<bool>();
  m.denom = j.at("denom").get<double>();
  m.c_q = json_num(j.at("c_q"));
  m.q = j.at("q").get<double>();
  for (Schedule::Kind k : kAllKinds) {
    const nlohmann::json& s = j.at(schedule_name(k));
    ScheduleMetrics& sm = m.of(k);
    sm.e_path = s.at("e_path").get<double>();
    sm.e_state = s.at("e_state").get<double>();
    sm.endpoint = s.at("endpoint").get<double>();
    sm.nepe = json_num(s.at("nepe"));
    sm.achieved_budget = s.at("achieved_budget").get<double>();
    sm.events = s.at("events").get<int>();
    sm.projection_calls = s.at("projection_calls").get<int>();
    sm.final_projection = s.at("final_projection").get<bool>();
  }
  return m;
}

void write_cells_jsonl(const std::filesystem::path& path,
                       const std::vector<CellMetrics>& cells) {
  std::ostringstream os;
  for (const auto& c : cells) os << cell_metrics_to_json(c).dump() << '\n';
  write_text_file(path, os.str());
}

std::vector<CellMetrics> read_cells_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cell records not found: " + path.string());
  std::vector<CellMetrics> cells;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    cells.push_back(cell_metrics_from_json(nlohmann::json::parse(line)));
  }
  return cells;
}

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<PlotSeries>& series) {
  const double w = 720, h = 480;
  const double ml = 70, mr = 150, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto sy = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr
     << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
     << h - mb << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double fx = xmin + (xmax - xmin) * i / 5.0;
    double fy = ymin + (ymax - ymin) * i / 5.0;
    os << "<text x=\"" << sx(fx) << "\" y=\"" << h - mb + 18
       << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt("%.3g", fx)
       << "</text>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt("%.3g", fy) << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << sy(fy) << "\" x2=\"" << w - mr
       << "\" y2=\"" << sy(fy) << "\" stroke=\"#dddddd\"/>\n";
  }
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << (mt + h - mb) / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << (mt + h - mb) / 2 << ")\">" << y_label << "</text>\n";

  double ly = mt + 10;
  for (const auto& s : series) {
    std::ostringstream pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
      pts << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    }
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
      os << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i])
         << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }
    os << "<rect x=\"" << w - mr + 12 << "\" y=\"" << ly - 8
       << "\" width=\"14\" height=\"3\" fill=\"" << s.color << "\"/>\n";
    os << "<text x=\"" << w - mr + 32 << "\" y=\"" << ly - 2
       << "\" font-size=\"12\">" << s.label << "</text>\n";
    ly += 20;
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericalError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw NumericalError("short write: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("file not found: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace corsched
