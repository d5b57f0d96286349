#include "corsched/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "corsched/errors.hpp"
#include "corsched/io.hpp"

namespace corsched {

namespace {

const std::vector<DomainId> kDefaultDomains = {
    DomainId::so3,        DomainId::se3,       DomainId::terrain,
    DomainId::so3_impulse, DomainId::se3_lever, DomainId::terrain_ridge,
    DomainId::pdm_lite};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError("bad numeric value for '" + key + "': " + v);
  }
}

long long parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError("bad integer value for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad boolean value for '" + key + "': " + v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, sep)) parts.push_back(trim(item));
  return parts;
}

// One mutable-field binding per key; both the parser and canonical_text walk
// the same table so a key can never be settable but unhashed.
struct GlobalKeys {
  ExperimentConfig* c;
  void apply(const std::string& key, const std::string& value) {
    if (key == "domains") {
      c->domains.clear();
      for (const auto& name : split(value, ',')) c->domains.push_back(domain_from_name(name));
    } else if (key == "budget_grid") {
      c->budget_grid = parse_budget_grid(value);
    } else if (key == "calib_seed_start") {
      c->calib_seed_start = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "calib_count") {
      c->calib_count = static_cast<int>(parse_int(value, key));
    } else if (key == "eval_seed_start") {
      c->eval_seed_start = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "eval_count") {
      c->eval_count = static_cast<int>(parse_int(value, key));
    } else if (key == "q_mass") {
      c->q_mass = parse_real(value, key);
    } else if (key == "degeneracy_eps") {
      c->degeneracy_eps = parse_real(value, key);
    } else if (key == "summary_budget") {
      c->summary_budget = parse_real(value, key);
    } else if (key == "write_traces") {
      c->write_traces = parse_bool(value, key);
    } else if (key == "compact_traces") {
      c->compact_traces = parse_bool(value, key);
    } else if (key == "jobs") {
      c->jobs = static_cast<int>(parse_int(value, key));
    } else if (key == "out_dir") {
      c->out_dir = value;
    } else if (key == "pdm_scene_seeds") {
      c->pdm_scene_seeds.clear();
      for (const auto& s : split(value, ','))
        c->pdm_scene_seeds.push_back(static_cast<std::uint64_t>(parse_int(s, key)));
    } else {
      throw ConfigError("unknown global key '" + key + "'");
    }
  }
};

void apply_domain_key(DomainSpec& spec, DynamicsParams& p, const std::string& key,
                      const std::string& value) {
  auto real = [&] { return parse_real(value, key); };
  auto integer = [&] { return static_cast<int>(parse_int(value, key)); };
  if (key == "horizon") p.horizon = integer();
  else if (key == "step_size") p.step_size = real();
  else if (key == "rot_rate") p.rot_rate = real();
  else if (key == "drift_scale") p.drift_scale = real();
  else if (key == "drift_floor") p.drift_floor = real();
  else if (key == "drift_cycles") p.drift_cycles = real();
  else if (key == "drift_phase") p.drift_phase = real();
  else if (key == "drift_burst") p.drift_burst = real();
  else if (key == "restore_rate") p.restore_rate = real();
  else if (key == "noise_scale") p.noise_scale = real();
  else if (key == "impulse_start_frac") p.impulse_start_frac = real();
  else if (key == "impulse_width_frac") p.impulse_width_frac = real();
  else if (key == "impulse_mag") p.impulse_mag = real();
  else if (key == "trans_vel") p.trans_vel = real();
  else if (key == "trans_noise") p.trans_noise = real();
  else if (key == "lever_gain") p.lever_gain = real();
  else if (key == "slew_base") p.slew_base = real();
  else if (key == "slew_mag") p.slew_mag = real();
  else if (key == "slew_center_frac") p.slew_center_frac = real();
  else if (key == "slew_width_frac") p.slew_width_frac = real();
  else if (key == "planar_speed") p.planar_speed = real();
  else if (key == "steer_amp") p.steer_amp = real();
  else if (key == "steer_cycles") p.steer_cycles = real();
  else if (key == "planar_noise") p.planar_noise = real();
  else if (key == "height_noise") p.height_noise = real();
  else if (key == "start_u") p.start_u = real();
  else if (key == "start_v") p.start_v = real();
  else if (key == "pdm_levels") p.pdm_levels = integer();
  else if (key == "pdm_inner") p.pdm_inner = integer();
  else if (key == "pdm_waypoints") p.pdm_waypoints = integer();
  else if (key == "pdm_sigma_max") p.pdm_sigma_max = real();
  else if (key == "pdm_sigma_min") p.pdm_sigma_min = real();
  else if (key == "pdm_step") p.pdm_step = real();
  else if (key == "pdm_start_u") p.pdm_start_u = real();
  else if (key == "pdm_start_v") p.pdm_start_v = real();
  else if (key == "pdm_goal_u") p.pdm_goal_u = real();
  else if (key == "pdm_goal_v") p.pdm_goal_v = real();
  else if (key == "alpha") spec.alpha = real();
  else if (key == "base_amp") spec.field.base_amp = real();
  else if (key == "base_freq") spec.field.base_freq = real();
  else if (key == "ridge_amp") spec.field.ridge_amp = real();
  else if (key == "ridge_sharpness") spec.field.ridge_sharpness = real();
  else if (key == "ridge_center_amp") spec.field.ridge_center_amp = real();
  else if (key == "ridge_center_freq") spec.field.ridge_center_freq = real();
  else if (key == "lever_length") spec.lever_length = real();
  else if (key == "lever_anchor") {
    auto parts = split(value, ',');
    if (parts.size() != 3) throw ConfigError("lever_anchor needs 3 components");
    for (int i = 0; i < 3; ++i) spec.lever_anchor(i) = parse_real(parts[static_cast<size_t>(i)], key);
  } else if (key == "obstacles") {
    // x,y,r groups separated by ';'
    spec.obstacles.circles.clear();
    for (const auto& group : split(value, ';')) {
      auto parts = split(group, ',');
      if (parts.size() != 3) throw ConfigError("obstacle entry needs x,y,r");
      Circle c;
      c.center = Vec2(parse_real(parts[0], key), parse_real(parts[1], key));
      c.radius = parse_real(parts[2], key);
      spec.obstacles.circles.push_back(c);
    }
  } else if (key == "obstacle_margin_frac") {
    spec.obstacles.margin_frac = real();
  } else {
    throw ConfigError("unknown domain key '" + key + "'");
  }
}

}  // namespace

std::vector<double> parse_budget_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("budget_grid range needs min:max:step");
    double lo = parse_real(parts[0], "budget_grid");
    double hi = parse_real(parts[1], "budget_grid");
    double step = parse_real(parts[2], "budget_grid");
    if (step <= 0.0 || hi < lo) throw ConfigError("bad budget_grid range");
    for (int i = 0;; ++i) {
      double v = lo + i * step;
      if (v > hi + 1e-12) break;
      grid.push_back(std::min(v, hi));
    }
  } else {
    for (const auto& s : split(text, ',')) grid.push_back(parse_real(s, "budget_grid"));
  }
  return grid;
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.domains = kDefaultDomains;
  c.budget_grid = parse_budget_grid("0.0:1.0:0.05");
  for (DomainId id : kDefaultDomains) {
    c.specs[id] = default_domain_spec(id);
    c.dynamics[id] = default_dynamics(id);
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());

  ExperimentConfig c = defaults();
  GlobalKeys globals{&c};
  DomainId section{};
  bool in_domain_section = false;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      if (t.front() == '[' && t.back() == ']') {
        std::string name = trim(t.substr(1, t.size() - 2));
        if (name == "global") {
          in_domain_section = false;
        } else {
          section = domain_from_name(name);
          in_domain_section = true;
          if (!c.specs.count(section)) {
            c.specs[section] = default_domain_spec(section);
            c.dynamics[section] = default_dynamics(section);
          }
        }
        continue;
      }
      size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected key = value");
      std::string key = trim(t.substr(0, eq));
      std::string value = trim(t.substr(eq + 1));
      if (in_domain_section) {
        apply_domain_key(c.specs[section], c.dynamics[section], key, value);
      } else {
        globals.apply(key, value);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

const DomainSpec& ExperimentConfig::spec(DomainId id) const {
  auto it = specs.find(id);
  if (it == specs.end()) throw ConfigError(std::string("no spec for domain ") + domain_name(id));
  return it->second;
}

const DynamicsParams& ExperimentConfig::params(DomainId id) const {
  auto it = dynamics.find(id);
  if (it == dynamics.end()) throw ConfigError(std::string("no dynamics for domain ") + domain_name(id));
  return it->second;
}

void ExperimentConfig::validate() const {
  if (domains.empty()) throw ConfigError("no domains configured");
  if (budget_grid.empty()) throw ConfigError("empty budget grid");
  for (double f : budget_grid)
    if (f < 0.0 || f > 1.0) throw ConfigError("budget fraction outside [0, 1]");
  if (calib_count < 1 || eval_count < 1)
    throw ConfigError("calibration and evaluation counts must be positive");
  if (q_mass <= 0.0 || q_mass > 1.0) throw ConfigError("q_mass outside (0, 1]");
  if (degeneracy_eps <= 0.0) throw ConfigError("degeneracy_eps must be positive");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");

  // Calibration and evaluation seeds must not overlap anywhere.
  std::uint64_t c0 = calib_seed_start, c1 = calib_seed_start + calib_count;
  std::uint64_t e0 = eval_seed_start, e1 = eval_seed_start + eval_count;
  if (c0 < e1 && e0 < c1)
    throw ConfigError("calibration seeds [" + std::to_string(c0) + ", " +
                      std::to_string(c1) + ") overlap evaluation seeds [" +
                      std::to_string(e0) + ", " + std::to_string(e1) + ")");

  for (DomainId id : domains) {
    const DomainSpec& s = spec(id);
    const DynamicsParams& p = params(id);
    p.validate(id);
    if (s.alpha <= 0.0) throw ConfigError("alpha must be positive");
    for (const auto& circ : s.obstacles.circles)
      if (circ.radius <= 0.0) throw ConfigError("obstacle radius must be positive");
    if (id == DomainId::pdm_lite) {
      Vec2 start(p.pdm_start_u, p.pdm_start_v), goal(p.pdm_goal_u, p.pdm_goal_v);
      for (const auto& circ : s.obstacles.circles) {
        if ((start - circ.center).norm() <= circ.radius ||
            (goal - circ.center).norm() <= circ.radius)
          throw ConfigError("pdm start/goal inside an obstacle");
      }
    }
  }
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os << "domains";
  for (DomainId d : domains) os << ' ' << domain_name(d);
  os << '\n';
  os << "budget_grid";
  for (double f : budget_grid) os << ' ' << fmt_g17(f);
  os << '\n';
  os << "calib " << calib_seed_start << ' ' << calib_count << '\n';
  os << "eval " << eval_seed_start << ' ' << eval_count << '\n';
  os << "q_mass " << fmt_g17(q_mass) << '\n';
  os << "degeneracy_eps " << fmt_g17(degeneracy_eps) << '\n';
  os << "summary_budget " << fmt_g17(summary_budget) << '\n';
  for (DomainId d : domains) {
    const DomainSpec& s = spec(d);
    const DynamicsParams& p = params(d);
    os << '[' << domain_name(d) << "]\n";
    os << "alpha " << fmt_g17(s.alpha) << '\n';
    os << "field " << fmt_g17(s.field.base_amp) << ' ' << fmt_g17(s.field.base_freq)
       << ' ' << fmt_g17(s.field.ridge_amp) << ' ' << fmt_g17(s.field.ridge_sharpness)
       << ' ' << fmt_g17(s.field.ridge_center_amp) << ' '
       << fmt_g17(s.field.ridge_center_freq) << '\n';
    os << "lever " << fmt_g17(s.lever_length) << ' ' << fmt_g17(s.lever_anchor(0))
       << ' ' << fmt_g17(s.lever_anchor(1)) << ' ' << fmt_g17(s.lever_anchor(2)) << '\n';
    os << "obstacles";
    for (const auto& circ : s.obstacles.circles)
      os << ' ' << fmt_g17(circ.center.x()) << ',' << fmt_g17(circ.center.y()) << ','
         << fmt_g17(circ.radius);
    os << " margin " << fmt_g17(s.obstacles.margin_frac) << '\n';
    os << "dyn " << p.horizon << ' ' << fmt_g17(p.step_size) << ' '
       << fmt_g17(p.rot_rate) << ' ' << fmt_g17(p.drift_scale) << ' '
       << fmt_g17(p.drift_floor) << ' ' << fmt_g17(p.drift_cycles) << ' '
       << fmt_g17(p.drift_phase) << ' ' << fmt_g17(p.drift_burst) << ' '
       << fmt_g17(p.restore_rate) << ' '
       << fmt_g17(p.noise_scale) << ' ' << fmt_g17(p.impulse_start_frac) << ' '
       << fmt_g17(p.impulse_width_frac) << ' ' << fmt_g17(p.impulse_mag) << ' '
       << fmt_g17(p.trans_vel) << ' ' << fmt_g17(p.trans_noise) << ' '
       << fmt_g17(p.lever_gain) << ' ' << fmt_g17(p.slew_base) << ' '
       << fmt_g17(p.slew_mag) << ' ' << fmt_g17(p.slew_center_frac) << ' '
       << fmt_g17(p.slew_width_frac) << ' ' << fmt_g17(p.planar_speed) << ' '
       << fmt_g17(p.steer_amp) << ' ' << fmt_g17(p.steer_cycles) << ' '
       << fmt_g17(p.planar_noise) << ' ' << fmt_g17(p.height_noise) << ' '
       << fmt_g17(p.start_u) << ' ' << fmt_g17(p.start_v) << '\n';
    os << "pdm " << p.pdm_levels << ' ' << p.pdm_inner << ' ' << p.pdm_waypoints
       << ' ' << fmt_g17(p.pdm_sigma_max) << ' ' << fmt_g17(p.pdm_sigma_min) << ' '
       << fmt_g17(p.pdm_step) << ' ' << fmt_g17(p.pdm_start_u) << ' '
       << fmt_g17(p.pdm_start_v) << ' ' << fmt_g17(p.pdm_goal_u) << ' '
       << fmt_g17(p.pdm_goal_v) << '\n';
  }
  return os.str();
}

std::uint64_t ExperimentConfig::content_hash() const { return fnv1a(canonical_text()); }

}  // namespace corsched
