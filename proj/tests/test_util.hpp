#pragma once

// Helpers shared by the unit suites and the acceptance runner. Everything in
// here is deliberately independent of the library's own construction paths
// where it serves as an oracle (rodrigues, grid search).

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "corsched/rollout.hpp"
#include "corsched/schedule.hpp"

namespace testutil {

using corsched::Mat3;
using corsched::Pose;
using corsched::RolloutTrace;
using corsched::State;
using corsched::TerrainPoint;
using corsched::ThresholdSurface;
using corsched::Trajectory;
using corsched::Vec2;
using corsched::Vec3;

inline bool same_mat(const Mat3& a, const Mat3& b) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (a(r, c) != b(r, c)) return false;
  return true;
}

inline bool same_state(const State& a, const State& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<Mat3>(a))
    return same_mat(std::get<Mat3>(a), std::get<Mat3>(b));
  if (std::holds_alternative<Pose>(a)) {
    const Pose& pa = std::get<Pose>(a);
    const Pose& pb = std::get<Pose>(b);
    return same_mat(pa.rot, pb.rot) && pa.trans(0) == pb.trans(0) &&
           pa.trans(1) == pb.trans(1) && pa.trans(2) == pb.trans(2);
  }
  if (std::holds_alternative<TerrainPoint>(a)) {
    const TerrainPoint& ta = std::get<TerrainPoint>(a);
    const TerrainPoint& tb = std::get<TerrainPoint>(b);
    return ta.u == tb.u && ta.v == tb.v && ta.z == tb.z;
  }
  const Trajectory& ja = std::get<Trajectory>(a);
  const Trajectory& jb = std::get<Trajectory>(b);
  if (ja.points.size() != jb.points.size()) return false;
  for (size_t i = 0; i < ja.points.size(); ++i)
    if (ja.points[i].x() != jb.points[i].x() || ja.points[i].y() != jb.points[i].y())
      return false;
  return true;
}

// Numeric-content identity between two traces, ignoring the schedule label.
// "Bit-identical" in the limit-equivalence sense: same states, defects,
// events, and projection accounting.
inline bool traces_identical(const RolloutTrace& a, const RolloutTrace& b) {
  if (a.horizon != b.horizon || a.seed != b.seed || a.failed != b.failed ||
      a.failed_step != b.failed_step || a.final_projection != b.final_projection ||
      a.projection_calls != b.projection_calls || a.events != b.events)
    return false;
  if (a.proposal_defects.size() != b.proposal_defects.size() ||
      a.post_defects.size() != b.post_defects.size() ||
      a.states.size() != b.states.size())
    return false;
  for (size_t i = 0; i < a.proposal_defects.size(); ++i)
    if (a.proposal_defects[i] != b.proposal_defects[i]) return false;
  for (size_t i = 0; i < a.post_defects.size(); ++i)
    if (a.post_defects[i] != b.post_defects[i]) return false;
  for (size_t i = 0; i < a.states.size(); ++i)
    if (!same_state(a.states[i], b.states[i])) return false;
  return true;
}

// Independent Rodrigues construction for the grid oracle; written out by hand
// so it shares no code with the library path.
inline Mat3 rodrigues(double x, double y, double z, double angle) {
  double c = std::cos(angle), s = std::sin(angle), C = 1.0 - c;
  Mat3 r;
  r(0, 0) = c + x * x * C;
  r(0, 1) = x * y * C - z * s;
  r(0, 2) = x * z * C + y * s;
  r(1, 0) = y * x * C + z * s;
  r(1, 1) = c + y * y * C;
  r(1, 2) = y * z * C - x * s;
  r(2, 0) = z * x * C - y * s;
  r(2, 1) = z * y * C + x * s;
  r(2, 2) = c + z * z * C;
  return r;
}

// Brute-force nearest-rotation search: for each input matrix, the maximum of
// <A, R>_F over rotations R(n, theta) on an axis-angle grid of the given
// step. One sweep over the grid serves every matrix. min ||A - R||_F^2 =
// ||A||^2 + 3 - 2 max<A, R>.
inline std::vector<double> grid_best_distance(const std::vector<Mat3>& as, double step) {
  std::vector<double> best_dot(as.size(), -std::numeric_limits<double>::infinity());
  for (double ta = 0.0; ta <= M_PI + 1e-12; ta += step) {
    double st = std::sin(ta), ct = std::cos(ta);
    for (double ph = 0.0; ph < 2.0 * M_PI - 1e-12; ph += step) {
      double x = st * std::cos(ph), y = st * std::sin(ph), z = ct;
      for (double ang = 0.0; ang <= M_PI + 1e-12; ang += step) {
        Mat3 r = rodrigues(x, y, z, ang);
        for (size_t i = 0; i < as.size(); ++i) {
          double dot = 0.0;
          const double* ap = as[i].data();
          const double* rp = r.data();
          for (int k = 0; k < 9; ++k) dot += ap[k] * rp[k];
          if (dot > best_dot[i]) best_dot[i] = dot;
        }
      }
    }
  }
  std::vector<double> out(as.size());
  for (size_t i = 0; i < as.size(); ++i) {
    double sq = as[i].squaredNorm() + 3.0 - 2.0 * best_dot[i];
    out[i] = std::sqrt(std::max(0.0, sq));
  }
  return out;
}

// Covering bound for the grid above. The nearest grid axis is within
// alpha = (step/2) * sqrt(2) radians of any axis; two rotations by the same
// angle about axes alpha apart differ by a geodesic angle of at most
// 2 * alpha (quaternion identity psi = 4 asin(sin(theta/2) sin(alpha/2))),
// and the angle grid contributes step/2 more. Frobenius distance between
// rotations psi apart is 2 sqrt(2) sin(psi/2) <= sqrt(2) psi. A 5% safety
// margin absorbs the half-step edge effects of the inclusive loops.
inline double grid_bound(double step) {
  double alpha = 0.5 * std::sqrt(2.0) * step;
  double psi = 2.0 * alpha + 0.5 * step;
  return 1.05 * std::sqrt(2.0) * psi + 1e-9;
}

inline Mat3 random_matrix(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat3 a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = g(rng);
  return a;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  double n = v.norm();
  return n > 1e-12 ? Vec3(v / n) : Vec3(1, 0, 0);
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, M_PI);
  Vec3 ax = random_unit(rng);
  return rodrigues(ax(0), ax(1), ax(2), u(rng));
}

// Hand-built threshold surface: value everywhere except the mandatory
// lambda[t][0] = +inf column.
inline ThresholdSurface const_surface(int horizon, int budget, double value) {
  ThresholdSurface s;
  s.horizon = horizon;
  s.budget = budget;
  s.values.assign(static_cast<size_t>(horizon) * (budget + 1), value);
  for (int t = 0; t < horizon; ++t)
    s.at(t, 0) = std::numeric_limits<double>::infinity();
  return s;
}

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("corsched_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testutil
