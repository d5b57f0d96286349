#include "corsched/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "corsched/errors.hpp"

namespace corsched {

namespace {
constexpr double kOnManifoldTol = 1e-6;
}

const char* domain_name(DomainId id) {
  switch (id) {
    case DomainId::so3: return "so3";
    case DomainId::se3: return "se3";
    case DomainId::terrain: return "terrain";
    case DomainId::so3_impulse: return "so3-impulse";
    case DomainId::se3_lever: return "se3-lever";
    case DomainId::terrain_ridge: return "terrain-ridge";
    case DomainId::pdm_lite: return "pdm-lite";
  }
  return "?";
}

DomainId domain_from_name(std::string_view name) {
  for (DomainId id : {DomainId::so3, DomainId::se3, DomainId::terrain,
                      DomainId::so3_impulse, DomainId::se3_lever,
                      DomainId::terrain_ridge, DomainId::pdm_lite}) {
    if (name == domain_name(id)) return id;
  }
  throw ConfigError("unknown domain '" + std::string(name) + "'");
}

double HeightField::center_line(double v) const {
  return ridge_center_amp * std::sin(ridge_center_freq * v);
}

double HeightField::eval(double u, double v) const {
  double z = base_amp * std::sin(base_freq * u) * std::cos(base_freq * v);
  if (ridge_amp != 0.0) {
    double du = u - center_line(v);
    z += ridge_amp * std::exp(-ridge_sharpness * du * du);
  }
  return z;
}

void HeightField::gradient(double u, double v, double& fu, double& fv) const {
  fu = base_amp * base_freq * std::cos(base_freq * u) * std::cos(base_freq * v);
  fv = -base_amp * base_freq * std::sin(base_freq * u) * std::sin(base_freq * v);
  if (ridge_amp != 0.0) {
    double du = u - center_line(v);
    double g = ridge_amp * std::exp(-ridge_sharpness * du * du);
    double dgddu = -2.0 * ridge_sharpness * du * g;
    double dcdv = ridge_center_amp * ridge_center_freq * std::cos(ridge_center_freq * v);
    fu += dgddu;
    fv += dgddu * (-dcdv);
  }
}

DomainSpec default_domain_spec(DomainId id) {
  DomainSpec spec;
  spec.id = id;
  switch (id) {
    case DomainId::se3:
    case DomainId::se3_lever:
      // Translation weight keeps lever lag visible over the rotational
      // defect floor.
      spec.alpha = 3.0;
      break;
    case DomainId::terrain_ridge:
      spec.field.ridge_amp = 2.5;
      spec.field.ridge_sharpness = 40.0;
      break;
    case DomainId::pdm_lite:
      spec.obstacles.circles = {{{-0.55, 0.0}, 0.22},
                                {{0.0, 0.0}, 0.22},
                                {{0.55, 0.0}, 0.22}};
      break;
    default:
      break;
  }
  return spec;
}

Mat3 project_so3(const Mat3& a) {
  if (!a.allFinite()) throw DegenerateStateError("project_so3: non-finite input");
  Eigen::JacobiSVD<Mat3> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) <= 1e-12)
    throw DegenerateStateError("project_so3: singular input");
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    // Reflection case: flip the direction paired with the smallest singular
    // value (JacobiSVD sorts them descending).
    u.col(2) = -u.col(2);
  }
  return u * v.transpose();
}

double defect_so3(const Mat3& a) {
  if (!a.allFinite()) throw DegenerateStateError("defect_so3: non-finite input");
  return (a.transpose() * a - Mat3::Identity()).norm() +
         std::abs(a.determinant() - 1.0);
}

double dist_so3(const Mat3& r1, const Mat3& r2) {
  if (defect_so3(r1) > kOnManifoldTol || defect_so3(r2) > kOnManifoldTol)
    throw std::invalid_argument("dist_so3: input off SO(3) beyond tolerance");
  double c = ((r1.transpose() * r2).trace() - 1.0) * 0.5;
  if (c > 0.9) {
    // acos loses sqrt(eps) accuracy near 1; ||R1 - R2||_F = 2 sqrt(2)
    // sin(theta / 2) for rotations, and asin is exact near 0.
    double s = (r1 - r2).norm() / (2.0 * std::sqrt(2.0));
    return 2.0 * std::asin(std::min(1.0, s));
  }
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c);
}

Vec3 lever_point(const Mat3& rot, const DomainSpec& spec) {
  return spec.lever_anchor + spec.lever_length * rot.col(0);
}

Pose project_se3(const Pose& p, const DomainSpec& spec) {
  Pose out{project_so3(p.rot), p.trans};
  // The lever variant constrains translation to the arm tip; enforce it
  // after the rotational projection so the target itself is feasible.
  if (spec.id == DomainId::se3_lever) out.trans = lever_point(out.rot, spec);
  return out;
}

double defect_se3(const Pose& p, const DomainSpec& spec) {
  double d = defect_so3(p.rot);
  if (spec.id == DomainId::se3_lever)
    d += spec.alpha * (p.trans - lever_point(p.rot, spec)).norm();
  return d;
}

double dist_se3(const Pose& a, const Pose& b, const DomainSpec& spec) {
  return dist_so3(a.rot, b.rot) + spec.alpha * (a.trans - b.trans).norm();
}

TerrainPoint project_terrain(const TerrainPoint& p, const HeightField& f) {
  return {p.u, p.v, f.eval(p.u, p.v)};
}

double defect_terrain(const TerrainPoint& p, const HeightField& f) {
  return std::abs(p.z - f.eval(p.u, p.v));
}

double dist_terrain(const TerrainPoint& a, const TerrainPoint& b) {
  double du = a.u - b.u, dv = a.v - b.v, dz = a.z - b.z;
  return std::sqrt(du * du + dv * dv + dz * dz);
}

namespace {

// Penetration of p into (c, r) using the nominal radius (no margin).
double penetration(const Vec2& p, const Circle& c) {
  return std::max(0.0, c.radius - (p - c.center).norm());
}

Vec2 push_out(const Vec2& p, const Circle& c, double margin_frac) {
  double target = c.radius * (1.0 + margin_frac);
  Vec2 d = p - c.center;
  double n = d.norm();
  if (n >= target) return p;
  // Exactly at the center the outward direction is undefined; break the tie
  // toward +u so projection stays deterministic.
  Vec2 dir = (n < 1e-12) ? Vec2(1.0, 0.0) : Vec2(d / n);
  return c.center + dir * target;
}

}  // namespace

Trajectory project_trajectory(const Trajectory& traj, const ObstacleSet& obs) {
  Trajectory out = traj;
  for (auto& p : out.points) {
    // Push out of the deepest violation first; repeat in case the push lands
    // inside a neighboring circle. Violations are measured against the
    // nominal radius while the push target carries the margin, so a pushed
    // point is strictly clear and a second projection is the identity.
    for (int pass = 0; pass < 8; ++pass) {
      const Circle* worst = nullptr;
      double worst_pen = 0.0;
      for (const auto& c : obs.circles) {
        double pen = penetration(p, c);
        if (pen > worst_pen) {
          worst_pen = pen;
          worst = &c;
        }
      }
      if (!worst) break;
      p = push_out(p, *worst, obs.margin_frac);
    }
  }
  return out;
}

double trajectory_defect(const Trajectory& traj, const ObstacleSet& obs) {
  // Norm of the residual to the margin-free radial push-out, stacked over
  // waypoints. Using the nominal radius keeps a just-projected trajectory at
  // defect exactly zero despite the clearance margin.
  double sq = 0.0;
  for (const auto& p : traj.points) {
    double worst = 0.0;
    for (const auto& c : obs.circles) worst = std::max(worst, penetration(p, c));
    sq += worst * worst;
  }
  return std::sqrt(sq);
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  if (a.points.size() != b.points.size() || a.points.empty())
    throw std::invalid_argument("trajectory_distance: mismatched waypoint counts");
  double total = 0.0;
  for (size_t i = 0; i < a.points.size(); ++i)
    total += (a.points[i] - b.points[i]).norm();
  return total / static_cast<double>(a.points.size());
}

State project_state(const State& x, const DomainSpec& spec) {
  return std::visit(
      [&](const auto& v) -> State {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Mat3>) {
          return project_so3(v);
        } else if constexpr (std::is_same_v<T, Pose>) {
          return project_se3(v, spec);
        } else if constexpr (std::is_same_v<T, TerrainPoint>) {
          return project_terrain(v, spec.field);
        } else {
          return project_trajectory(v, spec.obstacles);
        }
      },
      x);
}

double state_defect(const State& x, const DomainSpec& spec) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Mat3>) {
          return defect_so3(v);
        } else if constexpr (std::is_same_v<T, Pose>) {
          return defect_se3(v, spec);
        } else if constexpr (std::is_same_v<T, TerrainPoint>) {
          return defect_terrain(v, spec.field);
        } else {
          return trajectory_defect(v, spec.obstacles);
        }
      },
      x);
}

double state_distance(const State& a, const State& b, const DomainSpec& spec) {
  if (state_defect(a, spec) > kOnManifoldTol || state_defect(b, spec) > kOnManifoldTol)
    throw std::invalid_argument("state_distance: input off-manifold beyond tolerance");
  return std::visit(
      [&](const auto& va) -> double {
        using T = std::decay_t<decltype(va)>;
        const T& vb = std::get<T>(b);
        if constexpr (std::is_same_v<T, Mat3>) {
          return dist_so3(va, vb);
        } else if constexpr (std::is_same_v<T, Pose>) {
          return dist_se3(va, vb, spec);
        } else if constexpr (std::is_same_v<T, TerrainPoint>) {
          return dist_terrain(va, vb);
        } else {
          return trajectory_distance(va, vb);
        }
      },
      a);
}

Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
  double n = axis.norm();
  if (n < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
}

}  // namespace corsched
