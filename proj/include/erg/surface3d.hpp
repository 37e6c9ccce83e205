#pragma once

#include <optional>
#include <string>
#include <vector>

#include "erg/footprint.hpp"
#include "erg/workspace.hpp"

namespace erg {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double default_hit_radius = 0.0;  // 2x median nearest-neighbor spacing
};

// ASCII XYZ ("x y z" per line, '#' comments) or ASCII PLY with vertex
// x,y,z properties. Points are validated against the workspace.
PointCloud load_cloud(const std::string& path, const Workspace& ws);
PointCloud make_cloud(std::vector<Eigen::Vector3d> points, const Workspace& ws);

struct RayHit {
  Eigen::Vector3d point;
  double range = 0.0;
  int index = -1;
};

// Nearest cloud point along the ray within perpendicular distance
// hit_radius; ties on range break toward the lowest point index.
std::optional<RayHit> ray_hit(const PointCloud& cloud, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction, double hit_radius);

// M deterministic unit directions within half-angle arctan(k_h) of the axis.
// axis need not be normalized; it must be nonzero.
std::vector<Eigen::Vector3d> cone_rays(const Eigen::Vector3d& axis, double k_h, int m_count);

Eigen::Vector3d resolve_axis(FootprintModel::AxisPolicy policy,
                             const Eigen::Vector3d& position, const PointCloud& cloud);

// Frozen ray data for one robot: per step, per ray, whether it hit, the
// frozen range rho, and the snapped cloud point. Refreshed between
// optimizer outer iterations.
struct FrozenRays {
  struct Step {
    std::vector<char> hit;               // per ray
    std::vector<double> range;           // per ray, valid when hit
    std::vector<Eigen::Vector3d> point;  // snapped cloud points, valid when hit
    int hit_count = 0;
  };
  std::vector<Step> steps;
};

FrozenRays cast_rays(const PointCloud& cloud, const FootprintModel& cone,
                     const std::vector<Eigen::VectorXd>& states, int num_steps,
                     const StateProjection& proj, double hit_radius);

// Smooth surrogate samples r_m(x) = p(x) + rho_m d_m(x) with rho_m frozen.
// Jacobians are taken of the surrogate (central differences through the
// axis/direction construction).
SampleSet surface_samples(const PointCloud& cloud, const FootprintModel& cone,
                          const FrozenRays& frozen,
                          const std::vector<Eigen::VectorXd>& states, int num_steps,
                          const StateProjection& proj, const Workspace& ws);

}  // namespace erg
