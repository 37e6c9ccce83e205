#include "erg/surface3d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace erg {

namespace {

void finalize_cloud(PointCloud& cloud) {
  const size_t n = cloud.points.size();
  cloud.centroid.setZero();
  for (const auto& p : cloud.points) cloud.centroid += p;
  cloud.centroid /= static_cast<double>(n);

  if (n == 1) {
    cloud.default_hit_radius = 0.05;
    return;
  }
  std::vector<double> nn(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long i = 0; i < static_cast<long>(n); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < n; ++j) {
      if (j == static_cast<size_t>(i)) continue;
      best = std::min(best, (cloud.points[i] - cloud.points[j]).squaredNorm());
    }
    nn[i] = std::sqrt(best);
  }
  std::nth_element(nn.begin(), nn.begin() + n / 2, nn.end());
  cloud.default_hit_radius = 2.0 * nn[n / 2];
}

Eigen::Vector3d parse_xyz(const std::string& line, const std::string& path, int lineno) {
  std::istringstream ss(line);
  Eigen::Vector3d p;
  if (!(ss >> p.x() >> p.y() >> p.z())) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed point line");
  }
  return p;
}

PointCloud load_ply(std::ifstream& in, const std::string& path, const Workspace& ws) {
  std::string line;
  int lineno = 1;
  long vertex_count = -1;
  bool in_header = true;
  std::vector<Eigen::Vector3d> points;
  while (in_header && std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "element") {
      std::string what;
      ss >> what;
      if (what == "vertex") ss >> vertex_count;
    } else if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii") {
        throw std::runtime_error(path + ": only ASCII PLY is supported");
      }
    } else if (tok == "end_header") {
      in_header = false;
    }
  }
  if (in_header || vertex_count < 0) {
    throw std::runtime_error(path + ": malformed PLY header");
  }
  points.reserve(vertex_count);
  for (long i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(path + ": truncated PLY vertex list");
    }
    ++lineno;
    points.push_back(parse_xyz(line, path, lineno));
  }
  return make_cloud(std::move(points), ws);
}

}  // namespace

PointCloud make_cloud(std::vector<Eigen::Vector3d> points, const Workspace& ws) {
  if (ws.dim() != 3) throw std::invalid_argument("make_cloud: workspace must be 3D");
  if (points.empty()) throw std::invalid_argument("make_cloud: empty cloud");
  for (const auto& p : points) {
    if (!ws.contains(p, 1e-12)) {
      throw std::invalid_argument("make_cloud: point outside workspace");
    }
  }
  PointCloud cloud;
  cloud.points = std::move(points);
  finalize_cloud(cloud);
  return cloud;
}

PointCloud load_cloud(const std::string& path, const Workspace& ws) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_cloud: cannot open " + path);
  std::string first;
  if (!std::getline(in, first)) throw std::runtime_error("load_cloud: empty file " + path);
  if (first.rfind("ply", 0) == 0) return load_ply(in, path, ws);

  std::vector<Eigen::Vector3d> points;
  int lineno = 0;
  std::string line = first;
  do {
    ++lineno;
    const size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    points.push_back(parse_xyz(line, path, lineno));
  } while (std::getline(in, line));
  if (points.empty()) throw std::runtime_error("load_cloud: no points in " + path);
  return make_cloud(std::move(points), ws);
}

std::optional<RayHit> ray_hit(const PointCloud& cloud, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction, double hit_radius) {
  if (!(hit_radius > 0.0)) throw std::invalid_argument("ray_hit: hit_radius must be positive");
  const double r2 = hit_radius * hit_radius;
  std::optional<RayHit> best;
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Eigen::Vector3d v = cloud.points[i] - origin;
    const double s = v.dot(direction);
    if (s <= 0.0) continue;
    if (v.squaredNorm() - s * s > r2) continue;
    if (!best || s < best->range) {
      best = RayHit{cloud.points[i], s, static_cast<int>(i)};
    }
  }
  return best;
}

std::vector<Eigen::Vector3d> cone_rays(const Eigen::Vector3d& axis, double k_h, int m_count) {
  const double norm = axis.norm();
  if (!(norm > 1e-12)) throw std::invalid_argument("cone_rays: degenerate axis");
  if (m_count < 1) throw std::invalid_argument("cone_rays: need at least 1 ray");
  const Eigen::Vector3d a = axis / norm;
  const Eigen::Vector3d ref =
      std::abs(a.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d e1 = (ref - ref.dot(a) * a).normalized();
  const Eigen::Vector3d e2 = a.cross(e1);

  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(m_count);
  if (m_count == 1) {
    dirs.push_back(a);
    return dirs;
  }
  const double cos_half = std::cos(std::atan(k_h));
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int m = 0; m < m_count; ++m) {
    const double ca = 1.0 - (1.0 - cos_half) * (m + 0.5) / m_count;
    const double sa = std::sqrt(std::max(0.0, 1.0 - ca * ca));
    const double phi = golden * m;
    dirs.push_back(sa * std::cos(phi) * e1 + sa * std::sin(phi) * e2 + ca * a);
  }
  return dirs;
}

Eigen::Vector3d resolve_axis(FootprintModel::AxisPolicy policy,
                             const Eigen::Vector3d& position, const PointCloud& cloud) {
  if (policy == FootprintModel::AxisPolicy::Down) return -Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d v = cloud.centroid - position;
  if (v.norm() < 1e-9) {
    throw std::runtime_error("resolve_axis: robot position coincides with cloud centroid");
  }
  return v.normalized();
}

FrozenRays cast_rays(const PointCloud& cloud, const FootprintModel& cone,
                     const std::vector<Eigen::VectorXd>& states, int num_steps,
                     const StateProjection& proj, double hit_radius) {
  if (cone.kind != FootprintModel::Kind::Cone) {
    throw std::invalid_argument("cast_rays: footprint must be a cone");
  }
  if (hit_radius <= 0.0) hit_radius = cloud.default_hit_radius;
  FrozenRays out;
  out.steps.resize(num_steps);
  for (int t = 0; t < num_steps; ++t) {
    const Eigen::Vector3d p = proj.position_of(states[t]);
    const Eigen::Vector3d axis = resolve_axis(cone.axis, p, cloud);
    const auto dirs = cone_rays(axis, cone.k_h, cone.target_samples);
    auto& step = out.steps[t];
    step.hit.resize(dirs.size(), 0);
    step.range.resize(dirs.size(), 0.0);
    step.point.resize(dirs.size(), Eigen::Vector3d::Zero());
    for (size_t m = 0; m < dirs.size(); ++m) {
      const auto hit = ray_hit(cloud, p, dirs[m], hit_radius);
      if (hit) {
        step.hit[m] = 1;
        step.range[m] = hit->range;
        step.point[m] = hit->point;
        ++step.hit_count;
      }
    }
  }
  return out;
}

SampleSet surface_samples(const PointCloud& cloud, const FootprintModel& cone,
                          const FrozenRays& frozen,
                          const std::vector<Eigen::VectorXd>& states, int num_steps,
                          const StateProjection& proj, const Workspace& ws) {
  if (static_cast<int>(frozen.steps.size()) != num_steps) {
    throw std::invalid_argument("surface_samples: frozen ray data step mismatch");
  }
  const int n = static_cast<int>(states[0].size());
  const Eigen::MatrixXd pos_jac = proj.position_jacobian(n);
  const int m_count = cone.target_samples;
  const double fd_step = 1e-7;

  SampleSet out;
  out.steps.resize(num_steps);
  bool clamp_flags[3];
  for (int t = 0; t < num_steps; ++t) {
    const auto& fs = frozen.steps[t];
    if (fs.hit_count == 0) continue;
    const Eigen::Vector3d p = proj.position_of(states[t]);
    const auto dirs = cone_rays(resolve_axis(cone.axis, p, cloud), cone.k_h, m_count);

    // d(d_m)/dp via central differences; zero when the axis is fixed
    std::vector<Eigen::Matrix3d> dir_jac(m_count, Eigen::Matrix3d::Zero());
    if (cone.axis == FootprintModel::AxisPolicy::Centroid) {
      for (int o = 0; o < 3; ++o) {
        Eigen::Vector3d pp = p, pm = p;
        pp[o] += fd_step;
        pm[o] -= fd_step;
        const auto dp = cone_rays(resolve_axis(cone.axis, pp, cloud), cone.k_h, m_count);
        const auto dm = cone_rays(resolve_axis(cone.axis, pm, cloud), cone.k_h, m_count);
        for (int m = 0; m < m_count; ++m) {
          dir_jac[m].col(o) = (dp[m] - dm[m]) / (2.0 * fd_step);
        }
      }
    }

    const double weight = 1.0 / fs.hit_count;
    auto& step = out.steps[t];
    step.reserve(fs.hit_count);
    for (int m = 0; m < m_count; ++m) {
      if (!fs.hit[m]) continue;
      SampleSet::Sample s;
      s.w = ws.clamp(p + fs.range[m] * dirs[m], clamp_flags);
      s.weight = weight;
      s.jac = (Eigen::Matrix3d::Identity() + fs.range[m] * dir_jac[m]) * pos_jac;
      for (int o = 0; o < 3; ++o) {
        if (clamp_flags[o]) {
          s.jac.row(o).setZero();
          s.clamped = true;
        }
      }
      step.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace erg
