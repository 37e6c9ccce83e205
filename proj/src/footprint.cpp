#include "erg/footprint.hpp"

#include <cmath>

namespace erg {

namespace {

constexpr double kDefaultSpacingRatio = 1.0 / 2.9;  // yields the 5x5 grid, M = 25

// Integer grid points (i,j) with ||(i,j)*ratio|| <= 1, row-major order.
Eigen::MatrixXd disk_grid(double ratio) {
  const int r = static_cast<int>(std::floor(1.0 / ratio));
  std::vector<std::pair<int, int>> pts;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      if ((static_cast<double>(i) * i + static_cast<double>(j) * j) * ratio * ratio <= 1.0) {
        pts.emplace_back(i, j);
      }
    }
  }
  Eigen::MatrixXd out(pts.size(), 2);
  for (size_t m = 0; m < pts.size(); ++m) {
    out(static_cast<int>(m), 0) = pts[m].first * ratio;
    out(static_cast<int>(m), 1) = pts[m].second * ratio;
  }
  return out;
}

long disk_grid_count(double ratio) {
  const int r = static_cast<int>(std::floor(1.0 / ratio));
  long n = 0;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      if ((static_cast<double>(i) * i + static_cast<double>(j) * j) * ratio * ratio <= 1.0) ++n;
    }
  }
  return n;
}

// Largest spacing ratio whose grid holds at least target points.
double ratio_for_target(int target) {
  double lo = 1e-3, hi = 2.0;
  if (disk_grid_count(hi) >= target) return hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (disk_grid_count(mid) >= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double disk_spacing_ratio(const FootprintModel& model) {
  if (model.k_d > 0.0) return model.k_d / model.k_h;
  if (model.target_samples == 25) return kDefaultSpacingRatio;
  if (model.target_samples == 1) return 2.0;  // center point only
  return ratio_for_target(model.target_samples);
}

}  // namespace

double footprint_density(const FootprintModel& model, const Eigen::VectorXd& w,
                         const Eigen::VectorXd& x, const StateProjection& proj) {
  const Eigen::VectorXd q = proj.position_of(x);
  switch (model.kind) {
    case FootprintModel::Kind::FixedDisk: {
      const double r = model.radius;
      return ((w - q).norm() <= r) ? 1.0 / (M_PI * r * r) : 0.0;
    }
    case FootprintModel::Kind::AltitudeDisk: {
      const double h = proj.height_of(x);
      if (!(h > 0.0)) throw std::invalid_argument("footprint_density: nonpositive height");
      const double r = model.k_h * h;
      return ((w - q).norm() <= r) ? 1.0 / (M_PI * r * r) : 0.0;
    }
    case FootprintModel::Kind::Point:
      throw std::invalid_argument("footprint_density: point footprint is a Dirac");
    case FootprintModel::Kind::Cone:
      throw std::invalid_argument("footprint_density: cone footprints are sampled on surfaces");
  }
  throw std::logic_error("footprint_density: unreachable");
}

SamplePattern sample_pattern(const FootprintModel& model) {
  SamplePattern p;
  switch (model.kind) {
    case FootprintModel::Kind::Point: {
      p.offsets = Eigen::MatrixXd::Zero(1, 2);
      p.weights = Eigen::VectorXd::Ones(1);
      return p;
    }
    case FootprintModel::Kind::FixedDisk:
    case FootprintModel::Kind::AltitudeDisk: {
      p.offsets = disk_grid(disk_spacing_ratio(model));
      break;
    }
    case FootprintModel::Kind::Cone: {
      const int m_count = model.target_samples;
      if (m_count < 1) throw std::invalid_argument("sample_pattern: need at least 1 sample");
      const double cos_half = std::cos(std::atan(model.k_h));
      p.offsets.resize(m_count, 3);
      if (m_count == 1) {
        p.offsets.row(0) = Eigen::RowVector3d(0.0, 0.0, 1.0);
      } else {
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int m = 0; m < m_count; ++m) {
          const double ca = 1.0 - (1.0 - cos_half) * (m + 0.5) / m_count;
          const double sa = std::sqrt(std::max(0.0, 1.0 - ca * ca));
          const double phi = golden * m;
          p.offsets.row(m) =
              Eigen::RowVector3d(sa * std::cos(phi), sa * std::sin(phi), ca);
        }
      }
      break;
    }
  }
  const int m_count = static_cast<int>(p.offsets.rows());
  p.weights = Eigen::VectorXd::Constant(m_count, 1.0 / m_count);
  return p;
}

SampleSet realize_samples(const FootprintModel& model, const SamplePattern& pattern,
                          const std::vector<Eigen::VectorXd>& states, int num_steps,
                          const StateProjection& proj, const Workspace& ws) {
  if (num_steps < 1 || static_cast<int>(states.size()) < num_steps) {
    throw std::invalid_argument("realize_samples: bad step count");
  }
  if (model.kind == FootprintModel::Kind::Cone) {
    throw std::invalid_argument("realize_samples: cone footprints are realized on surfaces");
  }
  const int nu = ws.dim();
  const int n = static_cast<int>(states[0].size());
  const Eigen::MatrixXd pos_jac = proj.position_jacobian(n);
  const int m_count = static_cast<int>(pattern.offsets.rows());

  SampleSet out;
  out.steps.resize(num_steps);
  bool clamp_flags[3];
  for (int t = 0; t < num_steps; ++t) {
    const Eigen::VectorXd& x = states[t];
    const Eigen::VectorXd q = proj.position_of(x);
    auto& step = out.steps[t];

    if (model.kind == FootprintModel::Kind::Point) {
      SampleSet::Sample s;
      s.w = ws.clamp(q, clamp_flags);
      s.weight = 1.0;
      s.jac = pos_jac;
      for (int o = 0; o < nu; ++o) {
        if (clamp_flags[o]) {
          s.jac.row(o).setZero();
          s.clamped = true;
        }
      }
      step.push_back(std::move(s));
      continue;
    }

    double radius = model.radius;
    if (model.kind == FootprintModel::Kind::AltitudeDisk) {
      const double h = proj.height_of(x);
      if (!(h > 0.0)) throw std::invalid_argument("realize_samples: nonpositive height");
      radius = model.k_h * h;
    }
    step.reserve(m_count);
    for (int m = 0; m < m_count; ++m) {
      const Eigen::VectorXd g = pattern.offsets.row(m).transpose();
      SampleSet::Sample s;
      s.w = ws.clamp(q + radius * g, clamp_flags);
      s.weight = pattern.weights[m];
      s.jac = pos_jac;
      if (model.kind == FootprintModel::Kind::AltitudeDisk) {
        s.jac += model.k_h * g * Eigen::RowVectorXd::Unit(n, proj.height_index);
      }
      for (int o = 0; o < nu; ++o) {
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
