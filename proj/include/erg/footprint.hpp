#pragma once

#include <vector>

#include "erg/workspace.hpp"

namespace erg {

// Maps robot states to workspace position q = f_q(x) and, when height_index
// is set, sensor height h = f_h(x). Both are coordinate selections, so their
// Jacobians are constant selection matrices.
struct StateProjection {
  std::vector<int> position;  // state indices forming q, length = map dim
  int height_index = -1;

  Eigen::VectorXd position_of(const Eigen::VectorXd& x) const {
    Eigen::VectorXd q(position.size());
    for (size_t o = 0; o < position.size(); ++o) q[o] = x[position[o]];
    return q;
  }
  double height_of(const Eigen::VectorXd& x) const {
    if (height_index < 0) throw std::logic_error("StateProjection: no height index");
    return x[height_index];
  }
  // nu x n selection matrix dq/dx
  Eigen::MatrixXd position_jacobian(int n) const {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(position.size(), n);
    for (size_t o = 0; o < position.size(); ++o) p(static_cast<int>(o), position[o]) = 1.0;
    return p;
  }
};

struct FootprintModel {
  enum class Kind { Point, FixedDisk, AltitudeDisk, Cone };
  enum class AxisPolicy { Down, Centroid };

  Kind kind = Kind::AltitudeDisk;
  double k_h = 0.25;       // aperture: footprint radius per unit height
  double radius = 0.05;    // FixedDisk only
  double k_d = 0.0;        // sampling spacing per unit height; 0 = k_h / 2.9
  int target_samples = 25;
  AxisPolicy axis = AxisPolicy::Centroid;  // Cone only
};

// State-independent relative sampling layout: offsets in unit-disk (or
// unit-direction, for Cone) coordinates with weights summing to 1.
struct SamplePattern {
  Eigen::MatrixXd offsets;  // M x nu
  Eigen::VectorXd weights;  // M
};

// Realized samples for one trajectory: per time step, M workspace points
// with weights and Jacobians wrt the full robot state.
struct SampleSet {
  struct Sample {
    Eigen::VectorXd w;
    double weight;
    Eigen::MatrixXd jac;  // nu x n
    bool clamped = false;
  };
  std::vector<std::vector<Sample>> steps;

  int active_steps() const {
    int s = 0;
    for (const auto& step : steps) {
      if (!step.empty()) ++s;
    }
    return s;
  }
  bool any_clamped() const {
    for (const auto& step : steps) {
      for (const auto& s : step) {
        if (s.clamped) return true;
      }
    }
    return false;
  }
};

// Footprint density gamma(w, x); Point is a Dirac and throws here (metric
// code handles it through the single-sample pattern).
double footprint_density(const FootprintModel& model, const Eigen::VectorXd& w,
                         const Eigen::VectorXd& x, const StateProjection& proj);

// Deterministic pattern: adaptive square grid masked to the unit disk for
// disks, Fibonacci spherical-cap directions for Cone.
SamplePattern sample_pattern(const FootprintModel& model);

// Realizes the pattern along states[0..N-1]. Samples falling outside the
// workspace are clamped (flagged), with the clamped Jacobian rows zeroed.
SampleSet realize_samples(const FootprintModel& model, const SamplePattern& pattern,
                          const std::vector<Eigen::VectorXd>& states, int num_steps,
                          const StateProjection& proj, const Workspace& ws);

}  // namespace erg
