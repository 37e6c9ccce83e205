#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "erg/dynamics.hpp"
#include "erg/footprint.hpp"
#include "erg/infomap.hpp"
#include "erg/metric.hpp"
#include "erg/surface3d.hpp"

namespace erg {

struct Bounds {
  Eigen::VectorXd lo, hi;
  bool empty() const { return lo.size() == 0; }
};

struct RobotSpec {
  DynamicsModel dynamics;
  Eigen::VectorXd x0;
  Bounds control_bounds;
  Bounds state_bounds;
  StateProjection projection;
};

struct SurfaceRange {
  double min_dist;  // h3
  double max_dist;  // h2
};

struct ConstraintConfig {
  std::optional<double> min_robot_distance;  // h1, on position components
  std::optional<SurfaceRange> surface_range;
};

struct SolverSettings {
  int max_outer = 10;
  int max_inner = 100;
  double mu0 = 10.0;
  double mu_growth = 5.0;
  double mu_max = 1e6;
  double multiplier_max = 1e8;
  double grad_tol = 1e-6;
  double viol_tol = 1e-3;
  int lbfgs_memory = 10;
  double init_amplitude = 0.05;  // fraction of control range
};

struct ProblemSpec {
  Workspace workspace;
  std::shared_ptr<const SpectralBasis> basis;
  CoeffVector phi;
  FootprintModel footprint;
  std::vector<RobotSpec> robots;
  int steps = 100;
  double dt = 0.1;
  Eigen::VectorXd control_weight;  // diagonal of R, per-robot control dim
  ConstraintConfig constraints;
  SolverSettings solver;
  std::shared_ptr<const PointCloud> cloud;  // set => surface (cone) mode
  double hit_radius = 0.0;                  // 0 = cloud default
  uint64_t seed = 0;

  bool surface_mode() const { return cloud != nullptr; }
  int total_control_vars() const {
    int n = 0;
    for (const auto& r : robots) n += steps * r.dynamics.control_dim();
    return n;
  }
};

struct IterationRecord {
  int iteration;
  double ergodicity;
  double control_cost;
  double max_violation;
};

struct SolveResult {
  std::vector<Trajectory> trajectories;
  double ergodicity = 0.0;
  double control_cost = 0.0;
  double max_violation = 0.0;
  std::vector<IterationRecord> log;
  bool success = false;
  std::string message;
};

// Scalar inequality constraints g_j <= 0, enumerated in a fixed order:
// state boxes, control boxes, inter-robot distances, surface ranges.
struct ConstraintValues {
  Eigen::VectorXd g;
  double max_violation() const { return g.size() ? std::max(0.0, g.maxCoeff()) : 0.0; }
};

ConstraintValues constraint_eval(const ProblemSpec& spec,
                                 const std::vector<Trajectory>& trajs,
                                 const std::vector<FrozenRays>& frozen);

// Per-outer-iteration augmented-Lagrangian state.
struct AlState {
  Eigen::VectorXd multipliers;
  double mu = 10.0;
  std::vector<FrozenRays> frozen;  // surface mode only
};

double objective(const ProblemSpec& spec, const std::vector<std::vector<Eigen::VectorXd>>& controls);

// AL value and its exact gradient wrt the stacked control vector.
std::pair<double, Eigen::VectorXd> al_value_and_grad(const ProblemSpec& spec,
                                                     const Eigen::VectorXd& z,
                                                     const AlState& al);

// Stacked-controls helpers.
Eigen::VectorXd pack_controls(const ProblemSpec& spec,
                              const std::vector<std::vector<Eigen::VectorXd>>& controls);
std::vector<std::vector<Eigen::VectorXd>> unpack_controls(const ProblemSpec& spec,
                                                          const Eigen::VectorXd& z);

Eigen::VectorXd initial_controls(const ProblemSpec& spec);

SolveResult solve(const ProblemSpec& spec);

// Minimizes f via L-BFGS with a strong Wolfe line search. Returns the final
// point; iterations/out_gnorm report what happened.
struct LbfgsReport {
  int iterations = 0;
  double grad_norm = 0.0;
  double value = 0.0;
};
Eigen::VectorXd lbfgs_minimize(
    const std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>& f,
    Eigen::VectorXd x0, int max_iters, double grad_tol, int memory, LbfgsReport* report);

}  // namespace erg
