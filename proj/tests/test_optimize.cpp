#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "erg/optimize.hpp"
#include "support/oracles.hpp"

using namespace erg;

namespace {

StateProjection drone_proj() {
  StateProjection p;
  p.position = {0, 1};
  p.height_index = 2;
  return p;
}

RobotSpec drone_robot(const Eigen::Vector3d& x0) {
  RobotSpec r;
  r.dynamics.kind = DynamicsModel::Kind::SingleIntegrator;
  r.dynamics.state_dim = 3;
  r.x0 = x0;
  r.control_bounds.lo = Eigen::Vector3d(-1.0, -1.0, -1.0);
  r.control_bounds.hi = Eigen::Vector3d(1.0, 1.0, 1.0);
  r.state_bounds.lo = Eigen::Vector3d(0.05, 0.05, 0.1);
  r.state_bounds.hi = Eigen::Vector3d(0.95, 0.95, 0.5);
  r.projection = drone_proj();
  return r;
}

struct Fixture {
  std::shared_ptr<SpectralBasis> basis;
  ProblemSpec spec;

  explicit Fixture(int steps = 10) {
    spec.workspace = Workspace({1.0, 1.0});
    basis = std::make_shared<SpectralBasis>(spec.workspace, std::vector<int>{5, 5});
    spec.basis = basis;
    spec.phi.basis = basis.get();
    spec.phi.values = Eigen::VectorXd::Zero(basis->size());
    spec.phi.values[0] = 1.0;  // uniform target
    spec.robots.push_back(drone_robot(Eigen::Vector3d(0.5, 0.5, 0.3)));
    spec.steps = steps;
    spec.dt = 0.1;
    spec.control_weight = Eigen::Vector3d::Constant(1e-3);
    spec.seed = 7;
  }
};

AlState al_for(const ProblemSpec& spec, const Eigen::VectorXd& z, double mu,
               double lam) {
  AlState al;
  al.mu = mu;
  const auto controls = unpack_controls(spec, z);
  std::vector<Trajectory> trajs;
  for (size_t i = 0; i < spec.robots.size(); ++i) {
    trajs.push_back(rollout(spec.robots[i].dynamics, spec.robots[i].x0, controls[i],
                            spec.dt));
  }
  const long ng = constraint_eval(spec, trajs, al.frozen).g.size();
  al.multipliers = Eigen::VectorXd::Constant(ng, lam);
  return al;
}

Eigen::VectorXd random_controls(const ProblemSpec& spec, std::mt19937_64& rng,
                                double scale) {
  Eigen::VectorXd z(spec.total_control_vars());
  for (long i = 0; i < z.size(); ++i) z[i] = scale * oracles::uniform(rng, -1.0, 1.0);
  return z;
}

}  // namespace

TEST_CASE("pack and unpack controls round-trip") {
  Fixture fx;
  fx.spec.robots.push_back(drone_robot(Eigen::Vector3d(0.3, 0.7, 0.2)));
  std::mt19937_64 rng(71);
  const Eigen::VectorXd z = random_controls(fx.spec, rng, 0.5);
  const auto controls = unpack_controls(fx.spec, z);
  REQUIRE(controls.size() == 2);
  REQUIRE(controls[0].size() == 10);
  CHECK((pack_controls(fx.spec, controls) - z).norm() == 0.0);
  CHECK(controls[1][3][2] == z[10 * 3 + 3 * 3 + 2]);
}

TEST_CASE("constraint values on a hand-built trajectory") {
  Fixture fx(2);
  const auto controls = unpack_controls(
      fx.spec, pack_controls(fx.spec, {{Eigen::Vector3d(1.5, 0.0, 0.0),
                                        Eigen::Vector3d(0.0, -0.2, 0.0)}}));
  std::vector<Trajectory> trajs = {
      rollout(fx.spec.robots[0].dynamics, fx.spec.robots[0].x0, controls[0], 0.1)};
  const ConstraintValues cv = constraint_eval(fx.spec, trajs, {});
  // 2 steps * 3 dims * 2 sides for states, same for controls
  REQUIRE(cv.g.size() == 24);
  // first control exceeds the box by 0.5
  CHECK(cv.max_violation() == doctest::Approx(0.5));
  // state x at t=1: 0.5 + 0.15 = 0.65; g_hi = 0.65 - 0.95
  CHECK(cv.g[0] == doctest::Approx(-0.3));
  CHECK(cv.g[1] == doctest::Approx(0.05 - 0.65));

  // feasible trajectory: no positive entries
  const auto quiet = unpack_controls(
      fx.spec, pack_controls(fx.spec, {{Eigen::Vector3d(0.1, 0.0, 0.0),
                                        Eigen::Vector3d(0.0, -0.1, 0.0)}}));
  std::vector<Trajectory> ok = {
      rollout(fx.spec.robots[0].dynamics, fx.spec.robots[0].x0, quiet[0], 0.1)};
  CHECK(constraint_eval(fx.spec, ok, {}).max_violation() == 0.0);
}

TEST_CASE("objective equals metric plus control effort") {
  Fixture fx;
  std::mt19937_64 rng(73);
  const Eigen::VectorXd z = random_controls(fx.spec, rng, 0.2);
  const auto controls = unpack_controls(fx.spec, z);

  const Trajectory traj =
      rollout(fx.spec.robots[0].dynamics, fx.spec.robots[0].x0, controls[0], fx.spec.dt);
  const SampleSet set =
      realize_samples(fx.spec.footprint, sample_pattern(fx.spec.footprint), traj.states,
                      fx.spec.steps, fx.spec.robots[0].projection, fx.spec.workspace);
  const double erg = ergodicity(footprint_coeffs(set, *fx.basis), fx.spec.phi);
  double effort = 0.0;
  for (const auto& u : controls[0]) {
    effort += fx.spec.dt * (fx.spec.control_weight.array() * u.array().square()).sum();
  }
  CHECK(objective(fx.spec, controls) == doctest::Approx(erg + effort).epsilon(1e-13));
}

TEST_CASE("augmented-lagrangian gradient matches finite differences") {
  Fixture fx;
  std::mt19937_64 rng(79);
  const Eigen::VectorXd z = random_controls(fx.spec, rng, 0.2);
  for (double lam : {0.0, 0.5}) {
    const AlState al = al_for(fx.spec, z, 10.0, lam);
    const auto [value, grad] = al_value_and_grad(fx.spec, z, al);
    CHECK(std::isfinite(value));
    const Eigen::VectorXd fd = oracles::central_diff(
        [&](const Eigen::VectorXd& zp) { return al_value_and_grad(fx.spec, zp, al).first; },
        z, 1e-6);
    CHECK(oracles::rel_err(grad, fd) < 1e-6);
  }
}

TEST_CASE("gradient with active box constraints") {
  Fixture fx;
  std::mt19937_64 rng(83);
  // strong drift pushes states against the box so the penalty is active
  Eigen::VectorXd z = random_controls(fx.spec, rng, 0.1);
  for (int t = 0; t < fx.spec.steps; ++t) z[3 * t] += 0.9;
  const AlState al = al_for(fx.spec, z, 50.0, 1.0);
  const auto [value, grad] = al_value_and_grad(fx.spec, z, al);
  CHECK(std::isfinite(value));
  const Eigen::VectorXd fd = oracles::central_diff(
      [&](const Eigen::VectorXd& zp) { return al_value_and_grad(fx.spec, zp, al).first; },
      z, 1e-6);
  CHECK(oracles::rel_err(grad, fd) < 1e-6);
}

TEST_CASE("gradient with the inter-robot distance penalty") {
  Fixture fx;
  fx.spec.robots.push_back(drone_robot(Eigen::Vector3d(0.55, 0.5, 0.3)));
  fx.spec.constraints.min_robot_distance = 0.2;  // violated at the start
  std::mt19937_64 rng(89);
  const Eigen::VectorXd z = random_controls(fx.spec, rng, 0.2);
  const AlState al = al_for(fx.spec, z, 20.0, 0.3);
  const auto [value, grad] = al_value_and_grad(fx.spec, z, al);
  CHECK(std::isfinite(value));
  const Eigen::VectorXd fd = oracles::central_diff(
      [&](const Eigen::VectorXd& zp) { return al_value_and_grad(fx.spec, zp, al).first; },
      z, 1e-6);
  CHECK(oracles::rel_err(grad, fd) < 1e-6);
}

TEST_CASE("surface-mode gradient matches finite differences") {
  ProblemSpec spec;
  spec.workspace = Workspace({1.0, 1.0, 1.0});
  auto basis = std::make_shared<SpectralBasis>(spec.workspace, std::vector<int>{4, 4, 4});
  spec.basis = basis;

  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) pts.emplace_back(0.25 + 0.05 * i, 0.25 + 0.05 * j, 0.2);
  }
  spec.cloud = std::make_shared<PointCloud>(make_cloud(pts, spec.workspace));

  DeltaCloud dc;
  for (const auto& p : spec.cloud->points) dc.points.push_back(p);
  const InfoMap map = normalize_map(InfoMap(spec.workspace, std::move(dc)));
  const CoeffVector phi = map_coeffs(map, *basis);
  spec.phi.basis = basis.get();
  spec.phi.values = phi.values;

  spec.footprint.kind = FootprintModel::Kind::Cone;
  spec.footprint.k_h = 0.3;
  spec.footprint.target_samples = 9;
  spec.footprint.axis = FootprintModel::AxisPolicy::Down;

  RobotSpec robot;
  robot.dynamics.state_dim = 3;
  robot.x0 = Eigen::Vector3d(0.5, 0.5, 0.6);
  robot.projection.position = {0, 1, 2};
  spec.robots.push_back(robot);
  spec.steps = 6;
  spec.dt = 0.1;
  spec.control_weight = Eigen::Vector3d::Constant(1e-3);
  spec.constraints.surface_range = SurfaceRange{0.2, 0.6};

  std::mt19937_64 rng(97);
  Eigen::VectorXd z(spec.total_control_vars());
  for (long i = 0; i < z.size(); ++i) z[i] = 0.2 * oracles::uniform(rng, -1.0, 1.0);

  AlState al;
  al.mu = 15.0;
  const auto controls = unpack_controls(spec, z);
  const Trajectory traj = rollout(robot.dynamics, robot.x0, controls[0], spec.dt);
  al.frozen.push_back(cast_rays(*spec.cloud, spec.footprint, traj.states, spec.steps,
                                robot.projection, 0.0));
  const long ng = constraint_eval(spec, {traj}, al.frozen).g.size();
  REQUIRE(ng > 0);
  al.multipliers = Eigen::VectorXd::Constant(ng, 0.4);

  const auto [value, grad] = al_value_and_grad(spec, z, al);
  CHECK(std::isfinite(value));
  const Eigen::VectorXd fd = oracles::central_diff(
      [&](const Eigen::VectorXd& zp) { return al_value_and_grad(spec, zp, al).first; },
      z, 1e-6);
  CHECK(oracles::rel_err(grad, fd) < 5e-6);
}

TEST_CASE("lbfgs on a convex quadratic") {
  Eigen::VectorXd target(4);
  target << 1.0, -2.0, 0.5, 3.0;
  Eigen::VectorXd scales(4);
  scales << 1.0, 4.0, 0.25, 10.0;
  auto f = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - target;
    return std::make_pair(0.5 * (scales.array() * d.array().square()).sum(),
                          Eigen::VectorXd(scales.array() * d.array()));
  };
  LbfgsReport rep;
  const Eigen::VectorXd x =
      lbfgs_minimize(f, Eigen::VectorXd::Zero(4), 200, 1e-10, 10, &rep);
  CHECK((x - target).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(rep.grad_norm < 1e-10);
}

TEST_CASE("lbfgs on the rosenbrock valley") {
  auto f = [](const Eigen::VectorXd& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    Eigen::VectorXd g(2);
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return std::make_pair(a * a + 100.0 * b * b, g);
  };
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  const Eigen::VectorXd x = lbfgs_minimize(f, x0, 500, 1e-8, 10, nullptr);
  CHECK((x - Eigen::Vector2d(1.0, 1.0)).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("initial controls are seeded and bounded") {
  Fixture fx;
  const Eigen::VectorXd a = initial_controls(fx.spec);
  const Eigen::VectorXd b = initial_controls(fx.spec);
  CHECK((a - b).norm() == 0.0);
  fx.spec.seed = 8;
  const Eigen::VectorXd c = initial_controls(fx.spec);
  CHECK((a - c).norm() > 0.0);
  // amplitude: 5% of the [-1,1] control range
  CHECK(a.lpNorm<Eigen::Infinity>() <= 0.1 + 1e-15);
}

TEST_CASE("solve improves on the initial guess and stays feasible") {
  Fixture fx(20);
  const Eigen::VectorXd z0 = initial_controls(fx.spec);
  const double before = objective(fx.spec, unpack_controls(fx.spec, z0));

  const SolveResult res = solve(fx.spec);
  CHECK(res.success);
  CHECK(res.max_violation < fx.spec.solver.viol_tol);
  REQUIRE(!res.log.empty());
  CHECK(res.ergodicity + res.control_cost < before);
  REQUIRE(res.trajectories.size() == 1);
  CHECK((res.trajectories[0].states[0] - fx.spec.robots[0].x0).norm() == 0.0);
  CHECK(res.trajectories[0].num_steps() == 20);

  // deterministic: the same spec reproduces the same trajectory bitwise
  const SolveResult res2 = solve(fx.spec);
  for (int t = 0; t <= 20; ++t) {
    CHECK((res.trajectories[0].states[t] - res2.trajectories[0].states[t]).norm() ==
          0.0);
  }
}

TEST_CASE("problem validation") {
  Fixture fx;
  {
    ProblemSpec bad = fx.spec;
    bad.basis = nullptr;
    CHECK_THROWS_AS(solve(bad), std::invalid_argument);
  }
  {
    ProblemSpec bad = fx.spec;
    auto other = std::make_shared<SpectralBasis>(bad.workspace, std::vector<int>{5, 5});
    bad.basis = other;  // phi still points at the fixture basis
    CHECK_THROWS_AS(solve(bad), std::invalid_argument);
  }
  {
    ProblemSpec bad = fx.spec;
    bad.control_weight = Eigen::Vector2d(1.0, 1.0);
    CHECK_THROWS_AS(solve(bad), std::invalid_argument);
  }
  {
    ProblemSpec bad = fx.spec;
    bad.constraints.surface_range = SurfaceRange{0.1, 0.5};  // no cloud attached
    CHECK_THROWS_AS(solve(bad), std::invalid_argument);
  }
}
