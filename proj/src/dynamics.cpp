#include "erg/dynamics.hpp"

#include <stdexcept>

namespace erg {

Eigen::VectorXd step(const DynamicsModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (x.size() != model.state_dim || u.size() != model.control_dim()) {
    throw std::invalid_argument("step: dimension mismatch");
  }
  Eigen::VectorXd next = x;
  if (model.kind == DynamicsModel::Kind::SingleIntegrator) {
    next += dt * u;
  } else {
    const int d = model.control_dim();
    next.head(d) += dt * x.tail(d);
    next.tail(d) += dt * u;
  }
  return next;
}

Trajectory rollout(const DynamicsModel& model, const Eigen::VectorXd& x0,
                   const std::vector<Eigen::VectorXd>& controls, double dt) {
  Trajectory traj;
  traj.dt = dt;
  traj.controls = controls;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  for (const auto& u : controls) {
    traj.states.push_back(step(model, traj.states.back(), u, dt));
  }
  return traj;
}

void step_jacobians(const DynamicsModel& model, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u, double dt, Eigen::MatrixXd& a_mat,
                    Eigen::MatrixXd& b_mat) {
  (void)x;
  (void)u;
  const int n = model.state_dim;
  const int m = model.control_dim();
  a_mat = Eigen::MatrixXd::Identity(n, n);
  b_mat = Eigen::MatrixXd::Zero(n, m);
  if (model.kind == DynamicsModel::Kind::SingleIntegrator) {
    b_mat = dt * Eigen::MatrixXd::Identity(n, m);
  } else {
    const int d = m;
    a_mat.topRightCorner(d, d) = dt * Eigen::MatrixXd::Identity(d, d);
    b_mat.bottomRows(d) = dt * Eigen::MatrixXd::Identity(d, d);
  }
}

}  // namespace erg
