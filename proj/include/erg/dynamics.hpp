#pragma once

#include <vector>

#include <Eigen/Dense>

namespace erg {

// Discrete-time robot models under explicit Euler.
struct DynamicsModel {
  enum class Kind { SingleIntegrator, DoubleIntegrator };

  Kind kind = Kind::SingleIntegrator;
  int state_dim = 3;

  int control_dim() const {
    return kind == Kind::SingleIntegrator ? state_dim : state_dim / 2;
  }
  int position_dim() const { return control_dim(); }
};

struct Trajectory {
  std::vector<Eigen::VectorXd> states;    // N+1
  std::vector<Eigen::VectorXd> controls;  // N
  double dt = 0.1;

  double horizon() const { return dt * static_cast<double>(controls.size()); }
  int num_steps() const { return static_cast<int>(controls.size()); }
};

Eigen::VectorXd step(const DynamicsModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, double dt);

Trajectory rollout(const DynamicsModel& model, const Eigen::VectorXd& x0,
                   const std::vector<Eigen::VectorXd>& controls, double dt);

// A = dx'/dx, B = dx'/du of the Euler step.
void step_jacobians(const DynamicsModel& model, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& u, double dt, Eigen::MatrixXd& a_mat,
                    Eigen::MatrixXd& b_mat);

}  // namespace erg
