#include "erg/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace erg {

namespace {

constexpr double kDistEps = 1e-12;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

void validate(const ProblemSpec& spec) {
  if (!spec.basis) throw std::invalid_argument("ProblemSpec: missing basis");
  if (spec.phi.basis != spec.basis.get()) {
    throw std::invalid_argument("ProblemSpec: phi built on a different basis");
  }
  if (spec.robots.empty()) throw std::invalid_argument("ProblemSpec: no robots");
  if (spec.steps < 1 || !(spec.dt > 0.0)) {
    throw std::invalid_argument("ProblemSpec: bad horizon");
  }
  const int m = spec.robots[0].dynamics.control_dim();
  for (const auto& r : spec.robots) {
    if (r.dynamics.control_dim() != m) {
      throw std::invalid_argument("ProblemSpec: robots must share a control dimension");
    }
    if (r.x0.size() != r.dynamics.state_dim) {
      throw std::invalid_argument("ProblemSpec: x0 dimension mismatch");
    }
  }
  if (spec.control_weight.size() != m) {
    throw std::invalid_argument("ProblemSpec: control weight dimension mismatch");
  }
  if ((spec.control_weight.array() <= 0.0).any()) {
    throw std::invalid_argument("ProblemSpec: control weights must be positive");
  }
  if (spec.surface_mode() && spec.footprint.kind != FootprintModel::Kind::Cone) {
    throw std::invalid_argument("ProblemSpec: surface mode requires a cone footprint");
  }
  if (spec.constraints.surface_range && !spec.surface_mode()) {
    throw std::invalid_argument("ProblemSpec: surface-range constraint needs a cloud");
  }
}

struct EvalParts {
  std::vector<Trajectory> trajs;
  std::vector<SampleSet> samples;
  std::vector<CoeffVector> per_robot;
  CoeffVector mean_coeffs;
  double erg = 0.0;
  double control_cost = 0.0;
  bool valid = true;  // false when a rollout leaves the footprint's domain
};

EvalParts compute_parts(const ProblemSpec& spec,
                        const std::vector<std::vector<Eigen::VectorXd>>& controls,
                        const std::vector<FrozenRays>* frozen) {
  EvalParts parts;
  const size_t nr = spec.robots.size();
  parts.trajs.reserve(nr);
  parts.samples.reserve(nr);
  SamplePattern pattern;
  if (!spec.surface_mode()) pattern = sample_pattern(spec.footprint);

  for (size_t i = 0; i < nr; ++i) {
    const RobotSpec& robot = spec.robots[i];
    parts.trajs.push_back(rollout(robot.dynamics, robot.x0, controls[i], spec.dt));
    const auto& states = parts.trajs.back().states;
    if (spec.footprint.kind == FootprintModel::Kind::AltitudeDisk) {
      for (int t = 0; t < spec.steps; ++t) {
        if (!(robot.projection.height_of(states[t]) > 0.0)) {
          parts.valid = false;
          return parts;
        }
      }
    }
    if (spec.surface_mode()) {
      parts.samples.push_back(surface_samples(*spec.cloud, spec.footprint, (*frozen)[i],
                                              states, spec.steps, robot.projection,
                                              spec.workspace));
    } else {
      parts.samples.push_back(realize_samples(spec.footprint, pattern, states, spec.steps,
                                              robot.projection, spec.workspace));
    }
    parts.per_robot.push_back(footprint_coeffs(parts.samples.back(), *spec.basis));
  }
  parts.mean_coeffs = multi_robot_coeffs(parts.per_robot);
  parts.erg = ergodicity(parts.mean_coeffs, spec.phi);
  for (size_t i = 0; i < nr; ++i) {
    for (const auto& u : controls[i]) {
      parts.control_cost += spec.dt * (spec.control_weight.array() * u.array().square()).sum();
    }
  }
  return parts;
}

}  // namespace

Eigen::VectorXd pack_controls(const ProblemSpec& spec,
                              const std::vector<std::vector<Eigen::VectorXd>>& controls) {
  Eigen::VectorXd z(spec.total_control_vars());
  int off = 0;
  for (size_t i = 0; i < spec.robots.size(); ++i) {
    for (const auto& u : controls[i]) {
      z.segment(off, u.size()) = u;
      off += static_cast<int>(u.size());
    }
  }
  return z;
}

std::vector<std::vector<Eigen::VectorXd>> unpack_controls(const ProblemSpec& spec,
                                                          const Eigen::VectorXd& z) {
  std::vector<std::vector<Eigen::VectorXd>> out(spec.robots.size());
  int off = 0;
  for (size_t i = 0; i < spec.robots.size(); ++i) {
    const int m = spec.robots[i].dynamics.control_dim();
    out[i].reserve(spec.steps);
    for (int t = 0; t < spec.steps; ++t) {
      out[i].push_back(z.segment(off, m));
      off += m;
    }
  }
  return out;
}

ConstraintValues constraint_eval(const ProblemSpec& spec,
                                 const std::vector<Trajectory>& trajs,
                                 const std::vector<FrozenRays>& frozen) {
  std::vector<double> g;
  const int num_steps = spec.steps;

  // state boxes, t = 1..N (the fixed initial state is not a decision)
  for (size_t i = 0; i < spec.robots.size(); ++i) {
    const Bounds& b = spec.robots[i].state_bounds;
    if (b.empty()) continue;
    for (int t = 1; t <= num_steps; ++t) {
      const Eigen::VectorXd& x = trajs[i].states[t];
      for (int d = 0; d < x.size(); ++d) {
        g.push_back(x[d] - b.hi[d]);
        g.push_back(b.lo[d] - x[d]);
      }
    }
  }
  // control boxes
  for (size_t i = 0; i < spec.robots.size(); ++i) {
    const Bounds& b = spec.robots[i].control_bounds;
    if (b.empty()) continue;
    for (int t = 0; t < num_steps; ++t) {
      const Eigen::VectorXd& u = trajs[i].controls[t];
      for (int d = 0; d < u.size(); ++d) {
        g.push_back(u[d] - b.hi[d]);
        g.push_back(b.lo[d] - u[d]);
      }
    }
  }
  // inter-robot distance, every state index including the terminal one
  if (spec.constraints.min_robot_distance) {
    const double h1 = *spec.constraints.min_robot_distance;
    for (size_t i = 0; i < spec.robots.size(); ++i) {
      const int pd = spec.robots[i].dynamics.position_dim();
      for (size_t j = i + 1; j < spec.robots.size(); ++j) {
        for (int t = 0; t <= num_steps; ++t) {
          const double dist =
              (trajs[i].states[t].head(pd) - trajs[j].states[t].head(pd)).norm();
          g.push_back(h1 - dist);
        }
      }
    }
  }
  // surface range to frozen hit points
  if (spec.constraints.surface_range) {
    const SurfaceRange sr = *spec.constraints.surface_range;
    for (size_t i = 0; i < spec.robots.size(); ++i) {
      const StateProjection& proj = spec.robots[i].projection;
      for (int t = 0; t < num_steps; ++t) {
        const auto& fs = frozen[i].steps[t];
        const Eigen::VectorXd p = proj.position_of(trajs[i].states[t]);
        for (size_t m = 0; m < fs.hit.size(); ++m) {
          if (!fs.hit[m]) continue;
          const double dist = (p - fs.point[m]).norm();
          g.push_back(dist - sr.max_dist);
          g.push_back(sr.min_dist - dist);
        }
      }
    }
  }
  ConstraintValues out;
  out.g = Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<long>(g.size()));
  return out;
}

double objective(const ProblemSpec& spec,
                 const std::vector<std::vector<Eigen::VectorXd>>& controls) {
  validate(spec);
  std::vector<FrozenRays> frozen;
  if (spec.surface_mode()) {
    for (size_t i = 0; i < spec.robots.size(); ++i) {
      const Trajectory traj = rollout(spec.robots[i].dynamics, spec.robots[i].x0,
                                      controls[i], spec.dt);
      frozen.push_back(cast_rays(*spec.cloud, spec.footprint, traj.states, spec.steps,
                                 spec.robots[i].projection, spec.hit_radius));
    }
  }
  const EvalParts parts =
      compute_parts(spec, controls, spec.surface_mode() ? &frozen : nullptr);
  if (!parts.valid) {
    throw std::invalid_argument("objective: trajectory leaves the footprint's domain");
  }
  return parts.erg + parts.control_cost;
}

std::pair<double, Eigen::VectorXd> al_value_and_grad(const ProblemSpec& spec,
                                                     const Eigen::VectorXd& z,
                                                     const AlState& al) {
  const auto controls = unpack_controls(spec, z);
  const EvalParts parts =
      compute_parts(spec, controls, spec.surface_mode() ? &al.frozen : nullptr);
  if (!parts.valid) {
    // infinite value makes the line search back away from the bad region
    return {std::numeric_limits<double>::infinity(), Eigen::VectorXd::Zero(z.size())};
  }
  const size_t nr = spec.robots.size();
  const int num_steps = spec.steps;

  double value = parts.erg + parts.control_cost;

  // per-robot pullback weights: d(erg)/dc^i_k = 2 Lambda_k (cbar_k - phi_k) / Nr
  Eigen::VectorXd rho(spec.basis->size());
  for (int k = 0; k < spec.basis->size(); ++k) {
    rho[k] = 2.0 * spec.basis->weight(k) *
             (parts.mean_coeffs.values[k] - spec.phi.values[k]) / static_cast<double>(nr);
  }

  // state gradients (N+1) x n per robot; control gradients N x m per robot
  std::vector<Eigen::MatrixXd> state_grad(nr);
  std::vector<Eigen::MatrixXd> ctrl_grad(nr);
  for (size_t i = 0; i < nr; ++i) {
    state_grad[i] = coeff_pullback(parts.samples[i], *spec.basis, rho,
                                   spec.robots[i].dynamics.state_dim);
    ctrl_grad[i] = Eigen::MatrixXd::Zero(num_steps, spec.robots[i].dynamics.control_dim());
    for (int t = 0; t < num_steps; ++t) {
      ctrl_grad[i].row(t) =
          (2.0 * spec.dt) *
          (spec.control_weight.array() * controls[i][t].array()).matrix().transpose();
    }
  }

  // Augmented-Lagrangian penalty terms, in the constraint_eval order.
  const ConstraintValues cv = constraint_eval(spec, parts.trajs, al.frozen);
  if (cv.g.size() != al.multipliers.size()) {
    throw std::logic_error("al_value_and_grad: multiplier/constraint size mismatch");
  }
  const double mu = al.mu;
  Eigen::VectorXd psi_grad(cv.g.size());
  for (long j = 0; j < cv.g.size(); ++j) {
    const double lam = al.multipliers[j];
    const double a = std::max(0.0, lam + mu * cv.g[j]);
    value += (a * a - lam * lam) / (2.0 * mu);
    psi_grad[j] = a;
  }

  // Pull constraint gradients back onto states/controls, mirroring the
  // enumeration in constraint_eval.
  long idx = 0;
  for (size_t i = 0; i < nr; ++i) {
    const Bounds& b = spec.robots[i].state_bounds;
    if (b.empty()) continue;
    for (int t = 1; t <= num_steps; ++t) {
      const Eigen::VectorXd& x = parts.trajs[i].states[t];
      for (int d = 0; d < x.size(); ++d) {
        state_grad[i](t, d) += psi_grad[idx++];
        state_grad[i](t, d) -= psi_grad[idx++];
      }
    }
  }
  for (size_t i = 0; i < nr; ++i) {
    const Bounds& b = spec.robots[i].control_bounds;
    if (b.empty()) continue;
    for (int t = 0; t < num_steps; ++t) {
      for (int d = 0; d < ctrl_grad[i].cols(); ++d) {
        ctrl_grad[i](t, d) += psi_grad[idx++];
        ctrl_grad[i](t, d) -= psi_grad[idx++];
      }
    }
  }
  if (spec.constraints.min_robot_distance) {
    for (size_t i = 0; i < nr; ++i) {
      const int pd = spec.robots[i].dynamics.position_dim();
      for (size_t j = i + 1; j < nr; ++j) {
        for (int t = 0; t <= num_steps; ++t) {
          const Eigen::VectorXd diff =
              parts.trajs[i].states[t].head(pd) - parts.trajs[j].states[t].head(pd);
          const double dist = std::max(diff.norm(), kDistEps);
          const Eigen::VectorXd dgi = -diff / dist;  // d(h1 - dist)/dp_i
          const double w = psi_grad[idx++];
          state_grad[i].row(t).head(pd) += w * dgi.transpose();
          state_grad[j].row(t).head(pd) -= w * dgi.transpose();
        }
      }
    }
  }
  if (spec.constraints.surface_range) {
    for (size_t i = 0; i < nr; ++i) {
      const StateProjection& proj = spec.robots[i].projection;
      for (int t = 0; t < num_steps; ++t) {
        const auto& fs = al.frozen[i].steps[t];
        const Eigen::VectorXd p = proj.position_of(parts.trajs[i].states[t]);
        for (size_t m = 0; m < fs.hit.size(); ++m) {
          if (!fs.hit[m]) continue;
          const Eigen::VectorXd diff = p - fs.point[m];
          const double dist = std::max(diff.norm(), kDistEps);
          const Eigen::VectorXd ddist = diff / dist;
          const double w_hi = psi_grad[idx++];  // dist - h2
          const double w_lo = psi_grad[idx++];  // h3 - dist
          for (size_t o = 0; o < proj.position.size(); ++o) {
            state_grad[i](t, proj.position[o]) += (w_hi - w_lo) * ddist[static_cast<int>(o)];
          }
        }
      }
    }
  }

  // Backward sweep through the dynamics.
  Eigen::VectorXd grad(z.size());
  int off = 0;
  Eigen::MatrixXd a_mat, b_mat;
  for (size_t i = 0; i < nr; ++i) {
    const DynamicsModel& model = spec.robots[i].dynamics;
    const int m = model.control_dim();
    Eigen::VectorXd delta = state_grad[i].row(num_steps).transpose();
    Eigen::MatrixXd gu(num_steps, m);
    for (int t = num_steps - 1; t >= 0; --t) {
      step_jacobians(model, parts.trajs[i].states[t], parts.trajs[i].controls[t], spec.dt,
                     a_mat, b_mat);
      gu.row(t) = ctrl_grad[i].row(t) + (b_mat.transpose() * delta).transpose();
      delta = state_grad[i].row(t).transpose() + a_mat.transpose() * delta;
    }
    for (int t = 0; t < num_steps; ++t) {
      grad.segment(off, m) = gu.row(t).transpose();
      off += m;
    }
  }
  return {value, grad};
}

Eigen::VectorXd initial_controls(const ProblemSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  Eigen::VectorXd z(spec.total_control_vars());
  int off = 0;
  for (const auto& robot : spec.robots) {
    const int m = robot.dynamics.control_dim();
    for (int t = 0; t < spec.steps; ++t) {
      for (int d = 0; d < m; ++d) {
        double amp = spec.solver.init_amplitude;
        if (!robot.control_bounds.empty()) {
          amp *= robot.control_bounds.hi[d] - robot.control_bounds.lo[d];
        }
        double u = amp * (2.0 * uniform01(rng) - 1.0);
        if (!robot.control_bounds.empty()) {
          u = std::clamp(u, robot.control_bounds.lo[d], robot.control_bounds.hi[d]);
        }
        z[off++] = u;
      }
    }
  }
  return z;
}

Eigen::VectorXd lbfgs_minimize(
    const std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>& f,
    Eigen::VectorXd x, int max_iters, double grad_tol, int memory, LbfgsReport* report) {
  auto [fx, g] = f(x);
  if (!std::isfinite(fx)) throw std::runtime_error("lbfgs: non-finite objective");

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  int stall = 0;
  bool did_sd_restart = false;
  int it = 0;

  const double c1 = 1e-4, c2 = 0.9;

  for (; it < max_iters; ++it) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm < grad_tol) break;

    // two-loop recursion
    Eigen::VectorXd d = -g;
    if (!s_hist.empty()) {
      std::vector<double> alpha(s_hist.size());
      for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
        alpha[k] = rho_hist[k] * s_hist[k].dot(d);
        d -= alpha[k] * y_hist[k];
      }
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      d *= gamma;
      for (size_t k = 0; k < s_hist.size(); ++k) {
        const double beta = rho_hist[k] * y_hist[k].dot(d);
        d += (alpha[k] - beta) * s_hist[k];
      }
    }
    double dg = d.dot(g);
    if (!(dg < 0.0)) {  // not a descent direction: fall back
      d = -g;
      dg = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // strong Wolfe line search (bracket + zoom)
    double alpha = s_hist.empty() ? std::min(1.0, 1.0 / std::max(1e-12, g.lpNorm<1>())) : 1.0;
    double alpha_prev = 0.0;
    double f_prev = fx;
    double dg_prev = dg;
    const double f0 = fx;
    double a_lo = 0.0, a_hi = 0.0, f_lo = f0;
    bool bracketed = false, ls_ok = false;
    double f_new = fx;
    Eigen::VectorXd g_new;
    Eigen::VectorXd x_new;
    for (int ls = 0; ls < 25; ++ls) {
      x_new = x + alpha * d;
      std::tie(f_new, g_new) = f(x_new);
      if (!std::isfinite(f_new)) {
        alpha *= 0.25;
        continue;
      }
      const double dg_new = g_new.dot(d);
      if (f_new > f0 + c1 * alpha * dg || (ls > 0 && f_new >= f_prev)) {
        a_lo = alpha_prev;
        f_lo = f_prev;
        a_hi = alpha;
        bracketed = true;
        break;
      }
      if (std::abs(dg_new) <= -c2 * dg) {
        ls_ok = true;
        break;
      }
      if (dg_new >= 0.0) {
        a_lo = alpha;
        f_lo = f_new;
        a_hi = alpha_prev;
        bracketed = true;
        break;
      }
      alpha_prev = alpha;
      f_prev = f_new;
      dg_prev = dg_new;
      (void)dg_prev;
      alpha *= 2.0;
    }
    if (bracketed && !ls_ok) {
      for (int zi = 0; zi < 25; ++zi) {
        alpha = 0.5 * (a_lo + a_hi);
        x_new = x + alpha * d;
        std::tie(f_new, g_new) = f(x_new);
        const double dg_new = std::isfinite(f_new) ? g_new.dot(d) : 1.0;
        if (!std::isfinite(f_new) || f_new > f0 + c1 * alpha * dg || f_new >= f_lo) {
          a_hi = alpha;
        } else {
          if (std::abs(dg_new) <= -c2 * dg) {
            ls_ok = true;
            break;
          }
          if (dg_new * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
          a_lo = alpha;
          f_lo = f_new;
        }
        if (std::abs(a_hi - a_lo) < 1e-14) break;
      }
      // accept the best zoom point if it at least satisfies Armijo
      if (!ls_ok && std::isfinite(f_new) && f_new <= f0 + c1 * alpha * dg) ls_ok = true;
    }
    if (!ls_ok) {
      if (s_hist.empty()) break;  // steepest descent failed: converged enough
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;  // retry from the same point with steepest descent
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    x = std::move(x_new);
    const double rel_progress = std::abs(fx - f_new) / std::max(1.0, std::abs(fx));
    fx = f_new;
    g = std::move(g_new);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (rel_progress < 1e-10) {
      if (++stall >= 5) {
        if (did_sd_restart) break;
        did_sd_restart = true;
        stall = 0;
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
      }
    } else {
      stall = 0;
    }
  }
  if (report) {
    report->iterations = it;
    report->grad_norm = g.lpNorm<Eigen::Infinity>();
    report->value = fx;
  }
  return x;
}

SolveResult solve(const ProblemSpec& spec) {
  validate(spec);
  const SolverSettings& st = spec.solver;
  SolveResult res;

  Eigen::VectorXd z = initial_controls(spec);
  AlState al;
  al.mu = st.mu0;

  auto refresh_frozen = [&](const Eigen::VectorXd& zz) {
    std::vector<FrozenRays> frozen;
    const auto controls = unpack_controls(spec, zz);
    for (size_t i = 0; i < spec.robots.size(); ++i) {
      const Trajectory traj =
          rollout(spec.robots[i].dynamics, spec.robots[i].x0, controls[i], spec.dt);
      frozen.push_back(cast_rays(*spec.cloud, spec.footprint, traj.states, spec.steps,
                                 spec.robots[i].projection, spec.hit_radius));
    }
    return frozen;
  };

  auto constraint_count = [&](const std::vector<FrozenRays>& frozen) {
    const auto controls = unpack_controls(spec, z);
    std::vector<Trajectory> trajs;
    for (size_t i = 0; i < spec.robots.size(); ++i) {
      trajs.push_back(rollout(spec.robots[i].dynamics, spec.robots[i].x0, controls[i], spec.dt));
    }
    return constraint_eval(spec, trajs, frozen).g.size();
  };

  if (spec.surface_mode()) al.frozen = refresh_frozen(z);
  al.multipliers = Eigen::VectorXd::Zero(constraint_count(al.frozen));

  double prev_viol = std::numeric_limits<double>::infinity();
  LbfgsReport rep;
  try {
    for (int outer = 0; outer < st.max_outer; ++outer) {
      auto al_fn = [&](const Eigen::VectorXd& zz) { return al_value_and_grad(spec, zz, al); };
      z = lbfgs_minimize(al_fn, z, st.max_inner, st.grad_tol, st.lbfgs_memory, &rep);

      const auto controls = unpack_controls(spec, z);
      const EvalParts parts =
          compute_parts(spec, controls, spec.surface_mode() ? &al.frozen : nullptr);
      if (!parts.valid) throw std::runtime_error("iterate left the footprint's domain");
      const ConstraintValues cv = constraint_eval(spec, parts.trajs, al.frozen);
      const double viol = cv.max_violation();
      res.log.push_back({outer, parts.erg, parts.control_cost, viol});

      const bool converged = rep.grad_norm < st.grad_tol && viol < st.viol_tol;

      // first-order multiplier update
      for (long j = 0; j < cv.g.size(); ++j) {
        al.multipliers[j] = std::clamp(al.multipliers[j] + al.mu * cv.g[j], 0.0,
                                       st.multiplier_max);
      }
      if (viol > 0.25 * prev_viol && viol > st.viol_tol) {
        al.mu = std::min(al.mu * st.mu_growth, st.mu_max);
      }
      prev_viol = viol;

      if (spec.surface_mode()) {
        const std::vector<FrozenRays> fresh = refresh_frozen(z);
        if (converged) {
          // verify feasibility against re-cast rays before declaring done
          const ConstraintValues cv2 = constraint_eval(spec, parts.trajs, fresh);
          if (cv2.max_violation() < st.viol_tol) {
            al.frozen = fresh;
            break;
          }
        }
        al.frozen = fresh;
        // The state/control/distance blocks keep their multiplier slots;
        // surface-range slots follow the hit layout and reset on refresh.
        long prefix = 0;
        for (size_t i = 0; i < spec.robots.size(); ++i) {
          if (!spec.robots[i].state_bounds.empty()) {
            prefix += 2L * spec.robots[i].dynamics.state_dim * spec.steps;
          }
          if (!spec.robots[i].control_bounds.empty()) {
            prefix += 2L * spec.robots[i].dynamics.control_dim() * spec.steps;
          }
        }
        if (spec.constraints.min_robot_distance) {
          const long nrr = static_cast<long>(spec.robots.size());
          prefix += nrr * (nrr - 1) / 2 * (spec.steps + 1);
        }
        Eigen::VectorXd mult = Eigen::VectorXd::Zero(constraint_count(al.frozen));
        mult.head(prefix) = al.multipliers.head(prefix);
        al.multipliers = std::move(mult);
        if (converged) continue;  // feasibility failed under fresh rays; keep going
      } else if (converged) {
        break;
      }
    }
  } catch (const std::runtime_error& e) {
    res.success = false;
    res.message = std::string("solver failure: ") + e.what();
    return res;
  }

  const auto controls = unpack_controls(spec, z);
  const EvalParts parts =
      compute_parts(spec, controls, spec.surface_mode() ? &al.frozen : nullptr);
  if (!parts.valid) {
    res.success = false;
    res.message = "solver failure: final iterate left the footprint's domain";
    return res;
  }
  const ConstraintValues cv = constraint_eval(spec, parts.trajs, al.frozen);
  res.trajectories = parts.trajs;
  res.ergodicity = parts.erg;
  res.control_cost = parts.control_cost;
  res.max_violation = cv.max_violation();
  res.success = res.max_violation < st.viol_tol;
  res.message = res.success ? "converged" : "terminated with constraint violation";
  return res;
}

}  // namespace erg
