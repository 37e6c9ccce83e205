#include "erg/metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace erg {

namespace {

constexpr int kStepBlock = 32;  // fixed block size keeps reduction order stable

void check_same_basis(const CoeffVector& a, const CoeffVector& b) {
  if (a.basis == nullptr || b.basis == nullptr || a.basis != b.basis) {
    throw std::invalid_argument("coefficient vectors belong to different bases");
  }
}

template <bool Parallel>
CoeffVector footprint_coeffs_impl(const SampleSet& samples, const SpectralBasis& basis) {
  const int K = basis.size();
  const int num_steps = static_cast<int>(samples.steps.size());
  const int active = samples.active_steps();
  CoeffVector out;
  out.basis = &basis;
  out.values = Eigen::VectorXd::Zero(K);
  if (active == 0) return out;

  const int nblocks = (num_steps + kStepBlock - 1) / kStepBlock;
  std::vector<Eigen::VectorXd> partial(nblocks, Eigen::VectorXd::Zero(K));

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Parallel)
#endif
  for (int b = 0; b < nblocks; ++b) {
    std::vector<double> vals(K);
    Eigen::VectorXd& acc = partial[b];
    const int hi = std::min(num_steps, (b + 1) * kStepBlock);
    for (int t = b * kStepBlock; t < hi; ++t) {
      for (const auto& s : samples.steps[t]) {
        basis.eval_all(s.w, vals.data());
        for (int k = 0; k < K; ++k) acc[k] += s.weight * vals[k];
      }
    }
  }
  for (int b = 0; b < nblocks; ++b) out.values += partial[b];
  out.values /= static_cast<double>(active);
  return out;
}

template <bool Parallel>
Eigen::MatrixXd coeff_pullback_impl(const SampleSet& samples, const SpectralBasis& basis,
                                    const Eigen::VectorXd& rho, int state_dim) {
  const int K = basis.size();
  const int nu = basis.dim();
  const int num_steps = static_cast<int>(samples.steps.size());
  const int active = samples.active_steps();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_steps + 1, state_dim);
  if (active == 0) return out;
  const double scale = 1.0 / static_cast<double>(active);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Parallel)
#endif
  for (int t = 0; t < num_steps; ++t) {
    std::vector<double> vals(K);
    std::vector<double> grads(static_cast<size_t>(K) * nu);
    Eigen::VectorXd gw(nu);
    for (const auto& s : samples.steps[t]) {
      basis.eval_all_grad(s.w, vals.data(), grads.data());
      gw.setZero();
      for (int k = 0; k < K; ++k) {
        const double r = rho[k];
        if (r == 0.0) continue;
        for (int o = 0; o < nu; ++o) gw[o] += r * grads[static_cast<size_t>(k) * nu + o];
      }
      out.row(t) += (scale * s.weight) * (s.jac.transpose() * gw).transpose();
    }
  }
  return out;
}

}  // namespace

CoeffVector point_coeffs(const std::vector<Eigen::VectorXd>& states, int num_steps,
                         const StateProjection& proj, const SpectralBasis& basis) {
  if (num_steps < 1 || static_cast<int>(states.size()) < num_steps) {
    throw std::invalid_argument("point_coeffs: bad step count");
  }
  const int K = basis.size();
  CoeffVector out;
  out.basis = &basis;
  out.values = Eigen::VectorXd::Zero(K);
  std::vector<double> vals(K);
  for (int t = 0; t < num_steps; ++t) {
    basis.eval_all(proj.position_of(states[t]), vals.data());
    for (int k = 0; k < K; ++k) out.values[k] += vals[k];
  }
  out.values /= static_cast<double>(num_steps);
  return out;
}

CoeffVector footprint_coeffs(const SampleSet& samples, const SpectralBasis& basis) {
  return footprint_coeffs_impl<true>(samples, basis);
}

double weighted_sq_distance(const CoeffVector& c, const CoeffVector& phi,
                            const Eigen::VectorXd& weights) {
  check_same_basis(c, phi);
  const Eigen::VectorXd d = c.values - phi.values;
  return (weights.array() * d.array().square()).sum();
}

double ergodicity(const CoeffVector& c, const CoeffVector& phi) {
  check_same_basis(c, phi);
  const SpectralBasis& basis = *c.basis;
  double e = 0.0;
  for (int k = 0; k < basis.size(); ++k) {
    const double d = c.values[k] - phi.values[k];
    e += basis.weight(k) * d * d;
  }
  return e;
}

Eigen::MatrixXd coeff_pullback(const SampleSet& samples, const SpectralBasis& basis,
                               const Eigen::VectorXd& rho, int state_dim) {
  return coeff_pullback_impl<true>(samples, basis, rho, state_dim);
}

Eigen::MatrixXd metric_gradient(const SampleSet& samples, const CoeffVector& c,
                                const CoeffVector& phi, int state_dim) {
  check_same_basis(c, phi);
  const SpectralBasis& basis = *c.basis;
  Eigen::VectorXd rho(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    rho[k] = 2.0 * basis.weight(k) * (c.values[k] - phi.values[k]);
  }
  return coeff_pullback(samples, basis, rho, state_dim);
}

std::pair<Eigen::VectorXd, double> terminal_form_metric(const SampleSet& samples,
                                                        const CoeffVector& phi,
                                                        double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("terminal_form_metric: horizon <= 0");
  const SpectralBasis& basis = *phi.basis;
  const CoeffVector c = footprint_coeffs(samples, basis);
  Eigen::VectorXd s_final = horizon * (c.values - phi.values);
  double value = 0.0;
  for (int k = 0; k < basis.size(); ++k) {
    // Q = (2/T^2) diag(Lambda)
    value += 0.5 * (2.0 / (horizon * horizon)) * basis.weight(k) * s_final[k] * s_final[k];
  }
  return {std::move(s_final), value};
}

CoeffVector multi_robot_coeffs(const std::vector<CoeffVector>& per_robot) {
  if (per_robot.empty()) throw std::invalid_argument("multi_robot_coeffs: empty list");
  CoeffVector out = per_robot[0];
  for (size_t i = 1; i < per_robot.size(); ++i) {
    check_same_basis(out, per_robot[i]);
    out.values += per_robot[i].values;
  }
  out.values /= static_cast<double>(per_robot.size());
  return out;
}

namespace ref {
CoeffVector footprint_coeffs(const SampleSet& samples, const SpectralBasis& basis) {
  return footprint_coeffs_impl<false>(samples, basis);
}
Eigen::MatrixXd coeff_pullback(const SampleSet& samples, const SpectralBasis& basis,
                               const Eigen::VectorXd& rho, int state_dim) {
  return coeff_pullback_impl<false>(samples, basis, rho, state_dim);
}
}  // namespace ref

}  // namespace erg
