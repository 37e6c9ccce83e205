#pragma once

#include <utility>
#include <vector>

#include "erg/dynamics.hpp"
#include "erg/footprint.hpp"
#include "erg/spectral.hpp"

namespace erg {

// Coefficients of the trajectory's time-averaged statistics, left-endpoint
// rule over the N control intervals: c_k = (1/N) sum_t F_k(q_t).
CoeffVector point_coeffs(const std::vector<Eigen::VectorXd>& states, int num_steps,
                         const StateProjection& proj, const SpectralBasis& basis);

// Sampled-footprint coefficients: c_k = (1/S) sum_t sum_m weight_m F_k(w_m(t))
// where S is the number of steps carrying at least one sample.
CoeffVector footprint_coeffs(const SampleSet& samples, const SpectralBasis& basis);

// Weighted squared spectral distance sum_k Lambda_k (c_k - phi_k)^2.
double ergodicity(const CoeffVector& c, const CoeffVector& phi);
double weighted_sq_distance(const CoeffVector& c, const CoeffVector& phi,
                            const Eigen::VectorXd& weights);

// d/dx_t of sum_k rho_k c_k for the sampled coefficients; rows (N+1) x n,
// last row zero (the terminal state carries no samples).
Eigen::MatrixXd coeff_pullback(const SampleSet& samples, const SpectralBasis& basis,
                               const Eigen::VectorXd& rho, int state_dim);

// Gradient of the footprint ergodicity wrt every state.
Eigen::MatrixXd metric_gradient(const SampleSet& samples, const CoeffVector& c,
                                const CoeffVector& phi, int state_dim);

// Auxiliary-state terminal form: s_k(T) = T (c_k - phi_k),
// value = 1/2 s^T Q s with Q = (2/T^2) diag(Lambda). Equals the ergodicity.
std::pair<Eigen::VectorXd, double> terminal_form_metric(const SampleSet& samples,
                                                        const CoeffVector& phi,
                                                        double horizon);

// Elementwise mean of per-robot coefficient vectors.
CoeffVector multi_robot_coeffs(const std::vector<CoeffVector>& per_robot);

namespace ref {
// Serial reference kernels, kept for testing the parallel paths.
CoeffVector footprint_coeffs(const SampleSet& samples, const SpectralBasis& basis);
Eigen::MatrixXd coeff_pullback(const SampleSet& samples, const SpectralBasis& basis,
                               const Eigen::VectorXd& rho, int state_dim);
}  // namespace ref

}  // namespace erg
