#pragma once

#include <array>
#include <vector>

#include "erg/workspace.hpp"

namespace erg {

using Index = std::array<int, 3>;  // zero-padded beyond the workspace dim

// Row-major enumeration of {0..c1-1} x ... x {0..c_nu-1}, zero index first.
std::vector<Index> index_set(const std::vector<int>& per_dim_counts);

// Normalizer h_k so that F_k has unit L2 norm over the workspace:
// h_k = sqrt(prod_o L_o * (k_o == 0 ? 1 : 1/2)).
double normalizer(const Index& k, const Workspace& ws);

// Coefficient weight Lambda_k = (1 + ||k||^2)^(-(nu+1)/2).
double coeff_weight(const Index& k, int nu);

// Cosine Fourier basis over a box workspace. Immutable after construction.
class SpectralBasis {
 public:
  SpectralBasis(Workspace ws, std::vector<int> per_dim_counts);

  const Workspace& workspace() const { return ws_; }
  int dim() const { return ws_.dim(); }
  int size() const { return static_cast<int>(indices_.size()); }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<Index>& indices() const { return indices_; }
  const Index& index(int i) const { return indices_[i]; }
  double normalizer(int i) const { return normalizers_[i]; }
  double weight(int i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  // F_k(w) = (1/h_k) prod_o cos(k_o pi w_o / L_o)
  double eval(int i, const Eigen::VectorXd& w) const;

  // dF_k/dw, length-nu vector
  Eigen::VectorXd grad(int i, const Eigen::VectorXd& w) const;

  // Evaluates all |K| basis values at w via per-dimension cosine tables.
  // out must have size() entries.
  void eval_all(const Eigen::VectorXd& w, double* out) const;

  // Values plus gradients; grad_out is row-major size() x dim().
  void eval_all_grad(const Eigen::VectorXd& w, double* val_out,
                     double* grad_out) const;

 private:
  Workspace ws_;
  std::vector<int> counts_;
  std::vector<Index> indices_;
  std::vector<double> normalizers_;
  std::vector<double> weights_;
};

// Coefficient vector ordered as basis.indices(). The basis pointer is used
// only for compatibility checks; the caller keeps the basis alive.
struct CoeffVector {
  const SpectralBasis* basis = nullptr;
  Eigen::VectorXd values;
};

}  // namespace erg
