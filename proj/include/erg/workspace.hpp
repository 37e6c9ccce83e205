#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace erg {

// Bounded box [0,L_1] x ... x [0,L_nu], nu in {2,3}.
class Workspace {
 public:
  Workspace() : Workspace(std::vector<double>{1.0, 1.0}) {}

  explicit Workspace(std::vector<double> lengths) {
    const int nu = static_cast<int>(lengths.size());
    if (nu != 2 && nu != 3) {
      throw std::invalid_argument("Workspace: dimension must be 2 or 3");
    }
    lengths_.resize(nu);
    for (int o = 0; o < nu; ++o) {
      if (!(lengths[o] > 0.0)) {
        throw std::invalid_argument("Workspace: lengths must be positive");
      }
      lengths_[o] = lengths[o];
    }
  }

  int dim() const { return static_cast<int>(lengths_.size()); }
  double length(int o) const { return lengths_[o]; }
  const Eigen::VectorXd& lengths() const { return lengths_; }

  double volume() const { return lengths_.prod(); }

  bool contains(const Eigen::VectorXd& w, double tol = 0.0) const {
    for (int o = 0; o < dim(); ++o) {
      if (w[o] < -tol || w[o] > lengths_[o] + tol) return false;
    }
    return true;
  }

  // Clamps w into the box; sets clamped[o] = true per clamped coordinate
  // when the flag array is provided.
  Eigen::VectorXd clamp(const Eigen::VectorXd& w, bool* clamped = nullptr) const {
    Eigen::VectorXd out = w;
    for (int o = 0; o < dim(); ++o) {
      if (clamped) clamped[o] = false;
      if (out[o] < 0.0) {
        out[o] = 0.0;
        if (clamped) clamped[o] = true;
      } else if (out[o] > lengths_[o]) {
        out[o] = lengths_[o];
        if (clamped) clamped[o] = true;
      }
    }
    return out;
  }

 private:
  Eigen::VectorXd lengths_;
};

}  // namespace erg
