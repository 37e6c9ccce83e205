#pragma once

#include <variant>
#include <vector>

#include "erg/spectral.hpp"
#include "erg/workspace.hpp"

namespace erg {

// Diagonal-covariance Gaussian mixture, truncated to the workspace box and
// renormalized numerically.
struct GaussianMixture {
  struct Component {
    double weight;
    Eigen::VectorXd mean;
    Eigen::VectorXd sigma;  // per-dimension std deviations
  };
  std::vector<Component> components;
};

// Piecewise-constant density on a regular grid of cell values (row-major,
// last dimension fastest).
struct GridMap {
  std::vector<int> resolution;
  std::vector<double> cells;
};

// All mass on a finite point set (used for point-cloud surfaces).
struct DeltaCloud {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;  // empty means uniform
};

class InfoMap {
 public:
  InfoMap(Workspace ws, GaussianMixture gmm);
  InfoMap(Workspace ws, GridMap grid);
  InfoMap(Workspace ws, DeltaCloud cloud);

  const Workspace& workspace() const { return ws_; }
  bool is_delta_cloud() const { return std::holds_alternative<DeltaCloud>(rep_); }
  const GaussianMixture* gmm() const { return std::get_if<GaussianMixture>(&rep_); }
  const GridMap* grid() const { return std::get_if<GridMap>(&rep_); }
  const DeltaCloud* cloud() const { return std::get_if<DeltaCloud>(&rep_); }

  // Pointwise density; for DeltaCloud this is only meaningful under the
  // finite-sum coefficient rule and returns 0.
  double density(const Eigen::VectorXd& w) const;

 private:
  Workspace ws_;
  std::variant<GaussianMixture, GridMap, DeltaCloud> rep_;
  friend InfoMap normalize_map(const InfoMap& map, int quad_per_dim);
};

int default_quadrature(int nu);  // 200 for nu=2, 64 for nu=3

// Rescales so total mass over the workspace is 1 (numerically for the
// continuous representations, exactly for DeltaCloud).
InfoMap normalize_map(const InfoMap& map, int quad_per_dim = 0);

// phi_k = integral of phi * F_k over W; trapezoid quadrature for continuous
// maps (grid >= 32 per dim), exact finite sum for DeltaCloud.
CoeffVector map_coeffs(const InfoMap& map, const SpectralBasis& basis,
                       int quad_per_dim = 0);

namespace ref {
// Serial reference for the quadrature path, kept for kernel testing.
CoeffVector map_coeffs(const InfoMap& map, const SpectralBasis& basis,
                       int quad_per_dim = 0);
}  // namespace ref

// Inverse transform sampled at cell centers. May go negative (truncation
// ringing); no clipping.
GridMap reconstruct(const CoeffVector& coeffs, const std::vector<int>& resolution);

}  // namespace erg
