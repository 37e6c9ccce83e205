#include "erg/infomap.hpp"

#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace erg {

namespace {

constexpr int kQuadBlock = 1024;  // fixed-size blocks keep reductions order-stable

struct QuadGrid {
  int nu;
  int per_dim;
  std::vector<double> nodes;    // per_dim per dimension, same for all dims scaled by L
  long total;
};

double gauss1d(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
}

}  // namespace

InfoMap::InfoMap(Workspace ws, GaussianMixture gmm)
    : ws_(std::move(ws)), rep_(std::move(gmm)) {
  const auto& g = std::get<GaussianMixture>(rep_);
  if (g.components.empty()) throw std::invalid_argument("InfoMap: empty mixture");
  for (const auto& c : g.components) {
    if (c.weight < 0.0) throw std::invalid_argument("InfoMap: negative weight");
    if (c.mean.size() != ws_.dim() || c.sigma.size() != ws_.dim()) {
      throw std::invalid_argument("InfoMap: component dim mismatch");
    }
    if ((c.sigma.array() <= 0.0).any()) {
      throw std::invalid_argument("InfoMap: sigma must be positive");
    }
  }
}

InfoMap::InfoMap(Workspace ws, GridMap grid)
    : ws_(std::move(ws)), rep_(std::move(grid)) {
  const auto& g = std::get<GridMap>(rep_);
  if (static_cast<int>(g.resolution.size()) != ws_.dim()) {
    throw std::invalid_argument("InfoMap: grid resolution dim mismatch");
  }
  long total = 1;
  for (int r : g.resolution) {
    if (r < 1) throw std::invalid_argument("InfoMap: resolution must be >= 1");
    total *= r;
  }
  if (static_cast<long>(g.cells.size()) != total) {
    throw std::invalid_argument("InfoMap: cell count mismatch");
  }
  for (double v : g.cells) {
    if (v < 0.0) throw std::invalid_argument("InfoMap: negative cell value");
  }
}

InfoMap::InfoMap(Workspace ws, DeltaCloud cloud)
    : ws_(std::move(ws)), rep_(std::move(cloud)) {
  auto& c = std::get<DeltaCloud>(rep_);
  if (c.points.empty()) throw std::invalid_argument("InfoMap: empty point set");
  for (const auto& p : c.points) {
    if (p.size() != ws_.dim()) throw std::invalid_argument("InfoMap: point dim mismatch");
  }
  if (!c.weights.empty() && c.weights.size() != c.points.size()) {
    throw std::invalid_argument("InfoMap: weight count mismatch");
  }
}

double InfoMap::density(const Eigen::VectorXd& w) const {
  if (const auto* g = std::get_if<GaussianMixture>(&rep_)) {
    double d = 0.0;
    for (const auto& c : g->components) {
      double p = c.weight;
      for (int o = 0; o < ws_.dim(); ++o) p *= gauss1d(w[o], c.mean[o], c.sigma[o]);
      d += p;
    }
    return d;
  }
  if (const auto* g = std::get_if<GridMap>(&rep_)) {
    long flat = 0;
    for (int o = 0; o < ws_.dim(); ++o) {
      int idx = static_cast<int>(w[o] / ws_.length(o) * g->resolution[o]);
      if (idx < 0) idx = 0;
      if (idx >= g->resolution[o]) idx = g->resolution[o] - 1;
      flat = flat * g->resolution[o] + idx;
    }
    return g->cells[static_cast<size_t>(flat)];
  }
  return 0.0;  // DeltaCloud: no pointwise density
}

int default_quadrature(int nu) { return nu == 2 ? 200 : 64; }

namespace {

// Trapezoid mass of a pointwise density over the workspace.
double quadrature_mass(const InfoMap& map, int per_dim) {
  const Workspace& ws = map.workspace();
  const int nu = ws.dim();
  long total = 1;
  for (int o = 0; o < nu; ++o) total *= per_dim;
  double mass = 0.0;
  Eigen::VectorXd w(nu);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    double qw = 1.0;
    for (int o = nu - 1; o >= 0; --o) {
      const int i = static_cast<int>(rem % per_dim);
      rem /= per_dim;
      w[o] = ws.length(o) * i / (per_dim - 1);
      qw *= (ws.length(o) / (per_dim - 1)) * ((i == 0 || i == per_dim - 1) ? 0.5 : 1.0);
    }
    mass += qw * map.density(w);
  }
  return mass;
}

}  // namespace

InfoMap normalize_map(const InfoMap& map, int quad_per_dim) {
  const int nu = map.workspace().dim();
  if (quad_per_dim == 0) quad_per_dim = default_quadrature(nu);

  if (const DeltaCloud* c = map.cloud()) {
    DeltaCloud out = *c;
    if (out.weights.empty()) {
      out.weights.assign(out.points.size(), 1.0 / out.points.size());
    } else {
      const double mass = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
      if (!(mass > 0.0)) throw std::invalid_argument("normalize_map: zero-mass cloud");
      for (double& v : out.weights) v /= mass;
    }
    return InfoMap(map.workspace(), std::move(out));
  }

  const double mass = quadrature_mass(map, quad_per_dim);
  if (!(mass > 0.0)) throw std::invalid_argument("normalize_map: zero-mass map");
  if (const GaussianMixture* g = map.gmm()) {
    GaussianMixture out = *g;
    for (auto& comp : out.components) comp.weight /= mass;
    return InfoMap(map.workspace(), std::move(out));
  }
  const GridMap* g = map.grid();
  GridMap out = *g;
  for (double& v : out.cells) v /= mass;
  return InfoMap(map.workspace(), std::move(out));
}

namespace detail {

CoeffVector map_coeffs_quadrature(const InfoMap& map, const SpectralBasis& basis,
                                  int per_dim, bool parallel) {
  const Workspace& ws = map.workspace();
  const int nu = ws.dim();
  const int K = basis.size();
  long total = 1;
  for (int o = 0; o < nu; ++o) total *= per_dim;

  const long nblocks = (total + kQuadBlock - 1) / kQuadBlock;
  std::vector<Eigen::VectorXd> partial(static_cast<size_t>(nblocks),
                                       Eigen::VectorXd::Zero(K));

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (long b = 0; b < nblocks; ++b) {
    Eigen::VectorXd w(nu);
    std::vector<double> vals(K);
    Eigen::VectorXd& acc = partial[static_cast<size_t>(b)];
    const long lo = b * kQuadBlock;
    const long hi = std::min(total, lo + kQuadBlock);
    for (long flat = lo; flat < hi; ++flat) {
      long rem = flat;
      double qw = 1.0;
      for (int o = nu - 1; o >= 0; --o) {
        const int i = static_cast<int>(rem % per_dim);
        rem /= per_dim;
        w[o] = ws.length(o) * i / (per_dim - 1);
        qw *= (ws.length(o) / (per_dim - 1)) * ((i == 0 || i == per_dim - 1) ? 0.5 : 1.0);
      }
      const double d = qw * map.density(w);
      if (d == 0.0) continue;
      basis.eval_all(w, vals.data());
      for (int k = 0; k < K; ++k) acc[k] += d * vals[k];
    }
  }

  CoeffVector out;
  out.basis = &basis;
  out.values = Eigen::VectorXd::Zero(K);
  for (long b = 0; b < nblocks; ++b) out.values += partial[static_cast<size_t>(b)];
  return out;
}

CoeffVector map_coeffs_impl(const InfoMap& map, const SpectralBasis& basis,
                            int quad_per_dim, bool parallel) {
  const int nu = map.workspace().dim();
  if (quad_per_dim == 0) quad_per_dim = default_quadrature(nu);

  if (const DeltaCloud* c = map.cloud()) {
    if (c->weights.empty()) {
      throw std::invalid_argument("map_coeffs: cloud not normalized (call normalize_map)");
    }
    CoeffVector out;
    out.basis = &basis;
    out.values = Eigen::VectorXd::Zero(basis.size());
    std::vector<double> vals(basis.size());
    for (size_t p = 0; p < c->points.size(); ++p) {
      basis.eval_all(c->points[p], vals.data());
      for (int k = 0; k < basis.size(); ++k) out.values[k] += c->weights[p] * vals[k];
    }
    return out;
  }

  if (quad_per_dim < 32) {
    throw std::invalid_argument("map_coeffs: quadrature grid must be >= 32 per dim");
  }
  return map_coeffs_quadrature(map, basis, quad_per_dim, parallel);
}

}  // namespace detail

CoeffVector map_coeffs(const InfoMap& map, const SpectralBasis& basis,
                       int quad_per_dim) {
  return detail::map_coeffs_impl(map, basis, quad_per_dim, true);
}

namespace ref {
CoeffVector map_coeffs(const InfoMap& map, const SpectralBasis& basis,
                       int quad_per_dim) {
  return detail::map_coeffs_impl(map, basis, quad_per_dim, false);
}
}  // namespace ref

GridMap reconstruct(const CoeffVector& coeffs, const std::vector<int>& resolution) {
  const SpectralBasis& basis = *coeffs.basis;
  const Workspace& ws = basis.workspace();
  const int nu = ws.dim();
  if (static_cast<int>(resolution.size()) != nu) {
    throw std::invalid_argument("reconstruct: resolution dim mismatch");
  }
  long total = 1;
  for (int r : resolution) {
    if (r < 2) throw std::invalid_argument("reconstruct: resolution must be >= 2 per dim");
    total *= r;
  }
  GridMap out;
  out.resolution = resolution;
  out.cells.resize(static_cast<size_t>(total));

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long flat = 0; flat < total; ++flat) {
    Eigen::VectorXd w(nu);
    std::vector<double> vals(basis.size());
    long rem = flat;
    for (int o = nu - 1; o >= 0; --o) {
      const int i = static_cast<int>(rem % resolution[o]);
      rem /= resolution[o];
      w[o] = ws.length(o) * (i + 0.5) / resolution[o];
    }
    basis.eval_all(w, vals.data());
    double v = 0.0;
    for (int k = 0; k < basis.size(); ++k) v += coeffs.values[k] * vals[k];
    out.cells[static_cast<size_t>(flat)] = v;
  }
  return out;
}

}  // namespace erg
