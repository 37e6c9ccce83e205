#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "erg/infomap.hpp"
#include "support/oracles.hpp"

using namespace erg;

namespace {

InfoMap uniform_grid_map(int res) {
  GridMap g;
  g.resolution = {res, res};
  g.cells.assign(static_cast<size_t>(res) * res, 1.0);
  return InfoMap(Workspace({1.0, 1.0}), std::move(g));
}

InfoMap two_peak_map() {
  GaussianMixture gmm;
  Eigen::Vector2d m1(0.3, 0.3), m2(0.7, 0.8);
  Eigen::Vector2d s1(0.2, 0.2), s2(0.05, 0.05);
  gmm.components.push_back({0.6, m1, s1});
  gmm.components.push_back({0.4, m2, s2});
  return InfoMap(Workspace({1.0, 1.0}), std::move(gmm));
}

}  // namespace

TEST_CASE("normalize_map examples") {
  const InfoMap uniform = normalize_map(uniform_grid_map(100));
  for (double v : uniform.grid()->cells) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

  GaussianMixture gmm;
  gmm.components.push_back({2.0, Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.05, 0.05)});
  const InfoMap norm = normalize_map(InfoMap(Workspace({1.0, 1.0}), std::move(gmm)));
  // far from the boundary almost no mass is truncated
  CHECK(norm.gmm()->components[0].weight == doctest::Approx(1.0).epsilon(1e-6));

  DeltaCloud dc;
  for (int i = 0; i < 4; ++i) {
    dc.points.push_back(Eigen::Vector3d(0.1 + 0.2 * i, 0.5, 0.5));
  }
  const InfoMap cloud = normalize_map(InfoMap(Workspace({1.0, 1.0, 1.0}), std::move(dc)));
  for (double w : cloud.cloud()->weights) CHECK(w == doctest::Approx(0.25));

  GridMap zero;
  zero.resolution = {4, 4};
  zero.cells.assign(16, 0.0);
  CHECK_THROWS_AS(normalize_map(InfoMap(Workspace({1.0, 1.0}), std::move(zero))),
                  std::invalid_argument);
}

TEST_CASE("map_coeffs on the uniform map") {
  SpectralBasis basis(Workspace({1.0, 1.0}), {5, 5});
  const CoeffVector phi = map_coeffs(normalize_map(uniform_grid_map(64)), basis);
  CHECK(phi.values[0] == doctest::Approx(1.0).epsilon(1e-9));
  for (int k = 1; k < basis.size(); ++k) CHECK(std::abs(phi.values[k]) < 1e-6);
}

TEST_CASE("map_coeffs delta cloud finite sum") {
  Workspace cube({1.0, 1.0, 1.0});
  SpectralBasis basis(cube, {3, 3, 3});
  DeltaCloud dc;
  dc.points.push_back(Eigen::Vector3d(0.25, 0.25, 0.5));
  dc.points.push_back(Eigen::Vector3d(0.75, 0.75, 0.5));
  const InfoMap map = normalize_map(InfoMap(cube, std::move(dc)));
  const CoeffVector phi = map_coeffs(map, basis);

  // direct finite-sum oracle
  for (int k = 0; k < basis.size(); ++k) {
    double want = 0.0;
    for (size_t p = 0; p < map.cloud()->points.size(); ++p) {
      want += map.cloud()->weights[p] * basis.eval(k, map.cloud()->points[p]);
    }
    CHECK(phi.values[k] == doctest::Approx(want).epsilon(1e-12));
  }
  // k=(1,0,0): cos(pi/4) + cos(3pi/4) = 0
  const int k100 = 9;  // row-major in (3,3,3)
  CHECK(basis.index(k100) == Index{1, 0, 0});
  CHECK(phi.values[k100] == doctest::Approx(0.0).epsilon(1e-12));
  // phi_0 * h_0 = 1
  CHECK(phi.values[0] * basis.normalizer(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("quadrature floor is enforced") {
  SpectralBasis basis(Workspace({1.0, 1.0}), {3, 3});
  CHECK_THROWS_AS(map_coeffs(normalize_map(two_peak_map()), basis, 16),
                  std::invalid_argument);
}

TEST_CASE("map_coeffs linear in the map") {
  Workspace unit({1.0, 1.0});
  SpectralBasis basis(unit, {4, 4});
  const InfoMap a = normalize_map(two_peak_map());
  const InfoMap b = normalize_map(uniform_grid_map(64));
  const double alpha = 0.35;

  // blend by sampling both densities onto a common grid
  const int res = 128;
  GridMap blended;
  blended.resolution = {res, res};
  blended.cells.resize(static_cast<size_t>(res) * res);
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      Eigen::Vector2d w((i + 0.5) / res, (j + 0.5) / res);
      blended.cells[static_cast<size_t>(i) * res + j] =
          alpha * a.density(w) + (1.0 - alpha) * b.density(w);
    }
  }
  // the blended grid samples both densities at the same cell centers, so
  // compare against coefficients of grid-sampled versions of a and b
  GridMap ga = blended, gb = blended;
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      Eigen::Vector2d w((i + 0.5) / res, (j + 0.5) / res);
      ga.cells[static_cast<size_t>(i) * res + j] = a.density(w);
      gb.cells[static_cast<size_t>(i) * res + j] = b.density(w);
    }
  }
  const CoeffVector cga = map_coeffs(InfoMap(unit, ga), basis, 129);
  const CoeffVector cgb = map_coeffs(InfoMap(unit, gb), basis, 129);
  const CoeffVector cblend = map_coeffs(InfoMap(unit, blended), basis, 129);
  for (int k = 0; k < basis.size(); ++k) {
    CHECK(cblend.values[k] ==
          doctest::Approx(alpha * cga.values[k] + (1.0 - alpha) * cgb.values[k])
              .epsilon(1e-9));
  }
}

TEST_CASE("reconstruct examples") {
  Workspace unit({1.0, 1.0});
  SpectralBasis basis(unit, {5, 5});
  const CoeffVector phi = map_coeffs(normalize_map(uniform_grid_map(64)), basis);
  const GridMap rec = reconstruct(phi, {32, 32});
  for (double v : rec.cells) CHECK(std::abs(v - 1.0) < 1e-6);

  CoeffVector zero;
  zero.basis = &basis;
  zero.values = Eigen::VectorXd::Zero(basis.size());
  for (double v : reconstruct(zero, {8, 8}).cells) CHECK(v == 0.0);

  CHECK_THROWS_AS(reconstruct(phi, {1, 8}), std::invalid_argument);
}

TEST_CASE("reconstruction error decreases with basis size") {
  Workspace unit({1.0, 1.0});
  const InfoMap map = normalize_map(two_peak_map());
  double prev = 1e100;
  for (int counts : {4, 7, 10}) {
    SpectralBasis basis(unit, {counts, counts});
    const GridMap rec = reconstruct(map_coeffs(map, basis), {64, 64});
    double err = 0.0;
    for (int i = 0; i < 64; ++i) {
      for (int j = 0; j < 64; ++j) {
        Eigen::Vector2d w((i + 0.5) / 64.0, (j + 0.5) / 64.0);
        const double d = rec.cells[static_cast<size_t>(i) * 64 + j] - map.density(w);
        err += d * d;
      }
    }
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("projection idempotence") {
  Workspace unit({1.0, 1.0});
  SpectralBasis basis(unit, {10, 10});
  std::mt19937_64 rng(21);
  GridMap g;
  g.resolution = {40, 40};
  g.cells.resize(1600);
  for (double& v : g.cells) v = oracles::uniform01(rng);
  const InfoMap map = normalize_map(InfoMap(unit, std::move(g)));
  const CoeffVector c1 = map_coeffs(map, basis);
  // re-project the truncated reconstruction
  const GridMap rec = reconstruct(c1, {200, 200});
  GridMap rec_grid = rec;  // may contain negative ringing; clip for InfoMap validity
  double min_v = 0.0;
  for (double v : rec_grid.cells) min_v = std::min(min_v, v);
  // shift instead of clipping so the spectrum moves only in the DC term
  for (double& v : rec_grid.cells) v -= min_v;
  const CoeffVector c2 = map_coeffs(InfoMap(unit, rec_grid), basis, 201);
  for (int k = 1; k < basis.size(); ++k) {
    CHECK(c2.values[k] == doctest::Approx(c1.values[k]).epsilon(5e-3).scale(1.0));
  }
}

TEST_CASE("serial reference matches parallel quadrature") {
  SpectralBasis basis(Workspace({1.0, 1.0}), {8, 8});
  const InfoMap map = normalize_map(two_peak_map());
  const CoeffVector par = map_coeffs(map, basis);
  const CoeffVector ser = ref::map_coeffs(map, basis);
  CHECK((par.values - ser.values).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
}
