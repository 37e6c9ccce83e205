// Compares the OpenMP coefficient/gradient kernels against the serial
// reference implementations on a representative workload.

#include <benchmark/benchmark.h>

#include <random>

#include "erg/infomap.hpp"
#include "erg/metric.hpp"

using namespace erg;

namespace {

struct Workload {
  Workspace ws{std::vector<double>{1.0, 1.0}};
  SpectralBasis basis{ws, {10, 10}};
  SampleSet samples;
  Eigen::VectorXd rho;

  Workload() {
    StateProjection proj;
    proj.position = {0, 1};
    proj.height_index = 2;
    FootprintModel model;  // AltitudeDisk, 25 samples
    std::mt19937_64 rng(5);
    auto u = [&](double lo, double hi) {
      return lo + (hi - lo) * static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    };
    std::vector<Eigen::VectorXd> states;
    for (int t = 0; t < 500; ++t) {
      Eigen::VectorXd x(3);
      x << u(0.2, 0.8), u(0.2, 0.8), u(0.15, 0.5);
      states.push_back(x);
    }
    samples = realize_samples(model, sample_pattern(model), states, 500, proj, ws);
    rho.resize(basis.size());
    for (int k = 0; k < basis.size(); ++k) rho[k] = u(-1.0, 1.0);
  }
};

const Workload& workload() {
  static Workload w;
  return w;
}

InfoMap bench_map() {
  GaussianMixture gmm;
  gmm.components.push_back({0.6, Eigen::Vector2d(0.3, 0.4), Eigen::Vector2d(0.15, 0.15)});
  gmm.components.push_back({0.4, Eigen::Vector2d(0.7, 0.7), Eigen::Vector2d(0.05, 0.05)});
  return normalize_map(InfoMap(Workspace({1.0, 1.0}), std::move(gmm)));
}

void BM_footprint_coeffs_parallel(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(footprint_coeffs(w.samples, w.basis));
  }
}

void BM_footprint_coeffs_serial(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref::footprint_coeffs(w.samples, w.basis));
  }
}

void BM_coeff_pullback_parallel(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(coeff_pullback(w.samples, w.basis, w.rho, 3));
  }
}

void BM_coeff_pullback_serial(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref::coeff_pullback(w.samples, w.basis, w.rho, 3));
  }
}

void BM_map_coeffs_parallel(benchmark::State& state) {
  const InfoMap map = bench_map();
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(map_coeffs(map, w.basis));
  }
}

void BM_map_coeffs_serial(benchmark::State& state) {
  const InfoMap map = bench_map();
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref::map_coeffs(map, w.basis));
  }
}

BENCHMARK(BM_footprint_coeffs_parallel);
BENCHMARK(BM_footprint_coeffs_serial);
BENCHMARK(BM_coeff_pullback_parallel);
BENCHMARK(BM_coeff_pullback_serial);
BENCHMARK(BM_map_coeffs_parallel);
BENCHMARK(BM_map_coeffs_serial);

}  // namespace

BENCHMARK_MAIN();
