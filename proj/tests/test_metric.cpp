#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "erg/metric.hpp"
#include "support/oracles.hpp"

using namespace erg;

namespace {

StateProjection drone_proj() {
  StateProjection p;
  p.position = {0, 1};
  p.height_index = 2;
  return p;
}

std::vector<Eigen::VectorXd> random_drone_states(std::mt19937_64& rng, int count) {
  std::vector<Eigen::VectorXd> states;
  for (int t = 0; t < count; ++t) {
    Eigen::VectorXd x(3);
    x << oracles::uniform(rng, 0.2, 0.8), oracles::uniform(rng, 0.2, 0.8),
        oracles::uniform(rng, 0.15, 0.5);
    states.push_back(x);
  }
  return states;
}

}  // namespace

TEST_CASE("point coefficients are time averages of basis values") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {6, 6});
  const StateProjection proj = drone_proj();
  std::mt19937_64 rng(5);
  const auto states = random_drone_states(rng, 9);

  const CoeffVector c = point_coeffs(states, 8, proj, basis);  // drops the last state
  for (int k = 0; k < basis.size(); ++k) {
    double want = 0.0;
    for (int t = 0; t < 8; ++t) want += basis.eval(k, proj.position_of(states[t]));
    CHECK(c.values[k] == doctest::Approx(want / 8.0).epsilon(1e-13));
  }
  CHECK(c.values[0] == doctest::Approx(1.0));  // DC term of any trajectory
}

TEST_CASE("footprint coefficients match a brute-force double sum") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {7, 7});
  const StateProjection proj = drone_proj();
  FootprintModel model;  // AltitudeDisk 5x5
  std::mt19937_64 rng(13);
  const auto states = random_drone_states(rng, 20);
  const SampleSet set = realize_samples(model, sample_pattern(model), states, 20, proj, ws);

  const CoeffVector c = footprint_coeffs(set, basis);
  for (int k = 0; k < basis.size(); ++k) {
    double want = 0.0;
    for (const auto& step : set.steps) {
      for (const auto& s : step) want += s.weight * basis.eval(k, s.w);
    }
    CHECK(c.values[k] == doctest::Approx(want / 20.0).epsilon(1e-12));
  }
}

TEST_CASE("point footprint reduces to the point statistics") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {5, 5});
  const StateProjection proj = drone_proj();
  FootprintModel point;
  point.kind = FootprintModel::Kind::Point;
  std::mt19937_64 rng(29);
  const auto states = random_drone_states(rng, 15);
  const SampleSet set =
      realize_samples(point, sample_pattern(point), states, 15, proj, ws);
  const CoeffVector cf = footprint_coeffs(set, basis);
  const CoeffVector cp = point_coeffs(states, 15, proj, basis);
  CHECK((cf.values - cp.values).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("empty steps renormalize the time average") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {4, 4});
  const StateProjection proj = drone_proj();
  FootprintModel model;
  std::mt19937_64 rng(31);
  const auto states = random_drone_states(rng, 10);
  SampleSet set = realize_samples(model, sample_pattern(model), states, 10, proj, ws);
  // drop three steps, as a surface sensor missing the target would
  set.steps[2].clear();
  set.steps[5].clear();
  set.steps[9].clear();
  CHECK(set.active_steps() == 7);

  const CoeffVector c = footprint_coeffs(set, basis);
  for (int k = 0; k < basis.size(); ++k) {
    double want = 0.0;
    for (const auto& step : set.steps) {
      for (const auto& s : step) want += s.weight * basis.eval(k, s.w);
    }
    CHECK(c.values[k] == doctest::Approx(want / 7.0).epsilon(1e-12));
  }

  SampleSet empty;
  empty.steps.resize(4);
  CHECK(footprint_coeffs(empty, basis).values.norm() == 0.0);
}

TEST_CASE("ergodicity examples") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {6, 6});
  CoeffVector c, phi;
  c.basis = phi.basis = &basis;
  std::mt19937_64 rng(37);
  c.values.resize(basis.size());
  phi.values.resize(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    c.values[k] = oracles::uniform(rng, -1.0, 1.0);
    phi.values[k] = oracles::uniform(rng, -1.0, 1.0);
  }
  CHECK(ergodicity(c, c) == 0.0);

  double want = 0.0;
  for (int k = 0; k < basis.size(); ++k) {
    const double d = c.values[k] - phi.values[k];
    want += coeff_weight(basis.index(k), 2) * d * d;
  }
  CHECK(ergodicity(c, phi) == doctest::Approx(want).epsilon(1e-14));
  CHECK(weighted_sq_distance(c, phi, Eigen::VectorXd::Ones(basis.size())) ==
        doctest::Approx((c.values - phi.values).squaredNorm()));

  SpectralBasis other(ws, {6, 6});
  CoeffVector mismatched;
  mismatched.basis = &other;
  mismatched.values = phi.values;
  CHECK_THROWS_AS(ergodicity(c, mismatched), std::invalid_argument);
}

TEST_CASE("metric gradient matches finite differences") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {6, 6});
  const StateProjection proj = drone_proj();
  FootprintModel model;
  const SamplePattern pattern = sample_pattern(model);
  std::mt19937_64 rng(41);
  auto states = random_drone_states(rng, 8);
  const int num_steps = 7;  // last state must receive zero gradient

  CoeffVector phi;
  phi.basis = &basis;
  phi.values = Eigen::VectorXd::Zero(basis.size());
  phi.values[0] = 1.0;  // uniform target

  auto metric_of = [&](const std::vector<Eigen::VectorXd>& st) {
    const SampleSet set = realize_samples(model, pattern, st, num_steps, proj, ws);
    return ergodicity(footprint_coeffs(set, basis), phi);
  };

  const SampleSet set = realize_samples(model, pattern, states, num_steps, proj, ws);
  REQUIRE(!set.any_clamped());
  const CoeffVector c = footprint_coeffs(set, basis);
  const Eigen::MatrixXd grad = metric_gradient(set, c, phi, 3);
  REQUIRE(grad.rows() == num_steps + 1);
  CHECK(grad.row(num_steps).norm() == 0.0);

  for (int t = 0; t < num_steps; ++t) {
    Eigen::VectorXd fd(3);
    for (int i = 0; i < 3; ++i) {
      auto bump = [&](double eps) {
        auto st = states;
        st[t][i] += eps;
        return metric_of(st);
      };
      fd[i] = (bump(1e-6) - bump(-1e-6)) / 2e-6;
    }
    CHECK(oracles::rel_err(grad.row(t).transpose(), fd) < 1e-6);
  }
}

TEST_CASE("footprint statistics converge to point statistics as the sensor shrinks") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {10, 10});
  const StateProjection proj = drone_proj();
  std::mt19937_64 rng(43);
  const auto states = random_drone_states(rng, 30);
  const CoeffVector cp = point_coeffs(states, 30, proj, basis);

  double prev = 1e100;
  for (double k_h : {0.2, 0.02, 0.002}) {
    FootprintModel model;
    model.k_h = k_h;
    const SampleSet set =
        realize_samples(model, sample_pattern(model), states, 30, proj, ws);
    const CoeffVector cf = footprint_coeffs(set, basis);
    const double gap = (cf.values - cp.values).lpNorm<Eigen::Infinity>();
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("terminal form reproduces the metric") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {8, 8});
  const StateProjection proj = drone_proj();
  FootprintModel model;
  std::mt19937_64 rng(47);
  const auto states = random_drone_states(rng, 25);
  const SampleSet set =
      realize_samples(model, sample_pattern(model), states, 25, proj, ws);

  CoeffVector phi;
  phi.basis = &basis;
  phi.values = Eigen::VectorXd::Zero(basis.size());
  phi.values[0] = 1.0;

  const double horizon = 2.5;
  const auto [s_final, value] = terminal_form_metric(set, phi, horizon);
  const CoeffVector c = footprint_coeffs(set, basis);
  CHECK((s_final - horizon * (c.values - phi.values)).lpNorm<Eigen::Infinity>() <
        1e-14);
  CHECK(value == doctest::Approx(ergodicity(c, phi)).epsilon(1e-12));
  CHECK_THROWS_AS(terminal_form_metric(set, phi, 0.0), std::invalid_argument);
}

TEST_CASE("multi-robot coefficients average per-robot spectra") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {5, 5});
  std::mt19937_64 rng(53);
  std::vector<CoeffVector> per_robot(3);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(basis.size());
  for (auto& c : per_robot) {
    c.basis = &basis;
    c.values.resize(basis.size());
    for (int k = 0; k < basis.size(); ++k) c.values[k] = oracles::uniform(rng, -1, 1);
    mean += c.values;
  }
  const CoeffVector combined = multi_robot_coeffs(per_robot);
  CHECK((combined.values - mean / 3.0).lpNorm<Eigen::Infinity>() < 1e-15);
  CHECK_THROWS_AS(multi_robot_coeffs({}), std::invalid_argument);
}

TEST_CASE("serial reference kernels agree bitwise with the parallel ones") {
  const Workspace ws({1.0, 1.0});
  SpectralBasis basis(ws, {10, 10});
  const StateProjection proj = drone_proj();
  FootprintModel model;
  std::mt19937_64 rng(59);
  const auto states = random_drone_states(rng, 100);
  const SampleSet set =
      realize_samples(model, sample_pattern(model), states, 100, proj, ws);

  const CoeffVector par = footprint_coeffs(set, basis);
  const CoeffVector ser = ref::footprint_coeffs(set, basis);
  CHECK((par.values - ser.values).lpNorm<Eigen::Infinity>() == 0.0);

  Eigen::VectorXd rho(basis.size());
  for (int k = 0; k < basis.size(); ++k) rho[k] = oracles::uniform(rng, -1, 1);
  const Eigen::MatrixXd gp = coeff_pullback(set, basis, rho, 3);
  const Eigen::MatrixXd gs = ref::coeff_pullback(set, basis, rho, 3);
  CHECK((gp - gs).lpNorm<Eigen::Infinity>() == 0.0);
}
