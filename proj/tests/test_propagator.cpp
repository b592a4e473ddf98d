#include <cstring>
#include <limits>

#include "doctest.h"
#include "kbe/propagator.hpp"
#include "support.hpp"

using namespace kbe;

namespace {

RunOptions free_run(int n_k, int steps, double dt) {
  RunOptions o;
  o.n_k = n_k;
  o.step.n_steps = steps;
  o.step.dt = dt;
  return o;
}

RunOptions pulse_run(int n_k, int steps) {
  RunOptions o = free_run(n_k, steps, 0.02);
  o.model.u_constant = 0.5;
  o.model.pulse_intensity = 0.3;
  o.model.pulse_center = 0.1;
  return o;
}

bool same_bytes(const std::vector<Mat2>& a, const std::vector<Mat2>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(Mat2)) == 0;
}

}  // namespace

TEST_CASE("step operators") {
  const Mat2 h = Mat2::diag(-1.5, 2.0);
  const double dt = 0.05;
  const Mat2 e = step_operator(h, dt, PropagatorMode::exponential);
  CHECK(std::abs(e(0, 0) - std::exp(cplx{0.0, 1.5 * dt})) < 1e-15);
  CHECK(std::abs(e(1, 1) - std::exp(cplx{0.0, -2.0 * dt})) < 1e-15);
  CHECK(std::abs(e(0, 1)) == 0.0);
  Mat2 g = h;
  g(0, 1) = cplx{0.3, 0.4};
  g(1, 0) = cplx{0.3, -0.4};
  for (auto mode : {PropagatorMode::cayley, PropagatorMode::exponential}) {
    const Mat2 p = step_operator(g, dt, mode);
    CHECK(max_abs(p * adjoint(p) - Mat2::identity()) < 1e-14);
    CHECK(max_abs(step_operator(g, 1e-12, mode) - Mat2::identity()) < 1e-11);
  }
  // Cayley agrees with the exponential to third order per step.
  const Mat2 d = step_operator(g, dt, PropagatorMode::cayley) - step_operator(g, dt, PropagatorMode::exponential);
  CHECK(max_abs(d) < 1e-4);
  CHECK_THROWS_AS(parse_propagator("rk4"), ConfigError);
}

TEST_CASE("free single step keeps occupations and rotates phases") {
  const auto r = run(free_run(8, 1, 0.02));
  const auto& g = r.trajectory;
  REQUIRE(r.reports.size() == 1);
  CHECK(r.reports[0].iterations == 1);
  CHECK(r.reports[0].converged);
  const KGrid grid(8);
  const auto bands = band_energies(ModelConfig{}, grid);
  for (int k = 0; k < 8; ++k) {
    CHECK(std::abs(r.observables[1].n_v[k] - 1.0) <= 1e-12);
    CHECK(std::abs(r.observables[1].n_c[k]) <= 1e-12);
    const cplx exact = kI * std::exp(cplx{0.0, -bands.valence[k] * 0.02});
    // Cayley phase error per step is (eps dt)^3 / 12.
    CHECK(std::abs(g.at(Component::lesser, k, 1, 0)(0, 0) - exact) < 1e-4);
  }
  auto o = free_run(8, 1, 0.02);
  o.step.propagator = PropagatorMode::exponential;
  const auto e = run(o).trajectory;
  for (int k = 0; k < 8; ++k) {
    const cplx exact = kI * std::exp(cplx{0.0, -bands.valence[k] * 0.02});
    CHECK(std::abs(e.at(Component::lesser, k, 1, 0)(0, 0) - exact) < 1e-14);
  }
  CHECK(symmetry_residual(g) == 0.0);
}

TEST_CASE("corrector loop exit conditions") {
  auto o = pulse_run(8, 12);
  o.step.tolerance = 1e10;
  for (const auto& rep : run(o).reports) CHECK(rep.iterations == 1);
  o.step.tolerance = 1e-300;
  o.step.max_iter = 3;
  const auto r = run(o);
  bool contracted = false;
  for (const auto& rep : r.reports) {
    CHECK(rep.iterations <= 3);
    CHECK(rep.converged == (rep.residual <= o.step.tolerance));
    if (rep.residual_history.size() >= 2 && rep.residual_history[0] > 0.0) {
      contracted = contracted || rep.residual_history[1] < rep.residual_history[0];
    }
  }
  CHECK(contracted);
}

TEST_CASE("pulse moves population into the conduction band") {
  const auto r = run(pulse_run(8, 10));
  const int p = 5;
  double before = 0.0, after = 0.0;
  for (int k = 0; k < 8; ++k) {
    before = std::max(before, r.observables[p - 1].n_c[k]);
    after = std::max(after, r.observables[p].n_c[k]);
  }
  CHECK(before < 1e-12);
  CHECK(after > 1e-3);
  for (const auto& rep : r.reports) {
    CHECK(rep.density_drift < 1e-10);
    CHECK(rep.anticommutation_drift < 1e-10);
  }
}

TEST_CASE("runs are deterministic and shard invariant") {
  auto o = pulse_run(8, 8);
  const auto a = run(o);
  const auto b = run(o);
  CHECK(same_bytes(a.trajectory.data(Component::lesser), b.trajectory.data(Component::lesser)));
  CHECK(same_bytes(a.trajectory.data(Component::greater), b.trajectory.data(Component::greater)));
  for (int shards : {2, 4}) {
    o.schedule.n_shards = shards;
    o.schedule.workers = 2;
    const auto c = run(o);
    for (auto comp : {Component::lesser, Component::greater})
      CHECK(oracle::rel_err(c.trajectory.data(comp), a.trajectory.data(comp)) <= 1e-10);
  }
}

TEST_CASE("poisoned state is rejected untouched") {
  const KGrid grid(4);
  Propagator p(grid, ModelConfig{}, StepConfig{0.02, 3}, engine::Schedule{});
  p.step();
  auto& g = p.shards()[0];
  g.at(Component::lesser, 2, 1, 0)(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const auto less = g.data(Component::lesser);
  const auto great = g.data(Component::greater);
  CHECK_THROWS_AS(p.step(), PoisonedStateError);
  CHECK(p.frontier() == 1);
  CHECK(same_bytes(g.data(Component::lesser), less));
  CHECK(same_bytes(g.data(Component::greater), great));
}

TEST_CASE("capacity and configuration errors") {
  const KGrid grid(4);
  Propagator p(grid, ModelConfig{}, StepConfig{0.02, 1}, engine::Schedule{});
  p.step();
  CHECK_THROWS_AS(p.step(), CapacityError);
  CHECK_THROWS_AS(Propagator(grid, ModelConfig{}, StepConfig{0.02, 1000}, engine::Schedule{}, 4096), CapacityError);
  CHECK_THROWS_AS(Propagator(grid, ModelConfig{}, StepConfig{-1.0, 2}, engine::Schedule{}), ConfigError);
  StepConfig bad{0.02, 2};
  bad.max_iter = 0;
  CHECK_THROWS_AS(Propagator(grid, ModelConfig{}, bad, engine::Schedule{}), ConfigError);
}

TEST_CASE("zero steps yields the initial observables only") {
  const auto r = run(free_run(4, 0, 0.02));
  CHECK(r.observables.size() == 1);
  CHECK(r.reports.empty());
  CHECK(r.trajectory.frontier() == 0);
}

TEST_CASE("variants stay conserving") {
  for (int variant = 0; variant < 4; ++variant) {
    auto o = pulse_run(8, 10);
    if (variant == 0) o.step.propagator = PropagatorMode::exponential;
    if (variant == 1) o.step.quadrature = QuadratureKind::simpson;
    if (variant == 2) o.step.limit = LimitMode::langreth;
    if (variant == 3) o.model.hf_mode = HfMode::on;
    const auto r = run(o);
    for (const auto& rep : r.reports) CHECK_MESSAGE(rep.density_drift < 1e-6, "variant " << variant);
    CHECK(r.observables.back().mean_n_c > 1e-3);
  }
}
