#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "kbe/collision.hpp"
#include "kbe/engine.hpp"
#include "kbe/kgrid.hpp"
#include "kbe/model.hpp"
#include "kbe/selfenergy.hpp"
#include "kbe/state.hpp"

namespace kbe {

/// One-step propagator for the homogeneous part, Phi ~ exp(-i h dt).
/// `cayley` is the Crank-Nicolson form (1 + i h dt/2)^-1 (1 - i h dt/2);
/// `exponential` is the exact 2x2 matrix exponential.
enum class PropagatorMode { cayley, exponential };

std::string_view to_string(PropagatorMode m);
PropagatorMode parse_propagator(std::string_view s);

Mat2 step_operator(const Mat2& h, double dt, PropagatorMode mode);

struct StepConfig {
  double dt = 0.02;
  int n_steps = 1;
  double tolerance = 1e-9;
  int max_iter = 6;
  QuadratureKind quadrature = QuadratureKind::trapezoid;
  LimitMode limit = LimitMode::as_printed;
  PropagatorMode propagator = PropagatorMode::cayley;

  void validate() const;
};

struct StepReport {
  int step = 0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
  std::vector<double> residual_history;
  double anticommutation_drift = 0.0;
  double density = 0.0;
  double density_drift = 0.0;
  engine::KernelTimings timings;
};

/// Drives the two-time propagation over logical k-shards.
///
/// Every step advances G< along t (the row t_n), G> along t' (the column t'_n)
/// and both on the diagonal, then restores the conjugate symmetry. Shards own
/// contiguous k-blocks; the frontier is gathered into a replicated slice
/// before every self-energy evaluation.
class Propagator {
 public:
  Propagator(const KGrid& grid, const ModelConfig& model, const StepConfig& step, const engine::Schedule& schedule,
             std::size_t memory_budget = kDefaultMemoryBudget);

  int frontier() const noexcept { return frontier_; }
  int capacity() const noexcept { return capacity_; }

  /// Evaluates Sigma and I on the current frontier (inputs of the predictor).
  void prepare();
  /// Predictor half of a step: provisional row/column at frontier + 1.
  void predict();
  /// Corrector loop; stops when the frontier changes by at most `tolerance`
  /// or after `max_iter` sweeps. Non-convergence is reported, not thrown.
  StepReport correct();
  /// prepare + predict + correct + bookkeeping. Throws PoisonedStateError
  /// without touching the state when the current frontier holds NaN/Inf.
  StepReport step();

  Observables observables(int i) const;
  /// Full state in global k order.
  TwoTimeGF gathered() const;

  std::vector<TwoTimeGF>& shards() noexcept { return g_; }
  const std::vector<TwoTimeGF>& shards() const noexcept { return g_; }
  engine::Executor& executor() noexcept { return executor_; }

 private:
  std::vector<Mat2> density_matrix(int i) const;
  std::vector<Mat2> step_operators(const SingleParticleH& h_from, const SingleParticleH& h_to) const;
  void gather_frontier(int n);
  void update_frontier(int n, const std::vector<Mat2>& phi, bool corrector);
  double frontier_change(int n) const;
  void snapshot_frontier(int n);
  bool frontier_finite(int n) const;

  const KGrid& grid_;
  ModelConfig model_;
  StepConfig cfg_;
  engine::Schedule schedule_;
  BandEnergies bands_;
  engine::Executor executor_;
  SelfEnergyKernels kernels_;
  QuadratureTable rule_;
  int capacity_;
  int frontier_ = 0;
  double density0_ = 0.0;

  std::vector<TwoTimeGF> g_;
  std::vector<TwoTimeFunction> sigma_;
  std::vector<CollisionSlice> prev_;  // I at frontier n-1
  std::vector<CollisionSlice> cur_;   // I at frontier n
  std::vector<std::vector<Mat2>> cross_less_;   // I<(t_{n-1}, t_n) per local k
  std::vector<std::vector<Mat2>> cross_great_;  // I>(t_{n-1}, t_n)
  std::vector<std::vector<Mat2>> saved_;  // frontier snapshot for the residual
  FrontierSlice frontier_slice_;
};

struct RunOptions {
  int n_k = 8;
  ModelConfig model;
  StepConfig step;
  engine::Schedule schedule;
  std::size_t memory_budget = kDefaultMemoryBudget;
};

struct RunResult {
  TwoTimeGF trajectory;
  std::vector<Observables> observables;  // one per time point 0..n_steps
  std::vector<StepReport> reports;        // one per step
};

/// Called after the initial state (report == nullptr) and after every step.
using StepSink = std::function<void(const Observables&, const StepReport*)>;

RunResult run(const RunOptions& options, const StepSink& sink = {});

}  // namespace kbe
