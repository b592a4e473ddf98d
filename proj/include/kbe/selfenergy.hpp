#pragma once

#include <span>
#include <vector>

#include "kbe/engine.hpp"
#include "kbe/kgrid.hpp"
#include "kbe/model.hpp"
#include "kbe/state.hpp"

namespace kbe {

/// Zero-based time pair (t_i, t'_l).
struct TimePair {
  int t = 0;
  int tp = 0;
  friend bool operator==(const TimePair&, const TimePair&) = default;
};

/// The 2n+1 pairs touched at frontier n: column pairs (s, n) for s < n, row
/// pairs (n, s) for s < n, then the diagonal (n, n).
std::vector<TimePair> frontier_pairs(int n);

/// Inputs of one second-Born contraction:
///   a[k] = X^c(k; t, t'),   b[k] = X^{c'}(k; t', t)   over all n_k points,
/// where c is the component being computed and c' the opposite one.
struct SigmaInput {
  std::span<const Mat2> a;
  std::span<const Mat2> b;
  double u_t = 0.0;
  double u_tp = 0.0;
};

/// P_jm(q) per input, [input][q].
struct PolarizationSlice {
  int n_k = 0;
  std::vector<Mat2> values;
  std::span<const Mat2> of(std::size_t input) const {
    return {values.data() + input * static_cast<std::size_t>(n_k), static_cast<std::size_t>(n_k)};
  }
};

/// Self-energy values on a local k-range, [input][k_local].
struct SelfEnergySlice {
  engine::ShardRange range;
  std::vector<Mat2> values;
  std::span<const Mat2> of(std::size_t input) const {
    return {values.data() + input * static_cast<std::size_t>(range.k_count), static_cast<std::size_t>(range.k_count)};
  }
};

/// Second-Born contraction kernels on top of an engine::Executor.
///
///   P_jm(q)     = sum_k' a_jm(k'+q) b_mj(k')
///   S1_jm(k)    = U U'/n_k^2 sum_q P_{~j~m}(q) a_jm(k-q)
///   S2_jm(k)    = U U'/n_k^2 sum_{q,k'} a_{j~m}(k') b_{~m~j}(k'+q-k) a_{~j m}(q)
///   Sigma_jm(k) = S1 - S2
///
/// with ~j = 1 - j (band flip). Each output element is a work item whose inner
/// sum is chunked and reduced per the executor's schedule.
class SelfEnergyKernels {
 public:
  SelfEnergyKernels(const KGrid& grid, engine::Executor& executor);

  const KGrid& grid() const noexcept { return grid_; }
  engine::Executor& executor() noexcept { return executor_; }

  /// out[input * n_k + q]. Throws ContractViolation on shape mismatch.
  void polarizability(std::span<const SigmaInput> inputs, std::span<Mat2> out);
  /// out[input * k_count + k_local], prefactor included.
  void sigma_first(std::span<const SigmaInput> inputs, std::span<const Mat2> polarization,
                   engine::ShardRange range, std::span<Mat2> out);
  /// out[input * k_count + k_local], prefactor included. O(n_k^2) per element.
  void sigma_second(std::span<const SigmaInput> inputs, engine::ShardRange range, std::span<Mat2> out);

  /// Full pipeline for a group of inputs: P, S1, S2 and out = S1 - S2.
  void evaluate(std::span<const SigmaInput> inputs, engine::ShardRange range, std::span<Mat2> out);

 private:
  void check(std::span<const SigmaInput> inputs) const;

  const KGrid& grid_;
  engine::Executor& executor_;
  IndexTables tables_;
  // Hoisted scratch, grown on demand and reused across calls.
  std::vector<Mat2> p_buf_;
  std::vector<Mat2> s1_buf_;
  std::vector<Mat2> s2_buf_;
};

// Single-shot conveniences over one contraction input (default schedule).
PolarizationSlice polarizability(const SigmaInput& input, const KGrid& grid,
                                 const engine::Schedule& schedule = {});
SelfEnergySlice sigma_first(const PolarizationSlice& p, const SigmaInput& input, const KGrid& grid,
                            engine::ShardRange range, const engine::Schedule& schedule = {});
SelfEnergySlice sigma_second(const SigmaInput& input, const KGrid& grid, engine::ShardRange range,
                             const engine::Schedule& schedule = {});
/// Sigma = S1 - S2, entrywise.
SelfEnergySlice assemble_sigma(const SelfEnergySlice& s1, const SelfEnergySlice& s2);

/// Contraction inputs for `pair` and component `c` from a replicated frontier.
SigmaInput sigma_input(const FrontierSlice& frontier, TimePair pair, Component c, const ModelConfig& model);

/// Evaluates Sigma^{<,>} at every frontier pair of `frontier.n` for the shard
/// owning `sigma`'s k-range and stores the values into `sigma`. Batching is
/// controlled by the executor's schedule (one pass per pair when disabled).
void evaluate_sigma_batched(TwoTimeFunction& sigma, const FrontierSlice& frontier, const ModelConfig& model,
                            SelfEnergyKernels& kernels);

/// Reference path: one pipeline invocation per (pair, component).
void evaluate_sigma_looped(TwoTimeFunction& sigma, const FrontierSlice& frontier, const ModelConfig& model,
                           SelfEnergyKernels& kernels);

}  // namespace kbe
