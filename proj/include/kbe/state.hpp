#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kbe/core.hpp"
#include "kbe/kgrid.hpp"

namespace kbe {

enum class Component : int { lesser = 0, greater = 1 };

inline constexpr Component other(Component c) {
  return c == Component::lesser ? Component::greater : Component::lesser;
}

/// Lesser and greater two-time functions X^{<,>}_jm(k; t_i, t_l) on a square
/// grid i, l = 0..capacity, for a contiguous block of k-points.
///
/// Used both for the Green's functions and for the self-energy history.
/// Storage is k-major with one Mat2 per (k, i, l); the trajectory file uses
/// its own band-major layout.
class TwoTimeFunction {
 public:
  TwoTimeFunction() = default;
  /// `k_offset` is the zero-based global index of the first local k-point.
  TwoTimeFunction(int n_k_local, int k_offset, int capacity, double dt);

  int n_k_local() const noexcept { return n_k_local_; }
  int k_offset() const noexcept { return k_offset_; }
  int capacity() const noexcept { return capacity_; }
  double dt() const noexcept { return dt_; }
  int frontier() const noexcept { return frontier_; }
  void set_frontier(int n);

  Mat2& at(Component c, int k, int i, int l) noexcept { return data(c)[offset(k, i, l)]; }
  const Mat2& at(Component c, int k, int i, int l) const noexcept { return data(c)[offset(k, i, l)]; }

  /// Contiguous run X(k; i, 0..capacity).
  std::span<const Mat2> row(Component c, int k, int i) const noexcept {
    return {data(c).data() + offset(k, i, 0), static_cast<std::size_t>(capacity_ + 1)};
  }

  std::vector<Mat2>& data(Component c) noexcept { return c == Component::lesser ? lesser_ : greater_; }
  const std::vector<Mat2>& data(Component c) const noexcept {
    return c == Component::lesser ? lesser_ : greater_;
  }

  std::size_t offset(int k, int i, int l) const noexcept {
    const auto n = static_cast<std::size_t>(capacity_ + 1);
    return (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(i)) * n + static_cast<std::size_t>(l);
  }

  static std::size_t bytes_for(int n_k, int capacity);

 private:
  int n_k_local_ = 0;
  int k_offset_ = 0;
  int capacity_ = 0;
  double dt_ = 0.0;
  int frontier_ = 0;
  std::vector<Mat2> lesser_;
  std::vector<Mat2> greater_;
};

using TwoTimeGF = TwoTimeFunction;

/// Default allocation ceiling for init_state (4 GiB).
inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{4} << 30;

/// Ground state at t = 0: filled valence band, empty conduction band,
///   G<_vv = i, G>_cc = -i, everything else zero.
/// Throws ContractViolation for n_steps < 1 or dt <= 0 and CapacityError when
/// the two-time storage would exceed `memory_budget` bytes.
TwoTimeGF init_state(const KGrid& grid, int n_steps, double dt,
                     std::size_t memory_budget = kDefaultMemoryBudget, int n_k_local = -1,
                     int k_offset = 0);

/// Fills the mirror images of the frontier row and column,
///   X(t_l, t_n) = -[X(t_n, t_l)]^dagger,
/// from the row X(t_n, .) for `from_row` components and from the column
/// X(., t_n) otherwise, and makes the diagonal entry anti-Hermitian.
void mirror_frontier(TwoTimeFunction& f, int n, Component c, bool from_row);
/// Both components: lesser from its row, greater from its column.
void mirror_frontier(TwoTimeFunction& f, int n);
void mirror_frontier(TwoTimeFunction& f);

/// Largest |X(t_i,t_l) + X(t_l,t_i)^dagger| over the filled square 0..frontier.
double symmetry_residual(const TwoTimeFunction& f);

struct Observables {
  double t = 0.0;
  std::vector<double> n_v;  // per local k
  std::vector<double> n_c;
  double mean_n_v = 0.0;
  double mean_n_c = 0.0;
  double density = 0.0;  // (1/n_k) sum_k (n_v + n_c)
};

Observables observables_at(const TwoTimeGF& g, int i);

/// max_k |G>(t,t) - G<(t,t) + i Id|.
double anticommutation_drift(const TwoTimeGF& g, int i);

/// Globally replicated frontier for the self-energy contraction:
///   row[c][s * n_k + k] = X^c(k; t_n, t_s),   col[c][s * n_k + k] = X^c(k; t_s, t_n)
/// for s = 0..n and all n_k k-points in global order.
struct FrontierSlice {
  int n = 0;
  int n_k = 0;
  std::vector<Mat2> row[2];
  std::vector<Mat2> col[2];

  void resize(int frontier, int nk);
  std::span<const Mat2> row_at(Component c, int s) const {
    return {row[static_cast<int>(c)].data() + static_cast<std::size_t>(s) * n_k, static_cast<std::size_t>(n_k)};
  }
  std::span<const Mat2> col_at(Component c, int s) const {
    return {col[static_cast<int>(c)].data() + static_cast<std::size_t>(s) * n_k, static_cast<std::size_t>(n_k)};
  }
};

/// Frontier slice of one shard's local k-range.
FrontierSlice frontier_of(const TwoTimeFunction& f, int n);

/// Concatenates per-shard frontier slices by global k order. Shards must
/// cover disjoint contiguous ranges; input order does not matter.
FrontierSlice gather(std::span<const TwoTimeFunction* const> shards, int n);
void gather_into(FrontierSlice& out, std::span<const TwoTimeFunction* const> shards, int n);

/// Splits a full-k function into `n_shards` contiguous blocks.
std::vector<TwoTimeFunction> scatter(const TwoTimeFunction& global, int n_shards);
/// Reassembles the full two-time data of all shards into one function.
TwoTimeFunction gather_full(std::span<const TwoTimeFunction* const> shards);

}  // namespace kbe
