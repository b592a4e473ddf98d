#pragma once

#include <vector>

#include "kbe/core.hpp"

namespace kbe {

/// Uniform sampling of the 1D Brillouin zone,
///   k_j = -pi + 2 (j - 1) pi / n_k,   j = 1..n_k.
/// k-indices in this interface are one-based. Kernels that address storage
/// directly use the zero-based `*_index0` forms below.
class KGrid {
 public:
  /// Throws ConfigError unless n_k is positive and even.
  explicit KGrid(int n_k);

  int size() const noexcept { return n_k_; }
  /// Momentum of one-based index j.
  double k(int j) const;
  const std::vector<double>& values() const noexcept { return k_values_; }

 private:
  int n_k_;
  std::vector<double> k_values_;
};

KGrid build_kgrid(int n_k);

/// Index j with k_j == k_j1 + k_j2 (mod 2 pi). One-based; closed form, no tables.
int index_of_sum(int j1, int j2, int n_k);
/// Index j with k_j == k_j1 - k_j2 (mod 2 pi). One-based; closed form, no tables.
int index_of_diff(int j1, int j2, int n_k);

// Zero-based variants used by the contraction kernels. No range checks.
inline int sum_index0(int a, int b, int n_k) noexcept {
  // With one-based j = a + 1: the raw sum lies below -pi iff a + b < n_k/2 and
  // at or above pi iff a + b >= 3 n_k/2.
  const int half = n_k / 2;
  const int s = a + b;
  if (s < half) return s + half;
  if (s < 3 * half) return s - half;
  return s - 3 * half;
}

inline int diff_index0(int a, int b, int n_k) noexcept {
  const int half = n_k / 2;
  const int d = a - b;
  if (d < -half) return d + half + n_k;
  if (d < half) return d + half;
  return d + half - n_k;
}

/// Precomputed sum/difference tables (the lookup index mode). Entries are
/// one-based and agree pointwise with index_of_sum / index_of_diff.
class IndexTables {
 public:
  explicit IndexTables(const KGrid& grid);

  int n_k() const noexcept { return n_k_; }
  int sum(int j1, int j2) const;
  int diff(int j1, int j2) const;
  // Zero-based views for kernels.
  int sum0(int a, int b) const noexcept { return sum_[static_cast<std::size_t>(a) * n_k_ + b]; }
  int diff0(int a, int b) const noexcept { return diff_[static_cast<std::size_t>(a) * n_k_ + b]; }

 private:
  int n_k_;
  std::vector<int> sum_;   // zero-based entries
  std::vector<int> diff_;  // zero-based entries
};

IndexTables build_index_tables(const KGrid& grid);

}  // namespace kbe
