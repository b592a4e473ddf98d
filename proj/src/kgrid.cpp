#include "kbe/kgrid.hpp"

#include <numbers>
#include <string>

namespace kbe {

namespace {

void check_pair(int j1, int j2, int n_k) {
  if (n_k < 2 || n_k % 2 != 0) throw ContractViolation("n_k must be positive and even");
  if (j1 < 1 || j1 > n_k || j2 < 1 || j2 > n_k)
    throw ContractViolation("k-index out of range 1.." + std::to_string(n_k) + ": (" +
                            std::to_string(j1) + ", " + std::to_string(j2) + ")");
}

}  // namespace

KGrid::KGrid(int n_k) : n_k_(n_k) {
  if (n_k < 2 || n_k % 2 != 0)
    throw ConfigError("n_k must be a positive even integer, got " + std::to_string(n_k), "n_k");
  k_values_.resize(static_cast<std::size_t>(n_k));
  for (int j = 1; j <= n_k; ++j) {
    // Integer numerator keeps k at j = n_k/2 + 1 exactly zero.
    const int num = 2 * (j - 1) - n_k;
    k_values_[static_cast<std::size_t>(j - 1)] = std::numbers::pi * num / n_k;
  }
}

double KGrid::k(int j) const {
  if (j < 1 || j > n_k_) throw ContractViolation("k-index out of range");
  return k_values_[static_cast<std::size_t>(j - 1)];
}

KGrid build_kgrid(int n_k) { return KGrid(n_k); }

int index_of_sum(int j1, int j2, int n_k) {
  check_pair(j1, j2, n_k);
  return sum_index0(j1 - 1, j2 - 1, n_k) + 1;
}

int index_of_diff(int j1, int j2, int n_k) {
  check_pair(j1, j2, n_k);
  return diff_index0(j1 - 1, j2 - 1, n_k) + 1;
}

IndexTables::IndexTables(const KGrid& grid) : n_k_(grid.size()) {
  const auto n = static_cast<std::size_t>(n_k_);
  sum_.resize(n * n);
  diff_.resize(n * n);
  for (int a = 0; a < n_k_; ++a) {
    for (int b = 0; b < n_k_; ++b) {
      sum_[a * n + b] = sum_index0(a, b, n_k_);
      diff_[a * n + b] = diff_index0(a, b, n_k_);
    }
  }
}

int IndexTables::sum(int j1, int j2) const {
  check_pair(j1, j2, n_k_);
  return sum0(j1 - 1, j2 - 1) + 1;
}

int IndexTables::diff(int j1, int j2) const {
  check_pair(j1, j2, n_k_);
  return diff0(j1 - 1, j2 - 1) + 1;
}

IndexTables build_index_tables(const KGrid& grid) { return IndexTables(grid); }

}  // namespace kbe
