#pragma once

#include <string_view>
#include <vector>

#include "kbe/engine.hpp"
#include "kbe/state.hpp"

namespace kbe {

enum class QuadratureKind { trapezoid, simpson };

/// Upper limit of the second history integral: `as_printed` integrates both
/// terms to t, `langreth` stops the second one at t'.
enum class LimitMode { as_printed, langreth };

std::string_view to_string(QuadratureKind k);
std::string_view to_string(LimitMode m);
QuadratureKind parse_quadrature(std::string_view s);
LimitMode parse_limit_mode(std::string_view s);

/// Weights of an n-interval rule on n+1 uniformly spaced points.
/// Trapezoid: dt {1/2, 1, ..., 1, 1/2}. Simpson: composite Simpson for even n;
/// for odd n a trapezoid panel on the first interval followed by Simpson on the
/// rest. n = 0 gives the single weight 0. Weights always sum to n * dt.
std::vector<double> quadrature_weights(int n, double dt, QuadratureKind kind);

/// Weight vectors for every interval count 0..max_n, built once per run.
class QuadratureTable {
 public:
  QuadratureTable() = default;
  QuadratureTable(int max_n, double dt, QuadratureKind kind);

  int max_n() const noexcept { return static_cast<int>(weights_.size()) - 1; }
  QuadratureKind kind() const noexcept { return kind_; }
  const std::vector<double>& operator[](int n) const { return weights_.at(static_cast<std::size_t>(n)); }

 private:
  QuadratureKind kind_ = QuadratureKind::trapezoid;
  std::vector<std::vector<double>> weights_;
};

/// History integral for the lesser component at local k and (t_i, t'_l):
///   I<(i,l) = Q_{0..i}[(G>(i,.) - G<(i,.)) S<(., l)]
///           + Q_{0..U}[G<(i,.) (S<(., l) - S>(., l))]
/// with U = i (as printed) or U = l (langreth). 2x2 products in band space.
Mat2 collision_lesser(const TwoTimeGF& g, const TwoTimeFunction& sigma, int k, int i, int l,
                      const QuadratureTable& rule, LimitMode limit);

/// Greater counterpart: S> in the first term and G> in the second.
Mat2 collision_greater(const TwoTimeGF& g, const TwoTimeFunction& sigma, int k, int i, int l,
                       const QuadratureTable& rule, LimitMode limit);

/// Collision integrals along the frontier n:
///   lesser_row[k * (n+1) + l]  = I<(t_n, t'_l),             l = 0..n
///   greater_col[k * (n+1) + j] = -[I>(t_n, t'_j)]^dagger,   j = 0..n
/// The greater entries are the source of the t'-equation for G>(t_j, t'_n).
struct CollisionSlice {
  int n = 0;
  int n_k_local = 0;
  std::vector<Mat2> lesser_row;
  std::vector<Mat2> greater_col;

  void resize(int frontier, int nk);
  Mat2& lesser(int k, int l) { return lesser_row[static_cast<std::size_t>(k) * (n + 1) + l]; }
  const Mat2& lesser(int k, int l) const { return lesser_row[static_cast<std::size_t>(k) * (n + 1) + l]; }
  Mat2& greater(int k, int j) { return greater_col[static_cast<std::size_t>(k) * (n + 1) + j]; }
  const Mat2& greater(int k, int j) const { return greater_col[static_cast<std::size_t>(k) * (n + 1) + j]; }
};

/// Every frontier pair of one shard in a single data-parallel pass. When the
/// schedule disables batching the pairs are dispatched one pass at a time.
void collision_frontier(const TwoTimeGF& g, const TwoTimeFunction& sigma, int n, const QuadratureTable& rule,
                        LimitMode limit, engine::Executor& executor, CollisionSlice& out);

/// Reference path: direct per-pair calls, no executor.
CollisionSlice collision_frontier_looped(const TwoTimeGF& g, const TwoTimeFunction& sigma, int n,
                                         const QuadratureTable& rule, LimitMode limit);

}  // namespace kbe
