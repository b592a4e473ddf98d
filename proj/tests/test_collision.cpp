#include <numeric>

#include "doctest.h"
#include "kbe/collision.hpp"
#include "support.hpp"

using namespace kbe;

TEST_CASE("quadrature weights") {
  CHECK(quadrature_weights(0, 0.1, QuadratureKind::trapezoid) == std::vector<double>{0.0});
  const auto w = quadrature_weights(5, 0.1, QuadratureKind::trapezoid);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  // Degree-1 exactness on [0, 1].
  const auto w10 = quadrature_weights(10, 0.1, QuadratureKind::trapezoid);
  double lin = 0.0;
  for (int i = 0; i <= 10; ++i) lin += w10[i] * (0.1 * i);
  CHECK(std::abs(lin - 0.5) <= 1e-14);
  for (int n : {2, 4, 8, 3, 7}) {
    const double dt = 1.0 / n;
    const auto s = quadrature_weights(n, dt, QuadratureKind::simpson);
    CHECK(std::accumulate(s.begin(), s.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    if (n % 2 == 0) {
      double cubic = 0.0;
      for (int i = 0; i <= n; ++i) cubic += s[i] * std::pow(i * dt, 3);
      CHECK(std::abs(cubic - 0.25) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(quadrature_weights(-1, 0.1, QuadratureKind::trapezoid), ContractViolation);
}

TEST_CASE("collision matches weighted-sum oracle") {
  std::mt19937_64 rng(21);
  TwoTimeFunction g(2, 0, 4, 0.1), s(2, 0, 4, 0.1);
  oracle::fill_random(g, 4, rng);
  oracle::fill_random(s, 4, rng);
  const QuadratureTable rule(4, 0.1, QuadratureKind::trapezoid);
  for (LimitMode mode : {LimitMode::as_printed, LimitMode::langreth}) {
    const bool lr = mode == LimitMode::langreth;
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i <= 4; ++i)
        for (int l = 0; l <= 4; ++l) {
          const Mat2 lo = oracle::naive_collision(g, s, k, i, l, 0.1, false, lr);
          const Mat2 go = oracle::naive_collision(g, s, k, i, l, 0.1, true, lr);
          CHECK(max_abs(collision_lesser(g, s, k, i, l, rule, mode) - lo) <= 1e-13);
          CHECK(max_abs(collision_greater(g, s, k, i, l, rule, mode) - go) <= 1e-13);
        }
  }
  CHECK(max_abs(collision_lesser(g, s, 0, 0, 3, rule, LimitMode::as_printed)) == 0.0);
  CHECK(max_abs(collision_greater(g, s, 1, 0, 2, rule, LimitMode::as_printed)) == 0.0);
  CHECK_THROWS_AS(collision_lesser(g, s, 2, 1, 1, rule, LimitMode::as_printed), ContractViolation);
  CHECK_THROWS_AS(collision_lesser(g, s, 0, 5, 1, rule, LimitMode::as_printed), ContractViolation);
}

TEST_CASE("collision is zero for zero self-energy and linear in it") {
  std::mt19937_64 rng(8);
  TwoTimeFunction g(2, 0, 3, 0.1), s(2, 0, 3, 0.1), zero(2, 0, 3, 0.1);
  oracle::fill_random(g, 3, rng);
  oracle::fill_random(s, 3, rng);
  const QuadratureTable rule(3, 0.1, QuadratureKind::trapezoid);
  CHECK(max_abs(collision_lesser(g, zero, 1, 3, 2, rule, LimitMode::as_printed)) == 0.0);
  CHECK(max_abs(collision_greater(g, zero, 1, 3, 2, rule, LimitMode::langreth)) == 0.0);

  const cplx c{0.3, -1.7};
  TwoTimeFunction sc = s;
  for (auto comp : {Component::lesser, Component::greater})
    for (auto& m : sc.data(comp)) m = m * c;
  for (int i = 0; i <= 3; ++i)
    for (int l = 0; l <= 3; ++l) {
      const Mat2 a = collision_lesser(g, s, 0, i, l, rule, LimitMode::as_printed) * c;
      const Mat2 b = collision_lesser(g, sc, 0, i, l, rule, LimitMode::as_printed);
      CHECK(max_abs(a - b) <= 1e-15 * std::max(1.0, max_abs(a)) * 16);
    }
}

TEST_CASE("frontier collision batched equals looped") {
  for (int nt : {1, 2, 8, 16}) {
    const int n = nt - 1;
    std::mt19937_64 rng(nt);
    TwoTimeFunction g(4, 0, std::max(n, 1), 0.05), s(4, 0, std::max(n, 1), 0.05);
    oracle::fill_random(g, n, rng);
    oracle::fill_random(s, n, rng);
    const QuadratureTable rule(std::max(n, 1), 0.05, QuadratureKind::simpson);
    const auto ref = collision_frontier_looped(g, s, n, rule, LimitMode::langreth);
    for (bool batch : {true, false})
      for (int w : {1, 2}) {
        engine::Schedule sch;
        sch.batch_enabled = batch;
        sch.workers = w;
        engine::Executor ex(sch);
        CollisionSlice out;
        collision_frontier(g, s, n, rule, LimitMode::langreth, ex, out);
        CHECK(oracle::rel_err(out.lesser_row, ref.lesser_row) <= 1e-12);
        CHECK(oracle::rel_err(out.greater_col, ref.greater_col) <= 1e-12);
      }
    // Greater entries hold the t'-source -[I>(t_n, t_j)]^dagger.
    for (int j = 0; j <= n; ++j)
      CHECK(ref.greater(2, j) == -adjoint(collision_greater(g, s, 2, n, j, rule, LimitMode::langreth)));
  }
}
