#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "kbe/collision.hpp"
#include "kbe/kgrid.hpp"
#include "kbe/state.hpp"

namespace oracle {

using kbe::cplx;
using kbe::Mat2;

// One-based index whose momentum equals k (mod 2 pi), found by linear search.
inline int find_k(const kbe::KGrid& grid, double k) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(k + std::numbers::pi, two_pi);
  if (w < 0) w += two_pi;
  w -= std::numbers::pi;
  for (int j = 1; j <= grid.size(); ++j) {
    double d = std::abs(grid.k(j) - w);
    d = std::min(d, two_pi - d);
    if (d < 1e-9) return j;
  }
  return -1;
}

inline int sum_of(const kbe::KGrid& g, int j1, int j2) { return find_k(g, g.k(j1) + g.k(j2)); }
inline int diff_of(const kbe::KGrid& g, int j1, int j2) { return find_k(g, g.k(j1) - g.k(j2)); }

inline Mat2 random_mat(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat2 m;
  for (auto& z : m.a) z = cplx{nd(rng), nd(rng)};
  return m;
}

inline std::vector<Mat2> random_mats(std::size_t n, std::mt19937_64& rng) {
  std::vector<Mat2> v(n);
  for (auto& m : v) m = random_mat(rng);
  return v;
}

// Fills the square 0..n of both components with random blocks.
inline void fill_random(kbe::TwoTimeFunction& f, int n, std::mt19937_64& rng) {
  for (auto c : {kbe::Component::lesser, kbe::Component::greater})
    for (int k = 0; k < f.n_k_local(); ++k)
      for (int i = 0; i <= n; ++i)
        for (int l = 0; l <= n; ++l) f.at(c, k, i, l) = random_mat(rng);
  f.set_frontier(n);
}

// Triple-sum first term without the polarizability factorization.
inline std::vector<Mat2> naive_sigma_first(const kbe::KGrid& grid, std::span<const Mat2> a, std::span<const Mat2> b,
                                           double u, double up) {
  const int n = grid.size();
  std::vector<Mat2> out(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    Mat2 s;
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m < 2; ++m) {
        cplx acc{};
        for (int q = 1; q <= n; ++q)
          for (int kp = 1; kp <= n; ++kp) {
            const cplx p = a[sum_of(grid, kp, q) - 1](1 - j, 1 - m) * b[kp - 1](1 - m, 1 - j);
            acc += p * a[diff_of(grid, k, q) - 1](j, m);
          }
        s(j, m) = acc * (u * up / (double(n) * n));
      }
    out[k - 1] = s;
  }
  return out;
}

inline std::vector<Mat2> naive_sigma_second(const kbe::KGrid& grid, std::span<const Mat2> a, std::span<const Mat2> b,
                                            double u, double up) {
  const int n = grid.size();
  std::vector<Mat2> out(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    Mat2 s;
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m < 2; ++m) {
        cplx acc{};
        for (int q = 1; q <= n; ++q)
          for (int kp = 1; kp <= n; ++kp) {
            const int idx = find_k(grid, grid.k(kp) + grid.k(q) - grid.k(k));
            acc += a[kp - 1](j, 1 - m) * b[idx - 1](1 - m, 1 - j) * a[q - 1](1 - j, m);
          }
        s(j, m) = acc * (u * up / (double(n) * n));
      }
    out[k - 1] = s;
  }
  return out;
}

// Collision integral re-summed with explicit weights, entry by entry.
inline Mat2 naive_collision(const kbe::TwoTimeFunction& g, const kbe::TwoTimeFunction& s, int k, int i, int l,
                            double dt, bool greater, bool langreth) {
  using kbe::Component;
  const Component own = greater ? Component::greater : Component::lesser;
  const int upper = langreth ? l : i;
  auto w = [&](int idx, int n) { return n == 0 ? 0.0 : ((idx == 0 || idx == n) ? 0.5 * dt : dt); };
  Mat2 out;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      cplx acc{};
      for (int t = 0; t <= i; ++t)
        for (int x = 0; x < 2; ++x) {
          const cplx gd = g.at(Component::greater, k, i, t)(r, x) - g.at(Component::lesser, k, i, t)(r, x);
          acc += w(t, i) * gd * s.at(own, k, t, l)(x, c);
        }
      for (int t = 0; t <= upper; ++t)
        for (int x = 0; x < 2; ++x) {
          const cplx sd = s.at(Component::lesser, k, t, l)(x, c) - s.at(Component::greater, k, t, l)(x, c);
          acc += w(t, upper) * g.at(own, k, i, t)(r, x) * sd;
        }
      out(r, c) = acc;
    }
  return out;
}

inline double rel_err(std::span<const Mat2> x, std::span<const Mat2> y) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num = std::max(num, kbe::max_abs(x[i] - y[i]));
    den = std::max(den, kbe::max_abs(y[i]));
  }
  return den == 0.0 ? num : num / den;
}

}  // namespace oracle
