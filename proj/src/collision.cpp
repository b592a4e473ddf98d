#include "kbe/collision.hpp"

#include <string>

namespace kbe {

std::string_view to_string(QuadratureKind k) { return k == QuadratureKind::simpson ? "simpson" : "trapezoid"; }
std::string_view to_string(LimitMode m) { return m == LimitMode::langreth ? "langreth" : "as-printed"; }

QuadratureKind parse_quadrature(std::string_view s) {
  if (s == "trapezoid") return QuadratureKind::trapezoid;
  if (s == "simpson") return QuadratureKind::simpson;
  throw ConfigError("quadrature must be 'trapezoid' or 'simpson'", "quadrature");
}

LimitMode parse_limit_mode(std::string_view s) {
  if (s == "as-printed") return LimitMode::as_printed;
  if (s == "langreth") return LimitMode::langreth;
  throw ConfigError("limit_mode must be 'as-printed' or 'langreth'", "limit_mode");
}

std::vector<double> quadrature_weights(int n, double dt, QuadratureKind kind) {
  if (n < 0) throw ContractViolation("negative interval count");
  std::vector<double> w(static_cast<std::size_t>(n + 1), 0.0);
  if (n == 0) return w;
  if (kind == QuadratureKind::trapezoid || n == 1) {
    for (auto& x : w) x = dt;
    w.front() = w.back() = 0.5 * dt;
    return w;
  }
  // Simpson panels over points first..n (an even number of intervals).
  const int first = n % 2;
  if (first == 1) {
    w[0] += 0.5 * dt;
    w[1] += 0.5 * dt;
  }
  const double h3 = dt / 3.0;
  for (int p = first; p < n; p += 2) {
    w[static_cast<std::size_t>(p)] += h3;
    w[static_cast<std::size_t>(p + 1)] += 4.0 * h3;
    w[static_cast<std::size_t>(p + 2)] += h3;
  }
  return w;
}

QuadratureTable::QuadratureTable(int max_n, double dt, QuadratureKind kind) : kind_(kind) {
  weights_.reserve(static_cast<std::size_t>(max_n + 1));
  for (int n = 0; n <= max_n; ++n) weights_.push_back(quadrature_weights(n, dt, kind));
}

namespace {

Mat2 history_integral(const TwoTimeGF& g, const TwoTimeFunction& sigma, int k, int i, int l,
                      const QuadratureTable& rule, LimitMode limit, Component c) {
  const int upper = limit == LimitMode::as_printed ? i : l;
  const auto& w1 = rule[i];
  const auto& w2 = rule[upper];
  const auto g_less = g.row(Component::lesser, k, i);
  const auto g_great = g.row(Component::greater, k, i);
  const auto g_own = c == Component::lesser ? g_less : g_great;

  Mat2 first;
  for (int s = 0; s <= i; ++s) {
    const auto ss = static_cast<std::size_t>(s);
    if (w1[ss] == 0.0) continue;
    first += ((g_great[ss] - g_less[ss]) * sigma.at(c, k, s, l)) * cplx{w1[ss]};
  }
  Mat2 second;
  for (int s = 0; s <= upper; ++s) {
    const auto ss = static_cast<std::size_t>(s);
    if (w2[ss] == 0.0) continue;
    second += (g_own[ss] * (sigma.at(Component::lesser, k, s, l) - sigma.at(Component::greater, k, s, l))) *
              cplx{w2[ss]};
  }
  return first + second;
}

void check_args(const TwoTimeGF& g, const TwoTimeFunction& sigma, int k, int i, int l, const QuadratureTable& rule) {
  if (k < 0 || k >= g.n_k_local() || sigma.n_k_local() != g.n_k_local())
    throw ContractViolation("collision k-index outside the local range");
  if (i < 0 || l < 0 || i > g.capacity() || l > g.capacity() || sigma.capacity() < g.capacity())
    throw ContractViolation("collision time index outside the stored history");
  if (std::max(i, l) > rule.max_n()) throw ContractViolation("quadrature table too short for the history");
}

}  // namespace

Mat2 collision_lesser(const TwoTimeGF& g, const TwoTimeFunction& sigma, int k, int i, int l,
                      const QuadratureTable& rule, LimitMode limit) {
  check_args(g, sigma, k, i, l, rule);
  return history_integral(g, sigma, k, i, l, rule, limit, Component::lesser);
}

Mat2 collision_greater(const TwoTimeGF& g, const TwoTimeFunction& sigma, int k, int i, int l,
                       const QuadratureTable& rule, LimitMode limit) {
  check_args(g, sigma, k, i, l, rule);
  return history_integral(g, sigma, k, i, l, rule, limit, Component::greater);
}

void CollisionSlice::resize(int frontier, int nk) {
  n = frontier;
  n_k_local = nk;
  const auto size = static_cast<std::size_t>(nk) * static_cast<std::size_t>(frontier + 1);
  lesser_row.resize(size);
  greater_col.resize(size);
}

namespace {

// All frontier entries of one k-point. Both frontier slices are rows at t_n
// (the greater column is the adjoint of the greater row), so the history sum
// runs over s in the outer loop and sweeps the contiguous rows S(s, .) inside.
// Per entry, terms are accumulated in the same order as history_integral.
void frontier_rows(const TwoTimeGF& g, const TwoTimeFunction& sigma, int k, int n, const QuadratureTable& rule,
                   LimitMode limit, std::vector<Mat2>& acc, CollisionSlice& out) {
  const auto width = static_cast<std::size_t>(n + 1);
  acc.assign(4 * width, Mat2{});
  Mat2* first[2] = {acc.data(), acc.data() + width};
  Mat2* second[2] = {acc.data() + 2 * width, acc.data() + 3 * width};
  const auto g_less = g.row(Component::lesser, k, n);
  const auto g_great = g.row(Component::greater, k, n);
  const auto& w1 = rule[n];
  for (int s = 0; s <= n; ++s) {
    const auto ss = static_cast<std::size_t>(s);
    const auto s_less = sigma.row(Component::lesser, k, s);
    const auto s_great = sigma.row(Component::greater, k, s);
    const Mat2 spectral = g_great[ss] - g_less[ss];
    const cplx w{w1[ss]};
    const bool use_first = w1[ss] != 0.0;
    for (std::size_t l = 0; l < width; ++l) {
      const Mat2& sl = s_less[l];
      const Mat2& sg = s_great[l];
      if (use_first) {
        first[0][l] += (spectral * sl) * w;
        first[1][l] += (spectral * sg) * w;
      }
      const double w2 = limit == LimitMode::as_printed ? w1[ss] : (s <= static_cast<int>(l) ? rule[static_cast<int>(l)][ss] : 0.0);
      if (w2 == 0.0) continue;
      const Mat2 diff = sl - sg;
      second[0][l] += (g_less[ss] * diff) * cplx{w2};
      second[1][l] += (g_great[ss] * diff) * cplx{w2};
    }
  }
  for (std::size_t l = 0; l < width; ++l) {
    out.lesser(k, static_cast<int>(l)) = first[0][l] + second[0][l];
    out.greater(k, static_cast<int>(l)) = -adjoint(first[1][l] + second[1][l]);
  }
}

}  // namespace

void collision_frontier(const TwoTimeGF& g, const TwoTimeFunction& sigma, int n, const QuadratureTable& rule,
                        LimitMode limit, engine::Executor& executor, CollisionSlice& out) {
  check_args(g, sigma, 0, n, n, rule);
  const int nk = g.n_k_local();
  out.resize(n, nk);
  if (executor.schedule().batch_enabled) {
    std::vector<std::vector<Mat2>> scratch(static_cast<std::size_t>(nk));
    executor.for_each(
        static_cast<std::size_t>(nk),
        [&](std::size_t k) { frontier_rows(g, sigma, static_cast<int>(k), n, rule, limit, scratch[k], out); },
        engine::KernelClass::collision);
    return;
  }
  // One pass per frontier entry: 0..n the lesser row, n+1..2n+1 the greater column.
  const auto width = static_cast<std::size_t>(n + 1);
  for (std::size_t p = 0; p < 2 * width; ++p) {
    const int s = static_cast<int>(p % width);
    executor.for_each(
        static_cast<std::size_t>(nk),
        [&](std::size_t kk) {
          const int k = static_cast<int>(kk);
          if (p < width)
            out.lesser(k, s) = history_integral(g, sigma, k, n, s, rule, limit, Component::lesser);
          else
            out.greater(k, s) = -adjoint(history_integral(g, sigma, k, n, s, rule, limit, Component::greater));
        },
        engine::KernelClass::collision);
  }
}

CollisionSlice collision_frontier_looped(const TwoTimeGF& g, const TwoTimeFunction& sigma, int n,
                                         const QuadratureTable& rule, LimitMode limit) {
  CollisionSlice out;
  out.resize(n, g.n_k_local());
  for (int k = 0; k < g.n_k_local(); ++k) {
    for (int l = 0; l <= n; ++l) out.lesser(k, l) = collision_lesser(g, sigma, k, n, l, rule, limit);
    for (int j = 0; j <= n; ++j) out.greater(k, j) = -adjoint(collision_greater(g, sigma, k, n, j, rule, limit));
  }
  return out;
}

}  // namespace kbe
