#include "kbe/state.hpp"

#include <algorithm>
#include <string>

namespace kbe {

TwoTimeFunction::TwoTimeFunction(int n_k_local, int k_offset, int capacity, double dt)
    : n_k_local_(n_k_local), k_offset_(k_offset), capacity_(capacity), dt_(dt) {
  if (n_k_local < 0 || k_offset < 0 || capacity < 0)
    throw ContractViolation("negative extent for two-time storage");
  const auto n = static_cast<std::size_t>(capacity + 1);
  lesser_.assign(static_cast<std::size_t>(n_k_local) * n * n, Mat2{});
  greater_.assign(lesser_.size(), Mat2{});
}

void TwoTimeFunction::set_frontier(int n) {
  if (n < 0 || n > capacity_) throw ContractViolation("frontier outside the allocated time grid");
  frontier_ = n;
}

std::size_t TwoTimeFunction::bytes_for(int n_k, int capacity) {
  const auto n = static_cast<std::size_t>(capacity) + 1;
  return 2 * static_cast<std::size_t>(n_k) * n * n * sizeof(Mat2);
}

TwoTimeGF init_state(const KGrid& grid, int n_steps, double dt, std::size_t memory_budget,
                     int n_k_local, int k_offset) {
  if (n_steps < 1) throw ContractViolation("init_state needs at least one time step");
  if (!(dt > 0.0)) throw ContractViolation("time step must be positive");
  if (n_k_local < 0) n_k_local = grid.size();
  if (k_offset < 0 || k_offset + n_k_local > grid.size())
    throw ContractViolation("local k-range outside the grid");
  const std::size_t need = TwoTimeFunction::bytes_for(n_k_local, n_steps);
  if (need > memory_budget)
    throw CapacityError("two-time storage needs " + std::to_string(need) + " bytes, budget is " +
                        std::to_string(memory_budget));

  TwoTimeGF g(n_k_local, k_offset, n_steps, dt);
  for (int k = 0; k < n_k_local; ++k) {
    g.at(Component::lesser, k, 0, 0) = Mat2::diag(kI, 0.0);
    g.at(Component::greater, k, 0, 0) = Mat2::diag(0.0, -kI);
  }
  return g;
}

void mirror_frontier(TwoTimeFunction& f, int n, Component c, bool from_row) {
  for (int k = 0; k < f.n_k_local(); ++k) {
    for (int s = 0; s < n; ++s) {
      if (from_row)
        f.at(c, k, s, n) = -adjoint(f.at(c, k, n, s));
      else
        f.at(c, k, n, s) = -adjoint(f.at(c, k, s, n));
    }
    f.at(c, k, n, n) = anti_hermitian_part(f.at(c, k, n, n));
  }
}

void mirror_frontier(TwoTimeFunction& f, int n) {
  mirror_frontier(f, n, Component::lesser, true);
  mirror_frontier(f, n, Component::greater, false);
}

void mirror_frontier(TwoTimeFunction& f) { mirror_frontier(f, f.frontier()); }

double symmetry_residual(const TwoTimeFunction& f) {
  double r = 0.0;
  for (auto c : {Component::lesser, Component::greater})
    for (int k = 0; k < f.n_k_local(); ++k)
      for (int i = 0; i <= f.frontier(); ++i)
        for (int l = 0; l <= i; ++l) r = std::max(r, max_abs(f.at(c, k, i, l) + adjoint(f.at(c, k, l, i))));
  return r;
}

Observables observables_at(const TwoTimeGF& g, int i) {
  if (i < 0 || i > g.capacity()) throw ContractViolation("observable time index out of range");
  Observables o;
  o.t = i * g.dt();
  const auto n = static_cast<std::size_t>(g.n_k_local());
  o.n_v.resize(n);
  o.n_c.resize(n);
  double sv = 0.0, sc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Mat2& m = g.at(Component::lesser, static_cast<int>(k), i, i);
    o.n_v[k] = m(0, 0).imag();
    o.n_c[k] = m(1, 1).imag();
    sv += o.n_v[k];
    sc += o.n_c[k];
  }
  if (n > 0) {
    o.mean_n_v = sv / static_cast<double>(n);
    o.mean_n_c = sc / static_cast<double>(n);
    o.density = (sv + sc) / static_cast<double>(n);
  }
  return o;
}

double anticommutation_drift(const TwoTimeGF& g, int i) {
  double r = 0.0;
  for (int k = 0; k < g.n_k_local(); ++k) {
    const Mat2 d = g.at(Component::greater, k, i, i) - g.at(Component::lesser, k, i, i) + kI * Mat2::identity();
    r = std::max(r, max_abs(d));
  }
  return r;
}

void FrontierSlice::resize(int frontier, int nk) {
  n = frontier;
  n_k = nk;
  const auto size = static_cast<std::size_t>(frontier + 1) * static_cast<std::size_t>(nk);
  for (int c = 0; c < 2; ++c) {
    row[c].resize(size);
    col[c].resize(size);
  }
}

namespace {

void copy_shard(FrontierSlice& out, const TwoTimeFunction& f, int n, int k_base) {
  for (int c = 0; c < 2; ++c) {
    const auto comp = static_cast<Component>(c);
    for (int s = 0; s <= n; ++s) {
      Mat2* row = out.row[c].data() + static_cast<std::size_t>(s) * out.n_k + k_base;
      Mat2* col = out.col[c].data() + static_cast<std::size_t>(s) * out.n_k + k_base;
      for (int k = 0; k < f.n_k_local(); ++k) {
        row[k] = f.at(comp, k, n, s);
        col[k] = f.at(comp, k, s, n);
      }
    }
  }
}

}  // namespace

FrontierSlice frontier_of(const TwoTimeFunction& f, int n) {
  if (n < 0 || n > f.capacity()) throw ContractViolation("frontier outside the allocated time grid");
  FrontierSlice out;
  out.resize(n, f.n_k_local());
  copy_shard(out, f, n, 0);
  return out;
}

void gather_into(FrontierSlice& out, std::span<const TwoTimeFunction* const> shards, int n) {
  int total = 0;
  for (const auto* s : shards) {
    if (n < 0 || n > s->capacity()) throw ContractViolation("frontier outside the allocated time grid");
    total += s->n_k_local();
  }
  // Shards are placed by their global offset, so arrival order is irrelevant.
  std::vector<bool> covered(static_cast<std::size_t>(total), false);
  for (const auto* s : shards) {
    if (s->k_offset() + s->n_k_local() > total) throw ContractViolation("shards do not tile the k-range");
    for (int k = 0; k < s->n_k_local(); ++k) {
      auto idx = static_cast<std::size_t>(s->k_offset() + k);
      if (covered[idx]) throw ContractViolation("overlapping shards");
      covered[idx] = true;
    }
  }
  out.resize(n, total);
  for (const auto* s : shards) copy_shard(out, *s, n, s->k_offset());
}

FrontierSlice gather(std::span<const TwoTimeFunction* const> shards, int n) {
  FrontierSlice out;
  gather_into(out, shards, n);
  return out;
}

std::vector<TwoTimeFunction> scatter(const TwoTimeFunction& global, int n_shards) {
  if (n_shards < 1 || global.n_k_local() % n_shards != 0)
    throw ConfigError("n_shards must divide n_k", "shards");
  const int my_nk = global.n_k_local() / n_shards;
  std::vector<TwoTimeFunction> out;
  out.reserve(static_cast<std::size_t>(n_shards));
  const auto per_k = static_cast<std::size_t>(global.capacity() + 1) * static_cast<std::size_t>(global.capacity() + 1);
  for (int s = 0; s < n_shards; ++s) {
    TwoTimeFunction part(my_nk, global.k_offset() + s * my_nk, global.capacity(), global.dt());
    for (auto c : {Component::lesser, Component::greater}) {
      const auto first = global.data(c).begin() + static_cast<std::ptrdiff_t>(s * my_nk * per_k);
      std::copy(first, first + static_cast<std::ptrdiff_t>(my_nk * per_k), part.data(c).begin());
    }
    part.set_frontier(global.frontier());
    out.push_back(std::move(part));
  }
  return out;
}

TwoTimeFunction gather_full(std::span<const TwoTimeFunction* const> shards) {
  if (shards.empty()) return {};
  int total = 0;
  for (const auto* s : shards) total += s->n_k_local();
  const auto* first = shards.front();
  TwoTimeFunction out(total, 0, first->capacity(), first->dt());
  const auto per_k = static_cast<std::size_t>(first->capacity() + 1) * static_cast<std::size_t>(first->capacity() + 1);
  for (const auto* s : shards) {
    if (s->capacity() != first->capacity()) throw ContractViolation("shards disagree on time capacity");
    if (s->k_offset() + s->n_k_local() > total) throw ContractViolation("shards do not tile the k-range");
    for (auto c : {Component::lesser, Component::greater})
      std::copy(s->data(c).begin(), s->data(c).end(),
                out.data(c).begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(s->k_offset()) * per_k));
  }
  out.set_frontier(first->frontier());
  return out;
}

}  // namespace kbe
