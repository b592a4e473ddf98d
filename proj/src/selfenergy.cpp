#include "kbe/selfenergy.hpp"

#include <string>

namespace kbe {

using engine::Domain;
using engine::IndexMode;
using engine::KernelClass;
using engine::ShardRange;

std::vector<TimePair> frontier_pairs(int n) {
  std::vector<TimePair> out;
  out.reserve(static_cast<std::size_t>(2 * n + 1));
  for (int s = 0; s < n; ++s) out.push_back({s, n});
  for (int s = 0; s < n; ++s) out.push_back({n, s});
  out.push_back({n, n});
  return out;
}

namespace {

struct OnTheFly {
  int n_k;
  int sum(int a, int b) const noexcept { return sum_index0(a, b, n_k); }
  int diff(int a, int b) const noexcept { return diff_index0(a, b, n_k); }
};

struct Lookup {
  const IndexTables* t;
  int sum(int a, int b) const noexcept { return t->sum0(a, b); }
  int diff(int a, int b) const noexcept { return t->diff0(a, b); }
};

template <class F>
decltype(auto) with_index(IndexMode mode, int n_k, const IndexTables& tables, F&& f) {
  if (mode == IndexMode::lookup) return f(Lookup{&tables});
  return f(OnTheFly{n_k});
}

double prefactor(const SigmaInput& in, int n_k) {
  return in.u_t * in.u_tp / (static_cast<double>(n_k) * static_cast<double>(n_k));
}

}  // namespace

SelfEnergyKernels::SelfEnergyKernels(const KGrid& grid, engine::Executor& executor)
    : grid_(grid), executor_(executor), tables_(grid) {}

void SelfEnergyKernels::check(std::span<const SigmaInput> inputs) const {
  const auto n = static_cast<std::size_t>(grid_.size());
  for (const auto& in : inputs)
    if (in.a.size() != n || in.b.size() != n)
      throw ContractViolation("self-energy input slices must cover all " + std::to_string(n) + " k-points");
}

void SelfEnergyKernels::polarizability(std::span<const SigmaInput> inputs, std::span<Mat2> out) {
  check(inputs);
  const int nk = grid_.size();
  const auto n = static_cast<std::size_t>(nk);
  if (out.size() != inputs.size() * n) throw ContractViolation("polarization buffer has the wrong size");
  with_index(executor_.schedule().index_mode, nk, tables_, [&](auto idx) {
    auto kernel = [&, idx](std::size_t item, std::size_t begin, std::size_t end) {
      const SigmaInput& in = inputs[item / n];
      const int q = static_cast<int>(item % n);
      Mat2 acc;
      for (std::size_t f = begin; f < end; ++f) {
        const int kp = static_cast<int>(f);
        const Mat2& a = in.a[static_cast<std::size_t>(idx.sum(kp, q))];
        const Mat2& b = in.b[f];
        acc.a[0] += a.a[0] * b.a[0];
        acc.a[1] += a.a[1] * b.a[2];
        acc.a[2] += a.a[2] * b.a[1];
        acc.a[3] += a.a[3] * b.a[3];
      }
      return acc;
    };
    executor_.reduce_items(out.size(), Domain{1, n}, kernel, out, KernelClass::polarizability);
  });
}

void SelfEnergyKernels::sigma_first(std::span<const SigmaInput> inputs, std::span<const Mat2> polarization,
                                    ShardRange range, std::span<Mat2> out) {
  check(inputs);
  const int nk = grid_.size();
  const auto n = static_cast<std::size_t>(nk);
  const auto m = static_cast<std::size_t>(range.k_count);
  if (polarization.size() != inputs.size() * n) throw ContractViolation("polarization slice has the wrong size");
  if (out.size() != inputs.size() * m) throw ContractViolation("self-energy buffer has the wrong size");
  with_index(executor_.schedule().index_mode, nk, tables_, [&](auto idx) {
    auto kernel = [&, idx](std::size_t item, std::size_t begin, std::size_t end) {
      const std::size_t input = item / m;
      const SigmaInput& in = inputs[input];
      const Mat2* p = polarization.data() + input * n;
      const int k = range.k_offset() + static_cast<int>(item % m);
      Mat2 acc;
      for (std::size_t f = begin; f < end; ++f) {
        const int q = static_cast<int>(f);
        const Mat2& pq = p[f];
        const Mat2& a = in.a[static_cast<std::size_t>(idx.diff(k, q))];
        acc.a[0] += pq.a[3] * a.a[0];
        acc.a[1] += pq.a[2] * a.a[1];
        acc.a[2] += pq.a[1] * a.a[2];
        acc.a[3] += pq.a[0] * a.a[3];
      }
      return acc;
    };
    executor_.reduce_items(out.size(), Domain{1, n}, kernel, out, KernelClass::sigma_first);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= prefactor(inputs[i / m], nk);
}

void SelfEnergyKernels::sigma_second(std::span<const SigmaInput> inputs, ShardRange range, std::span<Mat2> out) {
  check(inputs);
  const int nk = grid_.size();
  const auto n = static_cast<std::size_t>(nk);
  const auto m = static_cast<std::size_t>(range.k_count);
  if (out.size() != inputs.size() * m) throw ContractViolation("self-energy buffer has the wrong size");
  with_index(executor_.schedule().index_mode, nk, tables_, [&](auto idx) {
    // Fused (q, k') domain, q slow. Four band combinations in separate accumulators.
    auto kernel = [&, idx](std::size_t item, std::size_t begin, std::size_t end) {
      const SigmaInput& in = inputs[item / m];
      const int k = range.k_offset() + static_cast<int>(item % m);
      int q = static_cast<int>(begin / n);
      int kp = static_cast<int>(begin % n);
      Mat2 acc;
      for (std::size_t f = begin; f < end; ++f) {
        const Mat2& aq = in.a[static_cast<std::size_t>(q)];
        const Mat2& ak = in.a[static_cast<std::size_t>(kp)];
        const Mat2& b = in.b[static_cast<std::size_t>(idx.diff(idx.sum(kp, q), k))];
        acc.a[0] += ak.a[1] * b.a[3] * aq.a[2];
        acc.a[1] += ak.a[0] * b.a[1] * aq.a[3];
        acc.a[2] += ak.a[3] * b.a[2] * aq.a[0];
        acc.a[3] += ak.a[2] * b.a[0] * aq.a[1];
        if (++kp == nk) {
          kp = 0;
          ++q;
        }
      }
      return acc;
    };
    executor_.reduce_items(out.size(), Domain{n, n}, kernel, out, KernelClass::sigma_second);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= prefactor(inputs[i / m], nk);
}

void SelfEnergyKernels::evaluate(std::span<const SigmaInput> inputs, ShardRange range, std::span<Mat2> out) {
  const auto n = static_cast<std::size_t>(grid_.size());
  const auto m = static_cast<std::size_t>(range.k_count);
  if (out.size() != inputs.size() * m) throw ContractViolation("self-energy buffer has the wrong size");
  if (p_buf_.size() < inputs.size() * n) p_buf_.resize(inputs.size() * n);
  if (s1_buf_.size() < inputs.size() * m) s1_buf_.resize(inputs.size() * m);
  if (s2_buf_.size() < inputs.size() * m) s2_buf_.resize(inputs.size() * m);
  std::span<Mat2> p{p_buf_.data(), inputs.size() * n};
  std::span<Mat2> s1{s1_buf_.data(), inputs.size() * m};
  std::span<Mat2> s2{s2_buf_.data(), inputs.size() * m};
  polarizability(inputs, p);
  sigma_first(inputs, p, range, s1);
  sigma_second(inputs, range, s2);
  engine::ScopedTimer timer(executor_.timings(), KernelClass::assemble);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s1[i] - s2[i];
}

PolarizationSlice polarizability(const SigmaInput& input, const KGrid& grid, const engine::Schedule& schedule) {
  engine::Executor ex(schedule);
  SelfEnergyKernels kernels(grid, ex);
  PolarizationSlice p;
  p.n_k = grid.size();
  p.values.resize(static_cast<std::size_t>(grid.size()));
  kernels.polarizability({&input, 1}, p.values);
  return p;
}

SelfEnergySlice sigma_first(const PolarizationSlice& p, const SigmaInput& input, const KGrid& grid,
                            ShardRange range, const engine::Schedule& schedule) {
  engine::Executor ex(schedule);
  SelfEnergyKernels kernels(grid, ex);
  SelfEnergySlice out{range, std::vector<Mat2>(static_cast<std::size_t>(range.k_count))};
  kernels.sigma_first({&input, 1}, p.values, range, out.values);
  return out;
}

SelfEnergySlice sigma_second(const SigmaInput& input, const KGrid& grid, ShardRange range,
                             const engine::Schedule& schedule) {
  engine::Executor ex(schedule);
  SelfEnergyKernels kernels(grid, ex);
  SelfEnergySlice out{range, std::vector<Mat2>(static_cast<std::size_t>(range.k_count))};
  kernels.sigma_second({&input, 1}, range, out.values);
  return out;
}

SelfEnergySlice assemble_sigma(const SelfEnergySlice& s1, const SelfEnergySlice& s2) {
  if (s1.values.size() != s2.values.size() || s1.range.k_first != s2.range.k_first)
    throw ContractViolation("self-energy terms cover different ranges");
  SelfEnergySlice out{s1.range, s1.values};
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= s2.values[i];
  return out;
}

SigmaInput sigma_input(const FrontierSlice& frontier, TimePair pair, Component c, const ModelConfig& model) {
  const int n = frontier.n;
  SigmaInput in;
  in.u_t = model.u_at(pair.t);
  in.u_tp = model.u_at(pair.tp);
  if (pair.tp == n) {
    // (s, n): a = X^c(s, n) from the column, b = X^c'(n, s) from the row.
    in.a = frontier.col_at(c, pair.t);
    in.b = frontier.row_at(other(c), pair.t);
  } else if (pair.t == n) {
    in.a = frontier.row_at(c, pair.tp);
    in.b = frontier.col_at(other(c), pair.tp);
  } else {
    throw ContractViolation("time pair is not on the frontier");
  }
  return in;
}

namespace {

void store(TwoTimeFunction& sigma, std::span<const TimePair> pairs, std::span<const Mat2> values) {
  const auto m = static_cast<std::size_t>(sigma.n_k_local());
  for (std::size_t job = 0; job < 2 * pairs.size(); ++job) {
    const TimePair pr = pairs[job / 2];
    const auto c = static_cast<Component>(job % 2);
    for (std::size_t k = 0; k < m; ++k) sigma.at(c, static_cast<int>(k), pr.t, pr.tp) = values[job * m + k];
  }
}

ShardRange range_of(const TwoTimeFunction& f) { return {f.k_offset() + 1, f.n_k_local()}; }

}  // namespace

void evaluate_sigma_batched(TwoTimeFunction& sigma, const FrontierSlice& frontier, const ModelConfig& model,
                            SelfEnergyKernels& kernels) {
  if (frontier.n_k != kernels.grid().size()) throw ContractViolation("frontier is not globally replicated");
  const auto pairs = frontier_pairs(frontier.n);
  const auto work = engine::plan(kernels.grid(), pairs.size(), kernels.executor().schedule());
  const ShardRange range = range_of(sigma);
  const auto m = static_cast<std::size_t>(range.k_count);

  std::vector<SigmaInput> inputs;
  std::vector<TimePair> batch_pairs;
  std::vector<Mat2> values;
  for (const auto& batch : work.batches) {
    inputs.clear();
    batch_pairs.clear();
    for (std::size_t p : batch) {
      batch_pairs.push_back(pairs[p]);
      for (auto c : {Component::lesser, Component::greater})
        inputs.push_back(sigma_input(frontier, pairs[p], c, model));
    }
    values.resize(inputs.size() * m);
    kernels.evaluate(inputs, range, values);
    store(sigma, batch_pairs, values);
  }
}

void evaluate_sigma_looped(TwoTimeFunction& sigma, const FrontierSlice& frontier, const ModelConfig& model,
                           SelfEnergyKernels& kernels) {
  const ShardRange range = range_of(sigma);
  std::vector<Mat2> values(static_cast<std::size_t>(range.k_count));
  for (const TimePair pr : frontier_pairs(frontier.n)) {
    for (auto c : {Component::lesser, Component::greater}) {
      const SigmaInput in = sigma_input(frontier, pr, c, model);
      kernels.evaluate({&in, 1}, range, values);
      for (int k = 0; k < range.k_count; ++k) sigma.at(c, k, pr.t, pr.tp) = values[static_cast<std::size_t>(k)];
    }
  }
}

}  // namespace kbe
