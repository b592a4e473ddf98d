#include "kbe/engine.hpp"

#include <algorithm>
#include <numeric>

namespace kbe::engine {

std::string_view to_string(IndexMode m) { return m == IndexMode::lookup ? "lookup" : "on-the-fly"; }
std::string_view to_string(ReduceMode m) { return m == ReduceMode::tree ? "tree" : "sequential"; }

IndexMode parse_index_mode(std::string_view s) {
  if (s == "lookup") return IndexMode::lookup;
  if (s == "on-the-fly") return IndexMode::on_the_fly;
  throw ConfigError("index_mode must be 'lookup' or 'on-the-fly'", "index_mode");
}

ReduceMode parse_reduce_mode(std::string_view s) {
  if (s == "tree") return ReduceMode::tree;
  if (s == "sequential") return ReduceMode::sequential;
  throw ConfigError("reduce_mode must be 'tree' or 'sequential'", "reduce_mode");
}

void Schedule::validate(int n_k) const {
  if (n_shards < 1) throw ConfigError("shards must be at least 1", "shards");
  if (n_k % n_shards != 0)
    throw ConfigError("shards (" + std::to_string(n_shards) + ") must divide n_k (" + std::to_string(n_k) + ")",
                      "shards");
  if (workers < 1) throw ConfigError("workers must be at least 1", "workers");
  if (block_size < 1) throw ConfigError("block_size must be at least 1", "block_size");
}

std::size_t chunk_count(const Domain& d, const Schedule& s) {
  if (d.size() == 0) return 0;
  if (!s.fusion_enabled) return d.rows;
  const auto b = static_cast<std::size_t>(s.block_size);
  return (d.size() + b - 1) / b;
}

ChunkRange chunk_range(const Domain& d, const Schedule& s, std::size_t chunk) {
  if (!s.fusion_enabled) return {chunk * d.cols, (chunk + 1) * d.cols};
  const auto b = static_cast<std::size_t>(s.block_size);
  return {chunk * b, std::min(d.size(), (chunk + 1) * b)};
}

std::vector<ShardRange> shard_ranges(int n_k, int n_shards) {
  if (n_shards < 1 || n_k % n_shards != 0)
    throw ConfigError("shards (" + std::to_string(n_shards) + ") must divide n_k (" + std::to_string(n_k) + ")",
                      "shards");
  const int my_nk = n_k / n_shards;
  std::vector<ShardRange> out;
  for (int s = 0; s < n_shards; ++s) out.push_back({s * my_nk + 1, my_nk});
  return out;
}

WorkPlan plan(const KGrid& grid, std::size_t n_pairs, const Schedule& schedule) {
  schedule.validate(grid.size());
  WorkPlan p;
  p.shards = shard_ranges(grid.size(), schedule.n_shards);
  if (n_pairs > 0) {
    if (schedule.batch_enabled) {
      p.batches.emplace_back(n_pairs);
      std::iota(p.batches.front().begin(), p.batches.front().end(), std::size_t{0});
    } else {
      for (std::size_t i = 0; i < n_pairs; ++i) p.batches.push_back({i});
    }
  }
  const auto nk = static_cast<std::size_t>(grid.size());
  p.fused_domain = {nk, nk};
  p.chunks_per_element = chunk_count(p.fused_domain, schedule);
  return p;
}

WorkerPool::WorkerPool(int workers) : workers_(std::max(1, workers)) {
  for (int id = 1; id < workers_; ++id) threads_.emplace_back([this, id] { worker_loop(id); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::drain(int id) {
  for (;;) {
    const std::size_t item = next_.fetch_add(1, std::memory_order_relaxed);
    if (item >= n_) return;
    try {
      (*body_)(item, id);
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!error_) error_ = std::current_exception();
      next_.store(n_, std::memory_order_relaxed);
    }
  }
}

void WorkerPool::worker_loop(int id) {
  std::uint64_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mu_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    drain(id);
    {
      std::lock_guard lock(mu_);
      if (--busy_ == 0) done_cv_.notify_one();
    }
  }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t, int)>& body) {
  if (n == 0) return;
  if (workers_ == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i, 0);
    return;
  }
  {
    std::lock_guard lock(mu_);
    body_ = &body;
    n_ = n;
    next_.store(0, std::memory_order_relaxed);
    busy_ = workers_ - 1;
    error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();
  drain(0);
  std::exception_ptr err;
  {
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [&] { return busy_ == 0; });
    body_ = nullptr;
    err = error_;
  }
  if (err) std::rethrow_exception(err);
}

Mat2 reduce(std::span<Mat2> partials, ReduceMode mode) {
  if (mode == ReduceMode::tree) return tree_reduce(partials).value;
  return sequential_reduce(std::span<const Mat2>(partials));
}

std::vector<Mat2> reduce_all(PartialSumSet& set, ReduceMode mode) {
  std::vector<Mat2> out(set.items);
  for (std::size_t i = 0; i < set.items; ++i) out[i] = reduce(set.of(i), mode);
  return out;
}

std::string_view to_string(KernelClass k) {
  switch (k) {
    case KernelClass::polarizability: return "polarizability";
    case KernelClass::sigma_first: return "sigma_first";
    case KernelClass::sigma_second: return "sigma_second";
    case KernelClass::assemble: return "assemble";
    case KernelClass::collision: return "collision";
    case KernelClass::propagate: return "propagate";
    case KernelClass::combine: return "combine";
    case KernelClass::count_: break;
  }
  return "unknown";
}

double KernelTimings::total() const { return std::accumulate(seconds.begin(), seconds.end(), 0.0); }

Executor::Executor(const Schedule& schedule) : schedule_(schedule), pool_(schedule.workers) {
  if (schedule.workers < 1) throw ConfigError("workers must be at least 1", "workers");
  if (schedule.block_size < 1) throw ConfigError("block_size must be at least 1", "block_size");
  scratch_.resize(static_cast<std::size_t>(pool_.size()));
}

void Executor::ensure_scratch(std::size_t chunks) {
  for (auto& s : scratch_)
    if (s.size() < chunks) s.resize(chunks);
}

void Executor::for_each(std::size_t n_items, const std::function<void(std::size_t)>& body, KernelClass cls) {
  ScopedTimer timer(timings_, cls);
  pool_.parallel_for(n_items, [&](std::size_t item, int) { body(item); });
}

std::vector<Mat2> combine_shards(std::span<const ShardOutput> parts) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.values.size();
  std::vector<Mat2> out(total);
  std::vector<bool> filled(total, false);
  for (const auto& p : parts) {
    if (p.k_offset < 0 || static_cast<std::size_t>(p.k_offset) + p.values.size() > total)
      throw ContractViolation("shard output outside the global k-range");
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const std::size_t g = static_cast<std::size_t>(p.k_offset) + i;
      if (filled[g]) throw ContractViolation("overlapping shard outputs");
      filled[g] = true;
      out[g] = p.values[i];
    }
  }
  return out;
}

}  // namespace kbe::engine
