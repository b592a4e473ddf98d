#pragma once

#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "kbe/core.hpp"
#include "kbe/kgrid.hpp"

namespace kbe::engine {

enum class IndexMode { on_the_fly, lookup };
enum class ReduceMode { tree, sequential };

std::string_view to_string(IndexMode m);
std::string_view to_string(ReduceMode m);
IndexMode parse_index_mode(std::string_view s);
ReduceMode parse_reduce_mode(std::string_view s);

/// Parallel execution configuration.
///
/// The k-points are split into `n_shards` contiguous blocks (one per logical
/// rank). Inside a shard, output elements are work items handed to a pool of
/// `workers` threads; each item walks its inner contraction domain in chunks
/// of `block_size` elements and the per-chunk partial sums are combined by
/// the selected reducer.
struct Schedule {
  int n_shards = 1;
  int workers = 1;
  int block_size = 128;
  bool batch_enabled = true;
  bool fusion_enabled = true;
  IndexMode index_mode = IndexMode::on_the_fly;
  ReduceMode reduce_mode = ReduceMode::tree;

  /// Throws ConfigError naming the offending field.
  void validate(int n_k) const;
};

/// Inner contraction domain of one output element: `rows` x `cols`, walked
/// row-major. Fused mode flattens it and cuts chunks of block_size; nested
/// mode uses one chunk per row.
struct Domain {
  std::size_t rows = 1;
  std::size_t cols = 0;
  std::size_t size() const noexcept { return rows * cols; }
};

struct ChunkRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::size_t chunk_count(const Domain& d, const Schedule& s);
ChunkRange chunk_range(const Domain& d, const Schedule& s, std::size_t chunk);

struct ShardRange {
  int k_first = 1;  // one-based global index
  int k_count = 0;
  int k_offset() const noexcept { return k_first - 1; }
};

/// Partition of one batched evaluation.
struct WorkPlan {
  std::vector<ShardRange> shards;
  /// Groups of time-pair indices evaluated in one pass. A single group when
  /// batching is on, one group per pair otherwise.
  std::vector<std::vector<std::size_t>> batches;
  Domain fused_domain;  // n_k x n_k for the exchange contraction
  std::size_t chunks_per_element = 0;
};

/// Pure function of its inputs. Throws ConfigError when n_shards does not divide n_k.
WorkPlan plan(const KGrid& grid, std::size_t n_pairs, const Schedule& schedule);

/// Contiguous split of n_k points into n_shards blocks.
std::vector<ShardRange> shard_ranges(int n_k, int n_shards);

/// Bounded pool of persistent threads. The calling thread participates as
/// worker 0, so `workers == 1` runs inline.
class WorkerPool {
 public:
  explicit WorkerPool(int workers = 1);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const noexcept { return workers_; }

  /// Calls body(item, worker) once for every item in [0, n). Blocks until all
  /// items finish; rethrows the first exception raised by a body.
  void parallel_for(std::size_t n, const std::function<void(std::size_t, int)>& body);

 private:
  void worker_loop(int id);
  void drain(int id);

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t, int)>* body_ = nullptr;
  std::size_t n_ = 0;
  std::atomic<std::size_t> next_{0};
  int busy_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

template <class T>
struct ReduceResult {
  T value{};
  int rounds = 0;
};

/// Pairwise combine with doubling offset s = 1, 2, 4, ...: in every round,
/// element i (i a multiple of 2s) absorbs element i + s. Operates in place and
/// takes exactly ceil(log2 m) rounds for m values. The result depends only on
/// the order of `values`.
template <class T>
ReduceResult<T> tree_reduce(std::span<T> values) {
  ReduceResult<T> out;
  const std::size_t m = values.size();
  if (m == 0) return out;
  for (std::size_t s = 1; s < m; s *= 2) {
    for (std::size_t i = 0; i + s < m; i += 2 * s) values[i] += values[i + s];
    ++out.rounds;
  }
  out.value = values[0];
  return out;
}

template <class T>
T sequential_reduce(std::span<const T> values) {
  T acc{};
  for (const auto& v : values) acc += v;
  return acc;
}

/// ceil(log2 m), zero for m <= 1.
inline int tree_rounds(std::size_t m) { return m <= 1 ? 0 : static_cast<int>(std::bit_width(m - 1)); }

/// Per-chunk partial sums for a set of output elements. Each partial holds the
/// four band combinations in separate accumulators.
struct PartialSumSet {
  std::size_t items = 0;
  std::size_t chunks = 0;
  std::vector<Mat2> partials;  // [item][chunk]

  std::span<Mat2> of(std::size_t item) { return {partials.data() + item * chunks, chunks}; }
  std::span<const Mat2> of(std::size_t item) const { return {partials.data() + item * chunks, chunks}; }
};

Mat2 reduce(std::span<Mat2> partials, ReduceMode mode);
std::vector<Mat2> reduce_all(PartialSumSet& set, ReduceMode mode);

enum class KernelClass : int {
  polarizability = 0,
  sigma_first,
  sigma_second,
  assemble,
  collision,
  propagate,
  combine,
  count_
};

std::string_view to_string(KernelClass k);

struct KernelTimings {
  std::array<double, static_cast<int>(KernelClass::count_)> seconds{};
  double& operator[](KernelClass k) { return seconds[static_cast<int>(k)]; }
  double operator[](KernelClass k) const { return seconds[static_cast<int>(k)]; }
  double total() const;
};

/// Adds wall time of a scope to a timing slot.
class ScopedTimer {
 public:
  ScopedTimer(KernelTimings& t, KernelClass k) : t_(t), k_(k), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    t_[k_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  KernelTimings& t_;
  KernelClass k_;
  std::chrono::steady_clock::time_point start_;
};

/// Runs chunked reductions on a worker pool. Scratch buffers are allocated on
/// first use and reused by every later call.
class Executor {
 public:
  explicit Executor(const Schedule& schedule);

  const Schedule& schedule() const noexcept { return schedule_; }
  WorkerPool& pool() noexcept { return pool_; }
  KernelTimings& timings() noexcept { return timings_; }
  const KernelTimings& timings() const noexcept { return timings_; }

  /// out[item] = reduce over chunks c of kernel(item, chunk_begin, chunk_end).
  /// `kernel` must be pure; the result is independent of the worker count.
  template <class Kernel>
  void reduce_items(std::size_t n_items, const Domain& domain, Kernel&& kernel, std::span<Mat2> out,
                    KernelClass cls) {
    ScopedTimer timer(timings_, cls);
    const std::size_t chunks = chunk_count(domain, schedule_);
    ensure_scratch(chunks);
    pool_.parallel_for(n_items, [&](std::size_t item, int worker) {
      std::span<Mat2> buf{scratch_[static_cast<std::size_t>(worker)].data(), chunks};
      for (std::size_t c = 0; c < chunks; ++c) {
        const ChunkRange r = chunk_range(domain, schedule_, c);
        buf[c] = kernel(item, r.begin, r.end);
      }
      out[item] = reduce(buf, schedule_.reduce_mode);
    });
  }

  /// Same evaluation as reduce_items but keeps every chunk partial.
  template <class Kernel>
  PartialSumSet execute(std::size_t n_items, const Domain& domain, Kernel&& kernel) {
    PartialSumSet set;
    set.items = n_items;
    set.chunks = n_items == 0 ? 0 : chunk_count(domain, schedule_);
    set.partials.resize(set.items * set.chunks);
    pool_.parallel_for(n_items, [&](std::size_t item, int) {
      auto buf = set.of(item);
      for (std::size_t c = 0; c < set.chunks; ++c) {
        const ChunkRange r = chunk_range(domain, schedule_, c);
        buf[c] = kernel(item, r.begin, r.end);
      }
    });
    return set;
  }

  /// Plain data-parallel loop, timed under `cls`.
  void for_each(std::size_t n_items, const std::function<void(std::size_t)>& body, KernelClass cls);

 private:
  void ensure_scratch(std::size_t chunks);

  Schedule schedule_;
  WorkerPool pool_;
  KernelTimings timings_;
  std::vector<std::vector<Mat2>> scratch_;
};

/// One shard's contribution to a k-distributed output.
struct ShardOutput {
  int k_offset = 0;  // zero-based global index of the first value
  std::vector<Mat2> values;
};

/// Assembles shard outputs into one array ordered by global k-index. The
/// result does not depend on the order in which shards arrive.
std::vector<Mat2> combine_shards(std::span<const ShardOutput> parts);

}  // namespace kbe::engine
