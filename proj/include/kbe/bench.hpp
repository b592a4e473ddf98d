#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "kbe/engine.hpp"

namespace kbe::bench {

/// sigma: full Sigma pipeline on every frontier pair. sigma2: the exchange
/// term alone. ci: collision integrals on every frontier pair.
enum class Kernel { sigma, sigma2, ci };

std::string_view to_string(Kernel k);
/// Throws ConfigError (key "kernel") for unknown names.
Kernel parse_kernel(std::string_view s);

struct Options {
  Kernel kernel = Kernel::sigma;
  int n_k = 64;
  int n_t = 4;  // time points; the frontier under test is n_t - 1
  engine::Schedule schedule;
  int reps = 5;
  int warmup = 2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Result {
  Options options;
  std::size_t pairs = 0;      // frontier pairs evaluated per repetition
  double median_s = 0.0;      // all shards, run one after another
  double spread = 0.0;        // (max - min) / median, worst shard
  double shard_max_s = 0.0;   // slowest shard timed on its own
  double per_pair_s = 0.0;    // median_s / pairs
  std::vector<double> samples;  // total seconds per measured repetition
};

/// Times the kernel on seeded synthetic two-time data with a monotonic clock.
/// Every shard is timed in isolation over `warmup` + `reps` repetitions.
Result run(const Options& options);

double median(std::vector<double> v);

void write_header(std::ostream& out);
void write_row(std::ostream& out, const Result& r);

enum class ScalingMode { strong, weak };
ScalingMode parse_scaling_mode(std::string_view s);
std::string_view to_string(ScalingMode m);

struct ScalingOptions {
  ScalingMode mode = ScalingMode::strong;
  std::vector<Kernel> kernels{Kernel::sigma, Kernel::ci};
  std::vector<int> shards{1};
  std::vector<int> workers{1};
  int n_k = 64;             // strong mode only
  int k_per_shard = 16;     // weak mode: n_k = k_per_shard * shards
  Options base;             // n_t, reps, warmup, seed and schedule flags
};

struct ScalingRow {
  Kernel kernel = Kernel::sigma;
  int shards = 1;
  int workers = 1;
  int n_k = 0;
  int n_t = 0;
  double time_s = 0.0;  // per-shard wall clock: slowest shard
  double total_s = 0.0;
  double speedup = 1.0;
  double efficiency = 1.0;
  double ratio_prev = 1.0;  // time_s / time_s of the previous row of the same kernel
};

std::vector<ScalingRow> scaling(const ScalingOptions& options);
void write_scaling(std::ostream& out, ScalingMode mode, const std::vector<ScalingRow>& rows);

}  // namespace kbe::bench
