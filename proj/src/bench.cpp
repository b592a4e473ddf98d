#include "kbe/bench.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <random>

#include "kbe/collision.hpp"
#include "kbe/selfenergy.hpp"

namespace kbe::bench {

std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::sigma: return "sigma";
    case Kernel::sigma2: return "sigma2";
    case Kernel::ci: return "ci";
  }
  return "?";
}

Kernel parse_kernel(std::string_view s) {
  if (s == "sigma") return Kernel::sigma;
  if (s == "sigma2") return Kernel::sigma2;
  if (s == "ci") return Kernel::ci;
  throw ConfigError("unknown kernel '" + std::string(s) + "' (expected sigma, sigma2 or ci)", "kernel");
}

std::string_view to_string(ScalingMode m) { return m == ScalingMode::weak ? "weak" : "strong"; }

ScalingMode parse_scaling_mode(std::string_view s) {
  if (s == "strong") return ScalingMode::strong;
  if (s == "weak") return ScalingMode::weak;
  throw ConfigError("scaling mode must be 'strong' or 'weak'", "mode");
}

void Options::validate() const {
  if (n_k < 2 || n_k % 2 != 0) throw ConfigError("n_k must be an even integer >= 2", "n_k");
  if (n_t < 1) throw ConfigError("n_t must be at least 1", "n_t");
  if (reps < 1) throw ConfigError("reps must be at least 1", "reps");
  if (warmup < 0) throw ConfigError("warmup must be non-negative", "warmup");
  schedule.validate(n_k);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace {

using Clock = std::chrono::steady_clock;

void fill_random(TwoTimeFunction& f, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (Component c : {Component::lesser, Component::greater})
    for (int k = 0; k < f.n_k_local(); ++k)
      for (int i = 0; i <= n; ++i)
        for (int l = 0; l <= n; ++l)
          for (auto& z : f.at(c, k, i, l).a) z = cplx{nd(rng), nd(rng)};
  f.set_frontier(n);
}

}  // namespace

Result run(const Options& options) {
  options.validate();
  const KGrid grid(options.n_k);
  const int n = options.n_t - 1;
  const int cap = std::max(n, 1);
  const double dt = 0.02;

  std::mt19937_64 rng(options.seed);
  TwoTimeFunction g(options.n_k, 0, cap, dt);
  TwoTimeFunction sig(options.n_k, 0, cap, dt);
  fill_random(g, n, rng);
  fill_random(sig, n, rng);
  const FrontierSlice frontier = frontier_of(g, n);
  ModelConfig model;
  model.u_constant = 1.0;

  const auto pairs = frontier_pairs(n);
  std::vector<SigmaInput> inputs;
  for (const auto& p : pairs)
    for (Component c : {Component::lesser, Component::greater}) inputs.push_back(sigma_input(frontier, p, c, model));

  const auto g_shards = scatter(g, options.schedule.n_shards);
  const auto s_shards = scatter(sig, options.schedule.n_shards);
  const auto ranges = engine::shard_ranges(options.n_k, options.schedule.n_shards);
  const QuadratureTable rule(cap, dt, QuadratureKind::trapezoid);

  Result res;
  res.options = options;
  res.pairs = options.kernel == Kernel::ci ? static_cast<std::size_t>(2 * (n + 1)) : pairs.size();
  res.samples.assign(static_cast<std::size_t>(options.reps), 0.0);

  for (std::size_t s = 0; s < ranges.size(); ++s) {
    engine::Executor ex(options.schedule);
    SelfEnergyKernels kernels(grid, ex);
    TwoTimeFunction target(ranges[s].k_count, ranges[s].k_offset(), cap, dt);
    std::vector<Mat2> out(inputs.size() * static_cast<std::size_t>(ranges[s].k_count));
    CollisionSlice slice;

    std::function<void()> body;
    switch (options.kernel) {
      case Kernel::sigma:
        body = [&] { evaluate_sigma_batched(target, frontier, model, kernels); };
        break;
      case Kernel::sigma2:
        body = [&] {
          if (options.schedule.batch_enabled) {
            kernels.sigma_second(inputs, ranges[s], out);
          } else {
            const auto m = static_cast<std::size_t>(ranges[s].k_count);
            for (std::size_t i = 0; i < inputs.size(); ++i)
              kernels.sigma_second({&inputs[i], 1}, ranges[s], std::span<Mat2>(out).subspan(i * m, m));
          }
        };
        break;
      case Kernel::ci:
        body = [&] { collision_frontier(g_shards[s], s_shards[s], n, rule, LimitMode::as_printed, ex, slice); };
        break;
    }

    for (int w = 0; w < options.warmup; ++w) body();
    std::vector<double> own;
    for (int r = 0; r < options.reps; ++r) {
      const auto t0 = Clock::now();
      body();
      const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
      own.push_back(sec);
      res.samples[static_cast<std::size_t>(r)] += sec;
    }
    res.shard_max_s = std::max(res.shard_max_s, median(own));
  }
  res.median_s = median(res.samples);
  const auto [lo, hi] = std::minmax_element(res.samples.begin(), res.samples.end());
  res.spread = res.median_s > 0.0 ? (*hi - *lo) / res.median_s : 0.0;
  res.per_pair_s = res.median_s / static_cast<double>(res.pairs);
  return res;
}

void write_header(std::ostream& out) {
  out << "kernel,n_k,n_t,workers,shards,block_size,batch,fusion,index_mode,reduce_mode,reps,median_s,spread,"
         "shard_max_s,per_pair_s\n";
}

void write_row(std::ostream& out, const Result& r) {
  const auto& o = r.options;
  const auto& s = o.schedule;
  out << to_string(o.kernel) << ',' << o.n_k << ',' << o.n_t << ',' << s.workers << ',' << s.n_shards << ','
      << s.block_size << ',' << (s.batch_enabled ? "on" : "off") << ',' << (s.fusion_enabled ? "on" : "off") << ','
      << engine::to_string(s.index_mode) << ',' << engine::to_string(s.reduce_mode) << ',' << o.reps << ','
      << r.median_s << ',' << r.spread << ',' << r.shard_max_s << ',' << r.per_pair_s << '\n';
}

std::vector<ScalingRow> scaling(const ScalingOptions& options) {
  if (options.shards.empty() || options.workers.empty() || options.kernels.empty())
    throw ConfigError("scaling needs at least one kernel, shard count and worker count", "shards");
  std::vector<ScalingRow> rows;
  for (Kernel kernel : options.kernels) {
    const std::size_t first = rows.size();
    for (int shards : options.shards) {
      for (int workers : options.workers) {
        Options o = options.base;
        o.kernel = kernel;
        o.schedule.n_shards = shards;
        o.schedule.workers = workers;
        o.n_k = options.mode == ScalingMode::weak ? options.k_per_shard * shards : options.n_k;
        const Result r = run(o);

        ScalingRow row;
        row.kernel = kernel;
        row.shards = shards;
        row.workers = workers;
        row.n_k = o.n_k;
        row.n_t = o.n_t;
        row.time_s = r.shard_max_s;
        row.total_s = r.median_s;
        if (rows.size() > first) {
          const ScalingRow& base = rows[first];
          const double resources = static_cast<double>(shards * workers) / (base.shards * base.workers);
          const double gain = base.time_s / row.time_s;
          if (options.mode == ScalingMode::strong) {
            row.speedup = gain;
            row.efficiency = gain / resources;
          } else {
            row.speedup = gain * resources;
            row.efficiency = gain;
          }
          row.ratio_prev = row.time_s / rows.back().time_s;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_scaling(std::ostream& out, ScalingMode mode, const std::vector<ScalingRow>& rows) {
  out << "mode,kernel,shards,workers,n_k,n_t,time_s,total_s,speedup,efficiency,ratio_prev\n";
  for (const auto& r : rows)
    out << to_string(mode) << ',' << to_string(r.kernel) << ',' << r.shards << ',' << r.workers << ',' << r.n_k << ','
        << r.n_t << ',' << r.time_s << ',' << r.total_s << ',' << r.speedup << ',' << r.efficiency << ','
        << r.ratio_prev << '\n';
}

}  // namespace kbe::bench
