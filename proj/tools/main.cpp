#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "kbe/cli.hpp"

namespace {

struct OutTarget {
  std::string path;
  std::unique_ptr<std::ofstream> file;
  std::ostream& stream() {
    if (path.empty()) return std::cout;
    file = std::make_unique<std::ofstream>(path, std::ios::trunc);
    if (!*file) throw kbe::IoError("cannot create " + path);
    return *file;
  }
};

struct BenchFlags {
  std::string kernel = "sigma";
  std::string index_mode = "on-the-fly";
  std::string reduce_mode = "tree";
  std::string batch = "on";
  std::string fusion = "on";
  kbe::bench::Options o;
};

void add_bench_flags(CLI::App* cmd, BenchFlags& f, bool with_kernel = true) {
  if (with_kernel) cmd->add_option("--kernel", f.kernel, "sigma, sigma2 or ci")->capture_default_str();
  cmd->add_option("--n-k", f.o.n_k, "k-points")->capture_default_str();
  cmd->add_option("--n-t", f.o.n_t, "time points (frontier n_t - 1)")->capture_default_str();
  cmd->add_option("--workers", f.o.schedule.workers)->capture_default_str();
  cmd->add_option("--shards", f.o.schedule.n_shards)->capture_default_str();
  cmd->add_option("--block-size", f.o.schedule.block_size)->capture_default_str();
  cmd->add_option("--batch", f.batch, "on|off")->capture_default_str();
  cmd->add_option("--fusion", f.fusion, "on|off")->capture_default_str();
  cmd->add_option("--index-mode", f.index_mode, "on-the-fly|lookup")->capture_default_str();
  cmd->add_option("--reduce-mode", f.reduce_mode, "tree|sequential")->capture_default_str();
  cmd->add_option("--reps", f.o.reps)->capture_default_str();
  cmd->add_option("--warmup", f.o.warmup)->capture_default_str();
  cmd->add_option("--seed", f.o.seed)->capture_default_str();
}

bool on_off(const std::string& v, const char* key) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw kbe::ConfigError(std::string(key) + " must be 'on' or 'off'", key);
}

kbe::bench::Options resolve(BenchFlags& f) {
  auto o = f.o;
  o.kernel = kbe::bench::parse_kernel(f.kernel);
  o.schedule.batch_enabled = on_off(f.batch, "batch");
  o.schedule.fusion_enabled = on_off(f.fusion, "fusion");
  o.schedule.index_mode = kbe::engine::parse_index_mode(f.index_mode);
  o.schedule.reduce_mode = kbe::engine::parse_reduce_mode(f.reduce_mode);
  o.schedule.workers = kbe::worker_override(o.schedule.workers);
  o.validate();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-time Kadanoff-Baym propagation for a two-band Hubbard model"};
  app.require_subcommand(1);

  std::string config_path;
  std::string traj_out, obs_out, rep_out;
  int run_workers = 0, run_shards = 0;
  auto* run = app.add_subcommand("run", "propagate from a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--trajectory", traj_out, "overrides the config's trajectory path");
  run->add_option("--observables", obs_out, "overrides the config's observables path");
  run->add_option("--report", rep_out, "overrides the config's report path");
  run->add_option("--workers", run_workers, "overrides workers");
  run->add_option("--shards", run_shards, "overrides shards");

  BenchFlags bench_flags;
  OutTarget bench_out;
  auto* bench = app.add_subcommand("bench", "time one kernel on synthetic data");
  add_bench_flags(bench, bench_flags);
  bench->add_option("--out", bench_out.path, "CSV path (stdout if omitted)");

  BenchFlags sweep_flags;
  OutTarget sweep_out;
  std::vector<int> sweep_blocks{32, 64, 128, 256};
  std::vector<int> sweep_workers{1, 2, 4};
  auto* sweep = app.add_subcommand("sweep", "block_size x workers timing grid");
  add_bench_flags(sweep, sweep_flags);
  sweep->add_option("--block-sizes", sweep_blocks)->delimiter(',')->capture_default_str();
  sweep->add_option("--worker-list", sweep_workers)->delimiter(',')->capture_default_str();
  sweep->add_option("--out", sweep_out.path, "CSV path (stdout if omitted)");

  BenchFlags scal_flags;
  OutTarget scal_out;
  std::string scal_mode = "strong";
  std::vector<std::string> scal_kernels{"sigma", "ci"};
  kbe::bench::ScalingOptions scal;
  auto* scaling = app.add_subcommand("scaling", "strong or weak scaling table");
  add_bench_flags(scaling, scal_flags, false);
  scaling->add_option("--mode", scal_mode, "strong|weak")->capture_default_str();
  scaling->add_option("--kernels", scal_kernels)->delimiter(',')->capture_default_str();
  scaling->add_option("--shard-list", scal.shards)->delimiter(',')->capture_default_str();
  scaling->add_option("--worker-list", scal.workers)->delimiter(',')->capture_default_str();
  scaling->add_option("--k-per-shard", scal.k_per_shard, "weak mode: n_k = k_per_shard * shards")
      ->capture_default_str();
  scaling->add_option("--out", scal_out.path, "CSV path (stdout if omitted)");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "dump a trajectory header");
  inspect->add_option("trajectory", inspect_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(kbe::ExitCode::config_error);
  }

  try {
    if (*run) {
      auto cfg = kbe::load_config(config_path);
      if (!traj_out.empty()) cfg.trajectory_path = traj_out;
      if (!obs_out.empty()) cfg.observables_path = obs_out;
      if (!rep_out.empty()) cfg.report_path = rep_out;
      if (run_workers > 0) cfg.options.schedule.workers = run_workers;
      if (run_shards > 0) cfg.options.schedule.n_shards = run_shards;
      cfg.options.schedule.validate(cfg.options.n_k);
      kbe::cli::cmd_run(cfg, std::cout);
    } else if (*bench) {
      const auto o = resolve(bench_flags);
      kbe::cli::cmd_bench(o, bench_out.stream());
    } else if (*sweep) {
      const auto o = resolve(sweep_flags);
      kbe::cli::cmd_sweep(o, sweep_blocks, sweep_workers, sweep_out.stream());
    } else if (*scaling) {
      scal.base = resolve(scal_flags);
      scal.n_k = scal.base.n_k;
      scal.mode = kbe::bench::parse_scaling_mode(scal_mode);
      scal.kernels.clear();
      for (const auto& k : scal_kernels) scal.kernels.push_back(kbe::bench::parse_kernel(k));
      kbe::cli::cmd_scaling(scal, scal_out.stream());
    } else if (*inspect) {
      kbe::cli::cmd_inspect(inspect_path, std::cout);
    }
  } catch (const kbe::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kbe::cli::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kbe::cli::exit_code(e);
  }
  return 0;
}
