#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kbe/cli.hpp"

using namespace kbe;
namespace fs = std::filesystem;

namespace {

std::string tmp(const std::string& name) { return (fs::temp_directory_path() / ("kbe_test_" + name)).string(); }

std::string key_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

int lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("config validation names the key") {
  CHECK(key_of(R"({"n_k": 8, "n_t": 4})") == "dt");
  CHECK(key_of(R"({"n_k": 8, "dt": 0.1})") == "n_t");
  CHECK(key_of(R"({"n_k": 7, "n_t": 4, "dt": 0.1})") == "n_k");
  CHECK(key_of(R"({"n_k": 8, "n_t": 4, "dt": -0.1})") == "dt");
  CHECK(key_of(R"({"n_k": 8, "n_t": 4, "dt": "x"})") == "dt");
  CHECK(key_of(R"({"n_k": 8, "n_t": 4, "dt": 0.1, "colour": 1})") == "colour");
  CHECK(key_of(R"({"n_k": 8, "n_t": 4, "dt": 0.1, "shards": 3})") == "shards");
  CHECK(key_of(R"({"n_k": 8, "n_t": 4, "dt": 0.1, "quadrature": "gauss"})") == "quadrature");
  CHECK(key_of(R"({"n_k": 8, "n_t": 4, "dt": 0.1, "u_protocol": [1, 2]})") == "u_protocol");
  CHECK(key_of(R"({"n_k": 8, "n_t": 4, "dt": 0.1, "max_iter": 0})") == "max_iter");
  CHECK(key_of("[1, 2]").empty());
  CHECK(key_of("{").empty());

  const auto c = parse_config(R"({"n_k": 8, "n_t": 4, "dt": 0.1, "u": 0.5, "hf_mode": true,
    "dipole": [1, [0, 1], 1, 1, 1, 1, 1, 1], "limit_mode": "langreth", "propagator": "exponential",
    "shards": 2, "block_size": 32, "fusion": false, "index_mode": "lookup", "reduce_mode": "sequential",
    "memory_budget_mb": 16, "trajectory": "x.bin", "seed": 7})");
  CHECK(c.options.model.u_constant == 0.5);
  CHECK(c.options.model.hf_mode == HfMode::on);
  CHECK(c.options.model.dipole[1] == cplx{0.0, 1.0});
  CHECK(c.options.step.limit == LimitMode::langreth);
  CHECK(c.options.schedule.n_shards == 2);
  CHECK(c.options.schedule.index_mode == engine::IndexMode::lookup);
  CHECK(c.options.memory_budget == 16u << 20);
  CHECK(c.trajectory_path == "x.bin");
  CHECK(c.seed == 7);
  CHECK(cli::trajectory_flags(c.options) == (flags::hf | flags::langreth | flags::exponential));
  CHECK_THROWS_AS(load_config(tmp("does_not_exist.json")), IoError);
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code(ConfigError("x")) == 2);
  CHECK(cli::exit_code(PoisonedStateError("x")) == 3);
  CHECK(cli::exit_code(IoError("x")) == 4);
  CHECK(cli::exit_code(CapacityError("x")) == 2);
}

TEST_CASE("run writes observables, report and a trajectory that round-trips") {
  auto cfg = parse_config(R"({"n_k": 4, "n_t": 6, "dt": 0.05, "u": 0.4, "pulse_intensity": 0.2, "pulse_center": 0.1})");
  cfg.trajectory_path = tmp("a.bin");
  cfg.observables_path = tmp("a.csv");
  cfg.report_path = tmp("a.jsonl");
  std::ostringstream sink;
  cli::cmd_run(cfg, sink);
  const auto bytes = read_file(cfg.trajectory_path);
  CHECK(bytes.size() == kTrajectoryHeaderBytes + 2 * 4 * 4 * 7 * 7 * 16);
  TrajectoryHeader h;
  const auto g = read_trajectory(cfg.trajectory_path, &h);
  CHECK(h.n_k == 4);
  CHECK(h.n_t == 6);
  CHECK(h.dt == 0.05);
  CHECK(encode_trajectory(g, h.flags) == bytes);

  std::stringstream obs;
  obs << std::ifstream(cfg.observables_path).rdbuf();
  CHECK(lines(obs.str()) == 1 + 7);
  CHECK(obs.str().rfind("t,mean_n_v,mean_n_c,density,residual,iterations\n", 0) == 0);
  std::stringstream rep;
  rep << std::ifstream(cfg.report_path).rdbuf();
  CHECK(lines(rep.str()) == 6);

  cfg.trajectory_path = tmp("b.bin");
  cli::cmd_run(cfg, sink);
  CHECK(read_file(tmp("b.bin")) == bytes);

  std::ostringstream info;
  cli::cmd_inspect(tmp("a.bin"), info);
  CHECK(info.str().find("\"n_t\": 6") != std::string::npos);
}

TEST_CASE("zero-step run") {
  auto cfg = parse_config(R"({"n_k": 4, "n_t": 0, "dt": 0.05})");
  cfg.trajectory_path = tmp("z.bin");
  std::ostringstream obs;
  cli::cmd_run(cfg, obs);
  CHECK(lines(obs.str()) == 2);
  const auto g = read_trajectory(cfg.trajectory_path);
  CHECK(g.frontier() == 0);
  CHECK(encode_trajectory(g) == read_file(cfg.trajectory_path));
}

TEST_CASE("corrupt trajectories are rejected") {
  TwoTimeGF g(4, 0, 2, 0.1);
  g.set_frontier(2);
  auto bytes = encode_trajectory(g);
  auto cut = bytes;
  cut.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_trajectory(cut), IoError);
  cut.resize(10);
  CHECK_THROWS_AS(decode_trajectory(cut), IoError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_trajectory(magic), IoError);
  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(decode_trajectory(version), IoError);
  bytes.push_back(0);
  CHECK_THROWS_AS(decode_trajectory(bytes), IoError);
  CHECK_THROWS_AS(read_trajectory(tmp("missing.bin")), IoError);
}

TEST_CASE("bench, sweep and scaling tables") {
  bench::Options o;
  o.n_k = 8;
  o.n_t = 3;
  o.reps = 5;
  o.warmup = 2;
  for (auto k : {bench::Kernel::sigma, bench::Kernel::sigma2, bench::Kernel::ci}) {
    o.kernel = k;
    std::ostringstream out;
    cli::cmd_bench(o, out);
    CHECK(lines(out.str()) == 2);
    const auto r = bench::run(o);
    CHECK(r.samples.size() == 5);
    CHECK(r.median_s > 0.0);
    CHECK(r.pairs == (k == bench::Kernel::ci ? 6u : 5u));
  }
  CHECK_THROWS_AS(bench::parse_kernel("gemm"), ConfigError);

  std::ostringstream sweep;
  cli::cmd_sweep(o, {16, 64}, {1, 2, 3}, sweep);
  CHECK(lines(sweep.str()) == 1 + 6);
  CHECK(sweep.str().find(",32,") == std::string::npos);
  std::ostringstream single;
  cli::cmd_sweep(o, {64}, {1}, single);
  CHECK(lines(single.str()) == 2);

  bench::ScalingOptions s;
  s.base = o;
  s.n_k = 8;
  s.shards = {1};
  const auto rows = bench::scaling(s);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].efficiency == 1.0);
  CHECK(rows[0].speedup == 1.0);
  s.mode = bench::ScalingMode::weak;
  s.shards = {1, 2};
  s.k_per_shard = 4;
  const auto weak = bench::scaling(s);
  REQUIRE(weak.size() == 4);
  CHECK(weak[1].n_k == 8);
}
