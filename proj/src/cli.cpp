#include "kbe/cli.hpp"

#include <cstdio>
#include <fstream>
#include <memory>

#include "json.hpp"

namespace kbe::cli {

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return static_cast<int>(err->exit_code());
  return 1;
}

std::uint16_t trajectory_flags(const RunOptions& o) {
  std::uint16_t f = 0;
  if (o.model.hf_mode == HfMode::on) f |= flags::hf;
  if (o.step.limit == LimitMode::langreth) f |= flags::langreth;
  if (o.step.quadrature == QuadratureKind::simpson) f |= flags::simpson;
  if (o.step.propagator == PropagatorMode::exponential) f |= flags::exponential;
  return f;
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::unique_ptr<std::ofstream> open_out(const std::string& path) {
  auto f = std::make_unique<std::ofstream>(path, std::ios::trunc);
  if (!*f) throw IoError("cannot create " + path);
  return f;
}

}  // namespace

void write_observables_header(std::ostream& out) { out << "t,mean_n_v,mean_n_c,density,residual,iterations\n"; }

void write_observables_row(std::ostream& out, const Observables& obs, const StepReport* report) {
  out << num(obs.t) << ',' << num(obs.mean_n_v) << ',' << num(obs.mean_n_c) << ',' << num(obs.density) << ','
      << num(report ? report->residual : 0.0) << ',' << (report ? report->iterations : 0) << '\n';
}

std::string report_line(const StepReport& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["converged"] = r.converged;
  if (!r.converged) j["warning"] = "corrector did not reach the tolerance within max_iter";
  j["residual_history"] = r.residual_history;
  j["anticommutation_drift"] = r.anticommutation_drift;
  j["density"] = r.density;
  j["density_drift"] = r.density_drift;
  auto& t = j["timings_s"];
  for (int c = 0; c < static_cast<int>(engine::KernelClass::count_); ++c)
    t[std::string(engine::to_string(static_cast<engine::KernelClass>(c)))] = r.timings.seconds[static_cast<std::size_t>(c)];
  return j.dump();
}

RunResult cmd_run(const RunConfig& cfg, std::ostream& fallback) {
  std::unique_ptr<std::ofstream> obs_file;
  std::unique_ptr<std::ofstream> rep_file;
  if (!cfg.observables_path.empty()) obs_file = open_out(cfg.observables_path);
  if (!cfg.report_path.empty()) rep_file = open_out(cfg.report_path);
  std::ostream& obs = obs_file ? *obs_file : fallback;

  write_observables_header(obs);
  RunResult result = run(cfg.options, [&](const Observables& o, const StepReport* r) {
    write_observables_row(obs, o, r);
    if (r && rep_file) *rep_file << report_line(*r) << '\n';
  });
  obs.flush();
  if (obs_file && !*obs_file) throw IoError("cannot write " + cfg.observables_path);
  if (rep_file && !rep_file->flush()) throw IoError("cannot write " + cfg.report_path);
  if (!cfg.trajectory_path.empty())
    write_trajectory(cfg.trajectory_path, result.trajectory, trajectory_flags(cfg.options));
  return result;
}

void cmd_bench(const bench::Options& o, std::ostream& out) {
  const auto r = bench::run(o);
  bench::write_header(out);
  bench::write_row(out, r);
}

void cmd_sweep(const bench::Options& base, const std::vector<int>& block_sizes, const std::vector<int>& workers,
               std::ostream& out) {
  if (block_sizes.empty() || workers.empty())
    throw ConfigError("sweep needs at least one block size and one worker count", "block_size");
  bench::write_header(out);
  for (int b : block_sizes)
    for (int w : workers) {
      bench::Options o = base;
      o.schedule.block_size = b;
      o.schedule.workers = w;
      bench::write_row(out, bench::run(o));
    }
}

void cmd_scaling(const bench::ScalingOptions& o, std::ostream& out) {
  bench::write_scaling(out, o.mode, bench::scaling(o));
}

void cmd_inspect(const std::string& path, std::ostream& out) {
  const auto bytes = read_file(path);
  const auto h = decode_header(bytes);
  decode_trajectory(bytes);  // validates the body size
  nlohmann::ordered_json j;
  j["magic"] = "KBE1";
  j["version"] = h.version;
  j["n_k"] = h.n_k;
  j["n_t"] = h.n_t;
  j["dt"] = h.dt;
  j["bands"] = h.bands;
  j["flags"] = h.flags;
  j["hf"] = (h.flags & flags::hf) != 0;
  j["limit_mode"] = (h.flags & flags::langreth) ? "langreth" : "as-printed";
  j["quadrature"] = (h.flags & flags::simpson) ? "simpson" : "trapezoid";
  j["propagator"] = (h.flags & flags::exponential) ? "exponential" : "cayley";
  j["bytes"] = bytes.size();
  out << j.dump(2) << '\n';
}

}  // namespace kbe::cli
