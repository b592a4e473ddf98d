#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "kbe/bench.hpp"
#include "kbe/config.hpp"
#include "kbe/trajectory.hpp"

namespace kbe::cli {

/// Maps any exception to the process exit code (2 config, 3 poison, 4 I/O).
int exit_code(const std::exception& e);

std::uint16_t trajectory_flags(const RunOptions& o);

void write_observables_header(std::ostream& out);
void write_observables_row(std::ostream& out, const Observables& obs, const StepReport* report);
/// One JSON object per line.
std::string report_line(const StepReport& r);

/// Runs the propagation and writes the configured outputs. Observables go to
/// `fallback` when no observables path is set. Returns the run result.
RunResult cmd_run(const RunConfig& cfg, std::ostream& fallback);

void cmd_bench(const bench::Options& o, std::ostream& out);
/// One bench row per (block_size, workers) combination, in that nesting order.
void cmd_sweep(const bench::Options& base, const std::vector<int>& block_sizes, const std::vector<int>& workers,
               std::ostream& out);
void cmd_scaling(const bench::ScalingOptions& o, std::ostream& out);
/// Prints the trajectory header as a JSON object.
void cmd_inspect(const std::string& path, std::ostream& out);

}  // namespace kbe::cli
