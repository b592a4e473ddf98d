#pragma once

#include <cstdint>
#include <string>

#include "kbe/propagator.hpp"

namespace kbe {

/// Everything a `run` needs, read from a flat JSON object.
///
/// Required keys: n_k, n_t, dt. Anything not listed in the README is rejected
/// with a ConfigError carrying the key, before any state is allocated.
struct RunConfig {
  RunOptions options;
  std::string trajectory_path;
  std::string observables_path;
  std::string report_path;
  std::uint64_t seed = 0;
};

RunConfig parse_config(const std::string& json_text);
/// Throws IoError when the file cannot be read.
RunConfig load_config(const std::string& path);

/// KBE_WORKERS, when set, replaces the worker count of any schedule.
int worker_override(int configured);

}  // namespace kbe
