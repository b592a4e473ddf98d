#include "kbe/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace kbe {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "n_k",        "n_t",         "dt",          "band_gap",    "hopping",      "u",
      "u_protocol", "pulse_intensity", "pulse_center", "dipole",  "eps_v",        "eps_c",
      "hf_mode",    "tolerance",   "max_iter",    "quadrature",  "limit_mode",   "propagator",
      "shards",     "workers",     "block_size",  "batch",       "fusion",       "index_mode",
      "reduce_mode", "memory_budget_mb", "trajectory", "observables", "report",  "seed"};
  return keys;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what, key);
}

double get_number(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad(key, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < -(1LL << 31) || x > (1LL << 31) - 1) bad(key, "integer out of range");
  return static_cast<int>(x);
}

bool get_bool(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_reals(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array()) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) bad(key, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// Dipole entries are either real numbers or [re, im] pairs.
std::vector<cplx> get_complex(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array()) bad(key, "expected an array");
  std::vector<cplx> out;
  for (const auto& x : v) {
    if (x.is_number()) {
      out.emplace_back(x.get<double>(), 0.0);
    } else if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number()) {
      out.emplace_back(x[0].get<double>(), x[1].get<double>());
    } else {
      bad(key, "entries must be numbers or [re, im] pairs");
    }
  }
  return out;
}

template <class F>
auto parse_enum(const std::string& key, const std::string& value, F&& parse) {
  try {
    return parse(value);
  } catch (const ConfigError& e) {
    bad(key, e.what());
  }
}

}  // namespace

int worker_override(int configured) {
  const char* env = std::getenv("KBE_WORKERS");
  if (env == nullptr || *env == '\0') return configured;
  char* end = nullptr;
  const long w = std::strtol(env, &end, 10);
  if (*end != '\0' || w < 1 || w > 4096) throw ConfigError("KBE_WORKERS must be a positive integer", "workers");
  return static_cast<int>(w);
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what(), "");
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object", "");
  for (const auto& [key, _] : j.items())
    if (!known_keys().count(key)) bad(key, "unknown key");
  for (const char* key : {"n_k", "n_t", "dt"})
    if (!j.contains(key)) bad(key, "required key is missing");

  RunConfig cfg;
  auto& o = cfg.options;
  auto& m = o.model;
  auto& s = o.step;
  auto& sch = o.schedule;
  o.n_k = get_int(j, "n_k");
  s.n_steps = get_int(j, "n_t");
  s.dt = get_number(j, "dt");
  if (o.n_k < 2 || o.n_k % 2 != 0) bad("n_k", "must be an even integer >= 2");
  if (s.n_steps < 0) bad("n_t", "must be non-negative");
  if (!(s.dt > 0.0)) bad("dt", "must be positive");

  if (j.contains("band_gap")) m.band_gap = get_number(j, "band_gap");
  if (j.contains("hopping")) m.hopping = get_number(j, "hopping");
  if (j.contains("u")) m.u_constant = get_number(j, "u");
  if (j.contains("u_protocol")) m.u_protocol = get_reals(j, "u_protocol");
  if (j.contains("pulse_intensity")) m.pulse_intensity = get_number(j, "pulse_intensity");
  if (j.contains("pulse_center")) m.pulse_center = get_number(j, "pulse_center");
  if (j.contains("dipole")) m.dipole = get_complex(j, "dipole");
  if (j.contains("eps_v")) m.eps_v = get_reals(j, "eps_v");
  if (j.contains("eps_c")) m.eps_c = get_reals(j, "eps_c");
  if (j.contains("hf_mode")) m.hf_mode = get_bool(j, "hf_mode") ? HfMode::on : HfMode::off;

  if (j.contains("tolerance")) s.tolerance = get_number(j, "tolerance");
  if (j.contains("max_iter")) s.max_iter = get_int(j, "max_iter");
  if (j.contains("quadrature")) s.quadrature = parse_enum("quadrature", get_string(j, "quadrature"), parse_quadrature);
  if (j.contains("limit_mode")) s.limit = parse_enum("limit_mode", get_string(j, "limit_mode"), parse_limit_mode);
  if (j.contains("propagator")) s.propagator = parse_enum("propagator", get_string(j, "propagator"), parse_propagator);

  if (j.contains("shards")) sch.n_shards = get_int(j, "shards");
  if (j.contains("workers")) sch.workers = get_int(j, "workers");
  if (j.contains("block_size")) sch.block_size = get_int(j, "block_size");
  if (j.contains("batch")) sch.batch_enabled = get_bool(j, "batch");
  if (j.contains("fusion")) sch.fusion_enabled = get_bool(j, "fusion");
  if (j.contains("index_mode"))
    sch.index_mode = parse_enum("index_mode", get_string(j, "index_mode"), engine::parse_index_mode);
  if (j.contains("reduce_mode"))
    sch.reduce_mode = parse_enum("reduce_mode", get_string(j, "reduce_mode"), engine::parse_reduce_mode);
  sch.workers = worker_override(sch.workers);

  if (j.contains("memory_budget_mb")) {
    const double mb = get_number(j, "memory_budget_mb");
    if (!(mb > 0.0)) bad("memory_budget_mb", "must be positive");
    o.memory_budget = static_cast<std::size_t>(mb * 1024.0 * 1024.0);
  }
  if (j.contains("trajectory")) cfg.trajectory_path = get_string(j, "trajectory");
  if (j.contains("observables")) cfg.observables_path = get_string(j, "observables");
  if (j.contains("report")) cfg.report_path = get_string(j, "report");
  if (j.contains("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_unsigned()) bad("seed", "expected a non-negative integer");
    cfg.seed = v.get<std::uint64_t>();
  }

  s.validate();
  sch.validate(o.n_k);
  m.validate(o.n_k, s.n_steps);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file " + path);
  return parse_config(ss.str());
}

}  // namespace kbe
