#include "kbe/model.hpp"

#include <cmath>
#include <string>

namespace kbe {

void ModelConfig::validate(int n_k, int n_steps) const {
  if (!(hopping >= 0.0)) throw ConfigError("hopping must be non-negative", "hopping");
  if (!std::isfinite(band_gap)) throw ConfigError("band_gap must be finite", "band_gap");
  if (!u_protocol.empty() && static_cast<int>(u_protocol.size()) < n_steps + 1)
    throw ConfigError("u_protocol needs at least n_t + 1 = " + std::to_string(n_steps + 1) +
                          " values, got " + std::to_string(u_protocol.size()),
                      "u_protocol");
  if (!dipole.empty() && static_cast<int>(dipole.size()) != n_k)
    throw ConfigError("dipole needs one entry per k-point", "dipole");
  if (!eps_v.empty() && static_cast<int>(eps_v.size()) != n_k)
    throw ConfigError("eps_v needs one entry per k-point", "eps_v");
  if (!eps_c.empty() && static_cast<int>(eps_c.size()) != n_k)
    throw ConfigError("eps_c needs one entry per k-point", "eps_c");
  if (!std::isfinite(pulse_intensity)) throw ConfigError("pulse_intensity must be finite", "pulse_intensity");
  if (!(pulse_center >= 0.0)) throw ConfigError("pulse_center must be non-negative", "pulse_center");
}

double ModelConfig::u_at(int i) const {
  if (u_protocol.empty()) return u_constant;
  if (i < 0 || i >= static_cast<int>(u_protocol.size()))
    throw ContractViolation("u_protocol has no entry for time index " + std::to_string(i));
  return u_protocol[static_cast<std::size_t>(i)];
}

BandEnergies band_energies(const ModelConfig& config, const KGrid& grid) {
  BandEnergies out;
  const auto n = static_cast<std::size_t>(grid.size());
  out.valence.resize(n);
  out.conduction.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ec = 0.5 * config.band_gap + 2.0 * config.hopping * (1.0 - std::cos(grid.values()[k]));
    out.conduction[k] = config.eps_c.empty() ? ec : config.eps_c[k];
    out.valence[k] = config.eps_v.empty() ? -ec : config.eps_v[k];
  }
  return out;
}

int pulse_index(double dt, const ModelConfig& config) {
  return static_cast<int>(std::lround(config.pulse_center / dt));
}

double pulse_amplitude(double t, double dt, const ModelConfig& config) {
  if (config.pulse_intensity == 0.0) return 0.0;
  const double at = pulse_index(dt, config) * dt;
  return std::abs(t - at) <= 1e-9 * dt ? config.pulse_intensity / dt : 0.0;
}

Mat2 mean_field(std::span<const Mat2> rho, double u) {
  if (rho.empty() || u == 0.0) return Mat2{};
  cplx nv{}, nc{}, cv{};
  for (const auto& r : rho) {
    nv += r(0, 0);
    nc += r(1, 1);
    cv += r(1, 0);
  }
  const double scale = u / static_cast<double>(rho.size());
  Mat2 hf;
  // Hartree: each band feels the density of the other one.
  hf(0, 0) = scale * nc.real();
  hf(1, 1) = scale * nv.real();
  // Exchange couples the bands through the interband coherence.
  hf(1, 0) = -scale * cv;
  hf(0, 1) = std::conj(hf(1, 0));
  return hf;
}

SingleParticleH build_h(const KGrid& grid, const ModelConfig& config, const BandEnergies& bands,
                        int i, double dt, std::span<const Mat2> rho) {
  const double u = config.u_at(i);
  const double field = pulse_amplitude(i * dt, dt, config);
  const Mat2 hf = config.hf_mode == HfMode::on ? mean_field(rho, u) : Mat2{};

  SingleParticleH out;
  out.h.resize(static_cast<std::size_t>(grid.size()));
  for (int k = 0; k < grid.size(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    Mat2 h = Mat2::diag(bands.valence[kk], bands.conduction[kk] - u);
    const cplx d = config.dipole_at(k);
    h(1, 0) += field * d;
    h(0, 1) += field * std::conj(d);
    h += hf;
    out.h[kk] = h;
  }
  return out;
}

double hermiticity_residual(const SingleParticleH& h) {
  double r = 0.0;
  for (const auto& m : h.h) r = std::max(r, max_abs(m - adjoint(m)));
  return r;
}

}  // namespace kbe
