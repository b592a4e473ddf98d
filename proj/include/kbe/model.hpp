#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kbe/core.hpp"
#include "kbe/kgrid.hpp"

namespace kbe {

enum class HfMode { off, on };

/// Parameters of the two-band model with a dipole-coupled delta pulse.
struct ModelConfig {
  double band_gap = 2.0;
  double hopping = 0.5;
  /// Interaction U(t). Either a constant or one value per time-grid point.
  double u_constant = 0.0;
  std::vector<double> u_protocol;  // empty -> constant
  double pulse_intensity = 0.0;
  double pulse_center = 0.5;
  /// Dipole matrix element per k (zero-based); empty means d_k = 1.
  std::vector<cplx> dipole;
  /// Optional tabulated band energies overriding the cosine dispersion.
  std::vector<double> eps_v;
  std::vector<double> eps_c;
  HfMode hf_mode = HfMode::off;

  /// Throws ConfigError naming the offending key.
  void validate(int n_k, int n_steps) const;

  double u_at(int i) const;
  cplx dipole_at(int k0) const { return dipole.empty() ? cplx{1.0} : dipole[static_cast<std::size_t>(k0)]; }
};

struct BandEnergies {
  std::vector<double> valence;
  std::vector<double> conduction;
};

/// eps_c(k) = gap/2 + 2 t (1 - cos k), eps_v = -eps_c unless tabulated.
BandEnergies band_energies(const ModelConfig& config, const KGrid& grid);

/// Discretized delta pulse: I/dt at the grid point nearest the pulse center,
/// zero everywhere else. `t` is expected to lie on the time grid.
double pulse_amplitude(double t, double dt, const ModelConfig& config);
/// Grid index carrying the kick.
int pulse_index(double dt, const ModelConfig& config);

/// h(k; t) for every k of the grid.
struct SingleParticleH {
  std::vector<Mat2> h;  // zero-based k
};

/// Hartree-Fock mean field from the interband density. `rho` is the equal-time
/// density matrix rho_jm(k) = -i G<_jm(k; t, t) over all k in global order.
Mat2 mean_field(std::span<const Mat2> rho, double u);

/// Assembles diag(eps_v, eps_c - U) + E(t) [[0, d*],[d, 0]] + HF at grid point i.
SingleParticleH build_h(const KGrid& grid, const ModelConfig& config, const BandEnergies& bands,
                        int i, double dt, std::span<const Mat2> rho);

/// Largest |h - h^dagger| entry over all k.
double hermiticity_residual(const SingleParticleH& h);

}  // namespace kbe
