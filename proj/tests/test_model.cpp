#include "doctest.h"
#include "kbe/model.hpp"

using namespace kbe;

TEST_CASE("band energies") {
  const KGrid g(8);
  ModelConfig c;
  const auto b = band_energies(c, g);
  CHECK(b.conduction[4] == doctest::Approx(1.0));       // k = 0: gap / 2
  CHECK(b.conduction[0] == doctest::Approx(1.0 + 2.0));  // k = -pi: + 4 t
  for (std::size_t k = 0; k < 8; ++k) CHECK(b.valence[k] == -b.conduction[k]);
  c.eps_c.assign(8, 3.0);
  CHECK(band_energies(c, g).conduction[2] == 3.0);
}

TEST_CASE("pulse is a single grid spike") {
  ModelConfig c;
  c.pulse_intensity = 0.4;
  c.pulse_center = 0.1;
  const double dt = 0.02;
  CHECK(pulse_index(dt, c) == 5);
  CHECK(pulse_amplitude(5 * dt, dt, c) == doctest::Approx(0.4 / dt));
  CHECK(pulse_amplitude(4 * dt, dt, c) == 0.0);
  CHECK(pulse_amplitude(6 * dt, dt, c) == 0.0);
  c.pulse_intensity = 0.0;
  CHECK(pulse_amplitude(5 * dt, dt, c) == 0.0);
}

TEST_CASE("hamiltonian is Hermitian and carries the dipole coupling") {
  const KGrid g(8);
  ModelConfig c;
  c.u_constant = 0.3;
  c.pulse_intensity = 0.2;
  c.pulse_center = 0.04;
  c.dipole.assign(8, cplx{0.6, 0.8});
  c.hf_mode = HfMode::on;
  std::vector<Mat2> rho(8, Mat2::diag(1.0, 0.0));
  rho[3](0, 1) = cplx{0.1, 0.2};
  rho[3](1, 0) = cplx{0.1, -0.2};
  const auto b = band_energies(c, g);
  const auto h = build_h(g, c, b, 2, 0.02, rho);
  CHECK(hermiticity_residual(h) < 1e-15);
  const auto h0 = build_h(g, c, b, 0, 0.02, rho);
  CHECK(h0.h[1](0, 1) != h.h[1](0, 1));
  const Mat2 hf = mean_field(rho, 0.3);
  CHECK(hf(1, 1).real() == doctest::Approx(0.3));  // Hartree shift from the full valence band
  CHECK(hf(0, 1) == std::conj(hf(1, 0)));
}

TEST_CASE("validation names keys") {
  ModelConfig c;
  c.u_protocol = {0.1, 0.2};
  try {
    c.validate(8, 5);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "u_protocol");
  }
  c.u_protocol.clear();
  c.dipole.assign(3, cplx{1.0});
  CHECK_THROWS_AS(c.validate(8, 5), ConfigError);
}
