#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbe {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr int kBands = 2;

/// Process exit codes shared by every CLI verb.
enum class ExitCode : int {
  ok = 0,
  config_error = 2,
  numerical_poison = 3,
  io_error = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::config_error; }
};

/// Invalid user configuration. `key()` names the offending entry when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A caller broke a documented precondition (index range, shape, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Requested storage exceeds the configured memory budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf detected in the propagated Green's functions.
class PoisonedStateError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::numerical_poison; }
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io_error; }
};

/// 2x2 complex block in band space, row-major: (j, m) -> a[2*j + m].
/// Band 0 is the valence band, band 1 the conduction band.
struct Mat2 {
  std::array<cplx, 4> a{};

  static constexpr Mat2 identity() { return Mat2{{cplx{1.0}, cplx{}, cplx{}, cplx{1.0}}}; }
  static constexpr Mat2 diag(cplx d0, cplx d1) { return Mat2{{d0, cplx{}, cplx{}, d1}}; }

  constexpr cplx& operator()(int j, int m) { return a[2 * j + m]; }
  constexpr const cplx& operator()(int j, int m) const { return a[2 * j + m]; }

  Mat2& operator+=(const Mat2& o) {
    for (int e = 0; e < 4; ++e) a[e] += o.a[e];
    return *this;
  }
  Mat2& operator-=(const Mat2& o) {
    for (int e = 0; e < 4; ++e) a[e] -= o.a[e];
    return *this;
  }
  Mat2& operator*=(cplx s) {
    for (auto& x : a) x *= s;
    return *this;
  }

  friend Mat2 operator+(Mat2 x, const Mat2& y) { return x += y; }
  friend Mat2 operator-(Mat2 x, const Mat2& y) { return x -= y; }
  friend Mat2 operator*(Mat2 x, cplx s) { return x *= s; }
  friend Mat2 operator*(cplx s, Mat2 x) { return x *= s; }
  friend Mat2 operator-(const Mat2& x) { return x * cplx{-1.0}; }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return Mat2{{x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
                 x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]}};
  }

  friend bool operator==(const Mat2&, const Mat2&) = default;
};

inline Mat2 adjoint(const Mat2& x) {
  return Mat2{{std::conj(x.a[0]), std::conj(x.a[2]), std::conj(x.a[1]), std::conj(x.a[3])}};
}

inline cplx trace(const Mat2& x) { return x.a[0] + x.a[3]; }

/// Largest entrywise modulus.
inline double max_abs(const Mat2& x) {
  double m = 0.0;
  for (const auto& v : x.a) m = std::max(m, std::abs(v));
  return m;
}

inline bool is_finite(const Mat2& x) {
  for (const auto& v : x.a)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

/// Projects onto the anti-Hermitian part, (x - x^dagger) / 2. The result satisfies
/// y == -adjoint(y) bit for bit.
inline Mat2 anti_hermitian_part(const Mat2& x) {
  Mat2 y;
  y.a[0] = cplx{0.0, x.a[0].imag()};
  y.a[3] = cplx{0.0, x.a[3].imag()};
  y.a[1] = 0.5 * (x.a[1] - std::conj(x.a[2]));
  y.a[2] = -std::conj(y.a[1]);
  return y;
}

/// 2x2 inverse; throws ContractViolation on a singular block.
inline Mat2 inverse(const Mat2& x) {
  const cplx det = x.a[0] * x.a[3] - x.a[1] * x.a[2];
  if (std::abs(det) == 0.0) throw ContractViolation("singular 2x2 block");
  const cplx inv = 1.0 / det;
  return Mat2{{x.a[3] * inv, -x.a[1] * inv, -x.a[2] * inv, x.a[0] * inv}};
}

}  // namespace kbe
