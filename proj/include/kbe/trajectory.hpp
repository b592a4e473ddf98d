#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kbe/state.hpp"

namespace kbe {

/// Binary two-time trajectory, little-endian.
///
///   "KBE1" | version u16 | n_k u32 | N_t u32 | dt f64 | bands u8 | flags u16
///
/// followed by (re, im) f64 pairs for component (lesser, greater), k, j, m,
/// i, l, slowest to fastest, with i, l = 0..N_t. N_t is the frontier of the
/// stored function, not its capacity.
struct TrajectoryHeader {
  std::uint16_t version = 1;
  std::uint32_t n_k = 0;
  std::uint32_t n_t = 0;
  double dt = 0.0;
  std::uint8_t bands = 2;
  std::uint16_t flags = 0;
};

inline constexpr std::size_t kTrajectoryHeaderBytes = 4 + 2 + 4 + 4 + 8 + 1 + 2;

namespace flags {
inline constexpr std::uint16_t hf = 1u << 0;
inline constexpr std::uint16_t langreth = 1u << 1;
inline constexpr std::uint16_t simpson = 1u << 2;
inline constexpr std::uint16_t exponential = 1u << 3;
}  // namespace flags

std::vector<unsigned char> encode_trajectory(const TwoTimeGF& g, std::uint16_t flags = 0);
/// Throws IoError on wrong magic, unsupported version or band count, or a
/// size that does not match the header. Nothing is returned on failure.
TwoTimeGF decode_trajectory(const std::vector<unsigned char>& bytes, TrajectoryHeader* header = nullptr);
TrajectoryHeader decode_header(const std::vector<unsigned char>& bytes);

void write_trajectory(const std::string& path, const TwoTimeGF& g, std::uint16_t flags = 0);
TwoTimeGF read_trajectory(const std::string& path, TrajectoryHeader* header = nullptr);
TrajectoryHeader read_trajectory_header(const std::string& path);

std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<unsigned char>& bytes);

}  // namespace kbe
