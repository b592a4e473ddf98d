#include "kbe/trajectory.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace kbe {

static_assert(std::endian::native == std::endian::little, "trajectory I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'K', 'B', 'E', '1'};

template <class T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <class T>
T take(const std::vector<unsigned char>& in, std::size_t& pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::size_t body_bytes(const TrajectoryHeader& h) {
  const auto side = static_cast<std::size_t>(h.n_t) + 1;
  return 2 * static_cast<std::size_t>(h.n_k) * kBands * kBands * side * side * 2 * sizeof(double);
}

}  // namespace

std::vector<unsigned char> encode_trajectory(const TwoTimeGF& g, std::uint16_t flags) {
  if (g.k_offset() != 0) throw ContractViolation("trajectory expects a full-k function");
  const int n = g.frontier();
  TrajectoryHeader h;
  h.n_k = static_cast<std::uint32_t>(g.n_k_local());
  h.n_t = static_cast<std::uint32_t>(n);
  h.dt = g.dt();
  h.flags = flags;

  std::vector<unsigned char> out;
  out.reserve(kTrajectoryHeaderBytes + body_bytes(h));
  out.insert(out.end(), kMagic, kMagic + 4);
  put(out, h.version);
  put(out, h.n_k);
  put(out, h.n_t);
  put(out, h.dt);
  put(out, h.bands);
  put(out, h.flags);
  for (Component c : {Component::lesser, Component::greater})
    for (int k = 0; k < g.n_k_local(); ++k)
      for (int j = 0; j < kBands; ++j)
        for (int m = 0; m < kBands; ++m)
          for (int i = 0; i <= n; ++i)
            for (int l = 0; l <= n; ++l) {
              const cplx z = g.at(c, k, i, l)(j, m);
              put(out, z.real());
              put(out, z.imag());
            }
  return out;
}

TrajectoryHeader decode_header(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kTrajectoryHeaderBytes) throw IoError("trajectory truncated: header incomplete");
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) throw IoError("not a trajectory file (bad magic)");
  std::size_t pos = 4;
  TrajectoryHeader h;
  h.version = take<std::uint16_t>(bytes, pos);
  h.n_k = take<std::uint32_t>(bytes, pos);
  h.n_t = take<std::uint32_t>(bytes, pos);
  h.dt = take<double>(bytes, pos);
  h.bands = take<std::uint8_t>(bytes, pos);
  h.flags = take<std::uint16_t>(bytes, pos);
  if (h.version != 1) throw IoError("unsupported trajectory version " + std::to_string(h.version));
  if (h.bands != kBands) throw IoError("unsupported band count " + std::to_string(h.bands));
  if (h.n_k < 2 || h.n_k % 2 != 0) throw IoError("corrupt trajectory header: n_k = " + std::to_string(h.n_k));
  return h;
}

TwoTimeGF decode_trajectory(const std::vector<unsigned char>& bytes, TrajectoryHeader* header) {
  const TrajectoryHeader h = decode_header(bytes);
  const std::size_t expect = kTrajectoryHeaderBytes + body_bytes(h);
  if (bytes.size() < expect)
    throw IoError("trajectory truncated: " + std::to_string(bytes.size()) + " of " + std::to_string(expect) + " bytes");
  if (bytes.size() > expect) throw IoError("trajectory has trailing bytes");

  const int n = static_cast<int>(h.n_t);
  TwoTimeGF g(static_cast<int>(h.n_k), 0, std::max(n, 1), h.dt);
  std::size_t pos = kTrajectoryHeaderBytes;
  for (Component c : {Component::lesser, Component::greater})
    for (int k = 0; k < g.n_k_local(); ++k)
      for (int j = 0; j < kBands; ++j)
        for (int m = 0; m < kBands; ++m)
          for (int i = 0; i <= n; ++i)
            for (int l = 0; l <= n; ++l) {
              const double re = take<double>(bytes, pos);
              const double im = take<double>(bytes, pos);
              g.at(c, k, i, l)(j, m) = cplx{re, im};
            }
  g.set_frontier(n);
  if (header) *header = h;
  return g;
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path);
  return bytes;
}

void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + path);
}

void write_trajectory(const std::string& path, const TwoTimeGF& g, std::uint16_t flags) {
  write_file(path, encode_trajectory(g, flags));
}

TwoTimeGF read_trajectory(const std::string& path, TrajectoryHeader* header) {
  return decode_trajectory(read_file(path), header);
}

TrajectoryHeader read_trajectory_header(const std::string& path) { return decode_header(read_file(path)); }

}  // namespace kbe
