#pragma once

// Binary parameter snapshot for Mlp.
//
//   offset  size        field
//   0       8           magic "KLPRMLP1"
//   8       4           u32 n = number of layer sizes (input + hidden + output)
//   12      8*n         u64 layer sizes, input first
//   12+8n   1           u8 hidden activation tag (0 identity, 1 relu, 2 tanh)
//   13+8n   1           u8 output activation tag
//   14+8n   ...         per layer: weight (fan_in*fan_out f64, row-major), then bias (fan_out f64)
//
// All integers and floats are little-endian; f64 values are raw IEEE-754 bits,
// so save/load round-trips bit-exactly.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "klper/error.hpp"
#include "klper/numcore/mlp.hpp"

namespace klper {

static_assert(std::endian::native == std::endian::little,
              "snapshot formats assume a little-endian host");

namespace io {

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("snapshot truncated");
  return v;
}

inline void write_f64s(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

inline void read_f64s(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw Error("snapshot truncated");
}

} // namespace io

inline constexpr char kMlpMagic[8] = {'K', 'L', 'P', 'R', 'M', 'L', 'P', '1'};

inline void write_mlp(std::ostream& os, const Mlp& net) {
  os.write(kMlpMagic, sizeof kMlpMagic);
  io::write_pod(os, static_cast<std::uint32_t>(net.sizes().size()));
  for (auto s : net.sizes()) io::write_pod(os, static_cast<std::uint64_t>(s));
  io::write_pod(os, static_cast<std::uint8_t>(net.hidden_activation()));
  io::write_pod(os, static_cast<std::uint8_t>(net.output_activation()));
  for (const auto& l : net.layers()) {
    io::write_f64s(os, l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    io::write_f64s(os, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

inline Mlp read_mlp(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMlpMagic, sizeof magic) != 0) {
    throw Error("not an Mlp snapshot (bad magic)");
  }
  const auto n = io::read_pod<std::uint32_t>(is);
  if (n < 2 || n > 1024) throw Error("Mlp snapshot: implausible layer count");
  std::vector<std::size_t> sizes(n);
  for (auto& s : sizes) s = static_cast<std::size_t>(io::read_pod<std::uint64_t>(is));
  const auto hidden = io::read_pod<std::uint8_t>(is);
  const auto output = io::read_pod<std::uint8_t>(is);
  if (hidden > 2 || output > 2) throw Error("Mlp snapshot: unknown activation tag");
  Mlp net(std::move(sizes), static_cast<Activation>(hidden), static_cast<Activation>(output));
  for (auto& l : net.layers()) {
    io::read_f64s(is, l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    io::read_f64s(is, l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return net;
}

inline void save_mlp(const std::string& path, const Mlp& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FileError(path, "cannot open for writing");
  write_mlp(os, net);
  if (!os) throw FileError(path, "write failed");
}

inline Mlp load_mlp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileError(path, "cannot open for reading");
  try {
    return read_mlp(is);
  } catch (const FileError&) {
    throw;
  } catch (const Error& e) {
    throw FileError(path, e.what());
  }
}

} // namespace klper
