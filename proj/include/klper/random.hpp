#pragma once

#include <cstdint>
#include <random>

namespace klper {

using Rng = std::mt19937_64;

// Independent streams derived from one master seed. The numeric values are part
// of the reproducibility contract; append new streams, never renumber.
enum class Stream : std::uint32_t {
  env = 0,
  exploration = 1,
  replay = 2,
  init = 3,
  eval = 4,
  smoothing = 5,
};

inline Rng make_stream(std::uint64_t master_seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x6b6c7065u};
  return Rng(seq);
}

// u in [0, 1) from the top 53 bits of one draw. A generator returning 2^63
// yields exactly 0.5, which tests use to force distribution midpoints.
template <class Gen>
double unit_uniform(Gen& gen) {
  static_assert(Gen::min() == 0 && Gen::max() == ~std::uint64_t{0},
                "unit_uniform expects a full-range 64-bit generator");
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

template <class Gen>
double uniform(Gen& gen, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(gen);
}

template <class Gen>
double standard_normal(Gen& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(gen);
}

// Uniform index in [0, n). Uses libstdc++'s rejection scheme, which is
// deterministic for a given generator state.
template <class Gen>
std::size_t uniform_index(Gen& gen, std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(gen);
}

} // namespace klper
