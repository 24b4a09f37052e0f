#pragma once

#include <cstdint>
#include <random>

namespace starnoma {

// splitmix64 finalizer; decorrelates seeds that differ in a few bits.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives the seed for an independent named stream from one master seed.
// Stream ids are fixed constants at each call site so reruns are bit-identical.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream));
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
  return std::mt19937_64(derive_seed(master, stream));
}

// Fixed stream ids used across the library.
namespace streams {
constexpr std::uint64_t net_init = 0;
constexpr std::uint64_t env = 1;
constexpr std::uint64_t exploration = 2;
constexpr std::uint64_t replay = 3;
}  // namespace streams

}  // namespace starnoma
