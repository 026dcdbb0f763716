#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sparsetrack::rng {

// SplitMix64 finalizer, used for seeding and stream derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream (xoshiro256**).
//
// Streams are value types: copying one forks the sequence. The Monte Carlo
// harness derives one independent stream per run as
//
//   Stream::for_run(master_seed, run_index)
//
// which seeds the state from SplitMix64 over the (seed, run) pair. Serial and
// parallel execution therefore draw identical sequences for a given run.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s = mix64(s);
      word = s == 0 ? 0x6a09e667f3bcc909ULL : s;  // state must not be all-zero
    }
  }

  static Stream for_run(std::uint64_t master_seed, std::uint64_t run_index) {
    return Stream(mix64(master_seed) ^ mix64(run_index * 0xd1b54a32d192ed03ULL + 1));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. Two uniforms per draw, no cached spare, so
  // the draw count per call is fixed.
  double gaussian() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n). Lemire reduction; bias is O(n / 2^64).
  int uniform_int(int n) {
    const auto wide = static_cast<unsigned __int128>(next_u64()) * static_cast<std::uint64_t>(n);
    return static_cast<int>(wide >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace sparsetrack::rng
