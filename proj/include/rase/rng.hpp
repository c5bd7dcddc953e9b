#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rase {

// splitmix64 finalizer. Fixed here (rather than <random>) so that record
// synthesis is bit-reproducible across standard library implementations.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream id for one shot. Streams for distinct (seed, shot_id, salt) are
// independent for all practical purposes, which is what makes shot synthesis
// order- and thread-count-invariant.
inline std::uint64_t derive_stream_id(std::uint64_t seed, std::uint64_t shot_id,
                                      std::uint64_t salt) {
  return splitmix64_mix(splitmix64_mix(seed ^ salt) + 0x9e3779b97f4a7c15ULL * (shot_id + 1));
}

// Deterministic per-shot generator: splitmix64 stream plus Box-Muller normals.
class ShotRng {
 public:
  explicit ShotRng(std::uint64_t stream_id) : state_(stream_id) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

  // Uniform on [0, 1).
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double next_uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, pairwise cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform_pos();
    const double u2 = next_uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rase
