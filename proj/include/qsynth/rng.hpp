#pragma once
// Counter-based deterministic random generator. Each draw hashes
// (seed, stream, counter) with a splitmix64-style finalizer, so results are
// reproducible bit-for-bit across platforms and independent streams can be
// split off for parallel work without coordination. The draw counter is
// exposed so transcripts can prove whether a run consumed randomness.

#include <cstdint>

namespace qsynth {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ull))) {}

  std::uint64_t next_u64() { return mix(base_ + (++count_) * 0x9E3779B97F4A7C15ull); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t draws() const { return count_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t base_;
  std::uint64_t count_ = 0;
};

}  // namespace qsynth
