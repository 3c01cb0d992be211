#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace myopic {

std::uint64_t splitmix64(std::uint64_t x);

// Seeded random stream. Built on mt19937_64, whose output sequence is fixed by
// the standard; the float conversion below is done by hand because the
// standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream derived from a master seed and a stream id.
  static Rng for_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(splitmix64(master_seed ^ splitmix64(stream_id + 0x5851f42d4c957f2dULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

  // Draws an index with probability proportional to weights[k].
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace myopic
