#pragma once

#include <cstdint>
#include <string_view>

namespace pseudoqe {

// splitmix64 stream: 64-bit state, one mixing chain per output. Pure integer
// arithmetic, so sequences are identical across runs and platforms.
//
// Parallel workers never share a stream. Each record derives its own via
// record_rng(base_seed, record_id), which makes every generated record
// independent of processing order and of --jobs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53 mantissa bits.
  double next_double();

  // Uniform integer in [lo, hi], both inclusive. Uses one draw; the modulo
  // bias is below 2^-53 for the range sizes used here.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  // Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::uint64_t state_;
};

// child_seed = mix(base_seed ^ fnv1a64(record_id)). Same base seed and record
// id always give the same child stream.
std::uint64_t stable_hash(std::uint64_t base_seed, std::string_view record_id);

inline Rng record_rng(std::uint64_t base_seed, std::string_view record_id) {
  return Rng(stable_hash(base_seed, record_id));
}

}  // namespace pseudoqe
