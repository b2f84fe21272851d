#pragma once

#include <cstdint>
#include <random>

namespace dynsq {

// Substream identifiers used when expanding a root seed. Every subsystem
// draws from its own stream so runs stay reproducible when one subsystem
// changes how much randomness it consumes.
namespace streams {
inline constexpr std::uint64_t events = 1;
inline constexpr std::uint64_t graph = 2;
inline constexpr std::uint64_t schedule = 3;
inline constexpr std::uint64_t initial = 4;
inline constexpr std::uint64_t replication = 5;
}  // namespace streams

/// Counter-based seed derivation (SplitMix64 mixing). Pure function of
/// (root, stream, counter), identical on every platform.
std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream,
                       std::uint64_t counter = 0);

/// mt19937_64 plus hand-rolled variate transforms. The C++ standard pins
/// down the engine's sequence but not the <random> distributions, so the
/// transforms live here to keep output byte-identical across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01();

  /// Exponential with the given rate (> 0).
  double exponential(double rate);

  /// Uniform double in the half-open interval (0, upper].
  double uniform_half_open(double upper);

  /// Uniform integer in {0, ..., n-1}, unbiased (bitmask rejection).
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dynsq
