#include "dynsq/rng.hpp"

#include <bit>
#include <cmath>

#include "dynsq/error.hpp"

namespace dynsq {

namespace {

std::uint64_t splitmix_step(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream,
                       std::uint64_t counter) {
  std::uint64_t state = root;
  std::uint64_t h = splitmix_step(state);
  state ^= 0xD1B54A32D192ED03ULL * (stream + 0x632BE59BD9B4E019ULL);
  h ^= splitmix_step(state);
  state ^= 0xC2B2AE3D27D4EB4FULL * (counter + 0x9E3779B97F4A7C15ULL);
  h ^= splitmix_step(state);
  return h;
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) raise(ErrorCode::DomainError, "exponential rate must be positive");
  // 1 - u is in (0, 1], so the log never sees zero.
  return -std::log1p(-uniform01()) / rate;
}

double Rng::uniform_half_open(double upper) {
  if (!(upper > 0.0)) raise(ErrorCode::DomainError, "upper bound must be positive");
  return (1.0 - uniform01()) * upper;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) raise(ErrorCode::DomainError, "uniform_index over empty range");
  if (n == 1) return 0;
  std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(n - 1);
  for (;;) {
    std::uint64_t r = engine_() & mask;
    if (r < n) return r;
  }
}

}  // namespace dynsq
